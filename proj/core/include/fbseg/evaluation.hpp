// Copyright 2026 The fbseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fbseg/metrics.hpp"

namespace fbseg {

struct StackScore {
  std::string stack_id;
  double dice = 0.0;
  // Optional stratification tag (acquisition centre).
  std::string centre;

  friend bool operator==(const StackScore&, const StackScore&) = default;
};

struct MethodScores {
  std::string method_name;
  std::vector<StackScore> scores;
  std::filesystem::path source;

  std::vector<double> values() const;
};

// Throws ValidationError for duplicate identifiers or values outside [0, 1].
void validate_scores(const MethodScores& scores);

// Scores every prediction mask in pred_dir against the ground-truth mask in
// gt_dir with the same NIfTI filename stem. Unpaired files on either side are
// skipped and described in `warnings`. Throws IoError if a directory is
// missing and ValidationError if no pairs are found.
MethodScores evaluate_directory(const std::filesystem::path& pred_dir,
                                const std::filesystem::path& gt_dir,
                                const std::string& method_name,
                                std::vector<std::string>* warnings = nullptr);

// Score CSV: header `stack_id,dice`, optionally with a trailing `centre`
// column. The method name defaults to the file stem.
MethodScores read_scores_csv(const std::filesystem::path& path, std::string method_name = {});
std::string scores_to_csv(const MethodScores& scores);
void write_scores_csv(const MethodScores& scores, const std::filesystem::path& path);

struct MethodSummary {
  std::string method;
  std::string source;
  ScoreSummary summary;
  // Per-centre summaries, present when the scores carry centre tags.
  std::map<std::string, ScoreSummary> by_centre;

  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct ReportRow {
  std::string stack_id;
  std::string method;
  double dice = 0.0;
  std::string centre;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct EvalReport {
  double outlier_threshold = kOutlierThreshold;
  std::vector<MethodSummary> methods;  // in input order
  std::vector<ReportRow> rows;         // method-major, input order
  std::vector<std::string> stratification;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Summarizes each method (order preserved) and counts scores strictly below
// the threshold. Throws ValidationError if `methods` is empty.
EvalReport compare(std::span<const MethodScores> methods, double threshold = kOutlierThreshold);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
// identifier,method,dice[,centre] per stack.
std::string report_to_csv(const EvalReport& report);

// Writes report.json, report.csv and boxplot.png into out_dir (created if
// needed). Throws IoError if anything cannot be written.
void render_report(const EvalReport& report, const std::filesystem::path& out_dir);
void render_boxplot(const EvalReport& report, const std::filesystem::path& png_path);

}  // namespace fbseg
