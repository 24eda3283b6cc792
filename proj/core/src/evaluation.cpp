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

#include "fbseg/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fbseg/errors.hpp"
#include "fbseg/nifti.hpp"
#include "json.hpp"
#include "png_canvas.hpp"

namespace fbseg {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::map<std::string, std::filesystem::path> nifti_files_by_stem(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("directory '" + dir.string() + "' does not exist");
  }
  std::map<std::string, std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_nifti_path(entry.path())) {
      out[nifti_stem(entry.path())] = entry.path();
    }
  }
  return out;
}

nlohmann::ordered_json summary_json(const ScoreSummary& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  j["min"] = s.min;
  j["q1"] = s.q1;
  j["median"] = s.median;
  j["q3"] = s.q3;
  j["max"] = s.max;
  j["mean"] = s.mean;
  j["outliers"] = s.outliers;
  return j;
}

ScoreSummary summary_from_json(const nlohmann::json& j) {
  ScoreSummary s;
  s.count = j.at("count").get<std::size_t>();
  s.min = j.at("min").get<double>();
  s.q1 = j.at("q1").get<double>();
  s.median = j.at("median").get<double>();
  s.q3 = j.at("q3").get<double>();
  s.max = j.at("max").get<double>();
  s.mean = j.at("mean").get<double>();
  s.outliers = j.at("outliers").get<std::size_t>();
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<double> MethodScores::values() const {
  std::vector<double> v;
  v.reserve(scores.size());
  for (const auto& s : scores) v.push_back(s.dice);
  return v;
}

void validate_scores(const MethodScores& scores) {
  std::set<std::string> seen;
  for (const auto& s : scores.scores) {
    if (!seen.insert(s.stack_id).second) {
      throw ValidationError("method '" + scores.method_name + "' scores stack '" + s.stack_id +
                            "' twice");
    }
    if (!(s.dice >= 0.0 && s.dice <= 1.0)) {
      throw ValidationError("method '" + scores.method_name + "' has Dice " +
                            format_double(s.dice) + " outside [0, 1] for '" + s.stack_id + "'");
    }
  }
}

MethodScores evaluate_directory(const std::filesystem::path& pred_dir,
                                const std::filesystem::path& gt_dir,
                                const std::string& method_name,
                                std::vector<std::string>* warnings) {
  const auto preds = nifti_files_by_stem(pred_dir);
  const auto gts = nifti_files_by_stem(gt_dir);
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  MethodScores out;
  out.method_name = method_name;
  out.source = pred_dir;
  for (const auto& [stem, pred_path] : preds) {
    const auto gt = gts.find(stem);
    if (gt == gts.end()) {
      warn("prediction '" + pred_path.string() + "' has no ground truth; skipped");
      continue;
    }
    const Mask pred = load_mask(pred_path);
    const Mask truth = load_mask(gt->second);
    out.scores.push_back(StackScore{stem, dice_3d(pred, truth).value, ""});
  }
  for (const auto& [stem, gt_path] : gts) {
    if (!preds.count(stem)) warn("ground truth '" + gt_path.string() + "' has no prediction");
  }
  if (out.scores.empty()) {
    throw ValidationError("no prediction/ground-truth pairs found between '" + pred_dir.string() +
                          "' and '" + gt_dir.string() + "'");
  }
  return out;
}

MethodScores read_scores_csv(const std::filesystem::path& path, std::string method_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open score file '" + path.string() + "'");
  MethodScores out;
  out.method_name = method_name.empty() ? path.stem().string() : std::move(method_name);
  out.source = path;

  std::string line;
  std::size_t line_no = 0;
  bool with_centre = false;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line == "stack_id,dice") {
        with_centre = false;
      } else if (line == "stack_id,dice,centre") {
        with_centre = true;
      } else {
        throw ParseError("expected header 'stack_id,dice' in '" + path.string() + "'", line_no);
      }
      header = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != (with_centre ? 3u : 2u)) {
      throw ParseError("wrong number of fields in '" + path.string() + "'", line_no);
    }
    StackScore s;
    s.stack_id = fields[0];
    const char* begin = fields[1].data();
    const char* end = begin + fields[1].size();
    const auto res = std::from_chars(begin, end, s.dice);
    if (res.ec != std::errc{} || res.ptr != end) {
      throw ParseError("invalid Dice value '" + fields[1] + "' in '" + path.string() + "'",
                       line_no);
    }
    if (with_centre) s.centre = fields[2];
    out.scores.push_back(std::move(s));
  }
  if (!header) throw ParseError("empty score file '" + path.string() + "'", 1);
  validate_scores(out);
  return out;
}

std::string scores_to_csv(const MethodScores& scores) {
  const bool with_centre = std::any_of(scores.scores.begin(), scores.scores.end(),
                                       [](const StackScore& s) { return !s.centre.empty(); });
  std::string out = with_centre ? "stack_id,dice,centre\n" : "stack_id,dice\n";
  for (const auto& s : scores.scores) {
    out += s.stack_id + "," + format_double(s.dice);
    if (with_centre) out += "," + s.centre;
    out += "\n";
  }
  return out;
}

void write_scores_csv(const MethodScores& scores, const std::filesystem::path& path) {
  write_text(path, scores_to_csv(scores));
}

EvalReport compare(std::span<const MethodScores> methods, double threshold) {
  if (methods.empty()) throw ValidationError("compare needs at least one method");
  EvalReport report;
  report.outlier_threshold = threshold;
  bool any_centre = false;
  for (const auto& m : methods) {
    validate_scores(m);
    if (m.scores.empty()) {
      throw ValidationError("method '" + m.method_name + "' has no scores");
    }
    const std::vector<double> values = m.values();
    MethodSummary summary{m.method_name, m.source.string(), summarize(values, threshold), {}};
    std::map<std::string, std::vector<double>> by_centre;
    for (const auto& s : m.scores) {
      report.rows.push_back(ReportRow{s.stack_id, m.method_name, s.dice, s.centre});
      if (!s.centre.empty()) by_centre[s.centre].push_back(s.dice);
    }
    for (const auto& [centre, vals] : by_centre) {
      summary.by_centre[centre] = summarize(vals, threshold);
      any_centre = true;
    }
    report.methods.push_back(std::move(summary));
  }
  report.stratification = {"method"};
  if (any_centre) report.stratification.push_back("centre");
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["outlier_threshold"] = report.outlier_threshold;
  j["stratification"] = report.stratification;
  j["methods"] = nlohmann::ordered_json::array();
  for (const auto& m : report.methods) {
    nlohmann::ordered_json mj;
    mj["method"] = m.method;
    mj["source"] = m.source;
    mj["summary"] = summary_json(m.summary);
    if (!m.by_centre.empty()) {
      nlohmann::ordered_json cj = nlohmann::ordered_json::object();
      for (const auto& [centre, s] : m.by_centre) cj[centre] = summary_json(s);
      mj["by_centre"] = cj;
    }
    j["methods"].push_back(mj);
  }
  j["scores"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json rj;
    rj["stack_id"] = r.stack_id;
    rj["method"] = r.method;
    rj["dice"] = r.dice;
    if (!r.centre.empty()) rj["centre"] = r.centre;
    j["scores"].push_back(rj);
  }
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport report;
    report.outlier_threshold = j.at("outlier_threshold").get<double>();
    report.stratification = j.at("stratification").get<std::vector<std::string>>();
    for (const auto& mj : j.at("methods")) {
      MethodSummary m;
      m.method = mj.at("method").get<std::string>();
      m.source = mj.at("source").get<std::string>();
      m.summary = summary_from_json(mj.at("summary"));
      if (mj.contains("by_centre")) {
        for (const auto& [centre, sj] : mj["by_centre"].items()) {
          m.by_centre[centre] = summary_from_json(sj);
        }
      }
      report.methods.push_back(std::move(m));
    }
    for (const auto& rj : j.at("scores")) {
      report.rows.push_back(ReportRow{rj.at("stack_id").get<std::string>(),
                                      rj.at("method").get<std::string>(),
                                      rj.at("dice").get<double>(), rj.value("centre", "")});
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  }
}

std::string report_to_csv(const EvalReport& report) {
  const bool with_centre = std::any_of(report.rows.begin(), report.rows.end(),
                                       [](const ReportRow& r) { return !r.centre.empty(); });
  std::string out = with_centre ? "identifier,method,dice,centre\n" : "identifier,method,dice\n";
  for (const auto& r : report.rows) {
    out += r.stack_id + "," + r.method + "," + format_double(r.dice);
    if (with_centre) out += "," + r.centre;
    out += "\n";
  }
  return out;
}

void render_boxplot(const EvalReport& report, const std::filesystem::path& png_path) {
  using detail::Rgb;
  constexpr Rgb kWhite{255, 255, 255};
  constexpr Rgb kBlack{0, 0, 0};
  constexpr Rgb kGrey{200, 200, 200};
  constexpr Rgb kRed{200, 30, 30};
  constexpr std::array<Rgb, 6> kPalette{Rgb{70, 130, 180}, Rgb{60, 170, 90}, Rgb{230, 200, 50},
                                        Rgb{200, 110, 60}, Rgb{150, 100, 190}, Rgb{120, 120, 120}};

  const int boxes = static_cast<int>(report.methods.size());
  const int left = 60;
  const int top = 20;
  const int plot_h = 360;
  const int slot = 110;
  const int width = left + std::max(boxes, 1) * slot + 30;
  const int height = top + plot_h + 40;
  detail::Canvas canvas(width, height, kWhite);
  auto y_of = [&](double v) {
    return top + static_cast<int>(std::lround((1.0 - std::clamp(v, 0.0, 1.0)) * plot_h));
  };

  for (int t = 0; t <= 10; ++t) {
    const double v = t / 10.0;
    const int y = y_of(v);
    canvas.hline(left, width - 20, y, kGrey, 2);
    char label[8];
    std::snprintf(label, sizeof(label), "%.1f", v);
    canvas.text(8, y - 5, label, kBlack);
  }
  canvas.vline(left, top, top + plot_h, kBlack);
  canvas.hline(left, width - 20, top + plot_h, kBlack);
  canvas.hline(left, width - 20, y_of(report.outlier_threshold), kRed, 6);

  for (int b = 0; b < boxes; ++b) {
    const MethodSummary& m = report.methods[static_cast<std::size_t>(b)];
    std::vector<double> values;
    for (const auto& r : report.rows) {
      if (r.method == m.method) values.push_back(r.dice);
    }
    std::sort(values.begin(), values.end());
    const ScoreSummary& s = m.summary;
    const double iqr = s.q3 - s.q1;
    double low = s.q1;
    double high = s.q3;
    for (double v : values) {
      if (v >= s.q1 - 1.5 * iqr) low = std::min(low, v);
      if (v <= s.q3 + 1.5 * iqr) high = std::max(high, v);
    }
    const int cx = left + slot / 2 + b * slot;
    const int half = slot / 4;
    const Rgb color = kPalette[static_cast<std::size_t>(b) % kPalette.size()];
    canvas.vline(cx, y_of(high), y_of(s.q3), kBlack);
    canvas.vline(cx, y_of(s.q1), y_of(low), kBlack);
    canvas.hline(cx - half / 2, cx + half / 2, y_of(high), kBlack);
    canvas.hline(cx - half / 2, cx + half / 2, y_of(low), kBlack);
    canvas.fill_rect(cx - half, y_of(s.q3), cx + half, y_of(s.q1), color);
    canvas.rect(cx - half, y_of(s.q3), cx + half, y_of(s.q1), kBlack);
    canvas.hline(cx - half, cx + half, y_of(s.median), kBlack);
    canvas.hline(cx - half, cx + half, y_of(s.median) + 1, kBlack);
    for (double v : values) {
      if (v < low || v > high) canvas.circle(cx, y_of(v), 3, kBlack);
    }
    canvas.text(cx - 6, top + plot_h + 12, std::to_string(b + 1), kBlack);
  }
  canvas.write_png(png_path);
}

void render_report(const EvalReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create report directory '" + out_dir.string() + "'");
  }
  write_text(out_dir / "report.json", report_to_json(report));
  write_text(out_dir / "report.csv", report_to_csv(report));
  render_boxplot(report, out_dir / "boxplot.png");
}

}  // namespace fbseg
