// Copyright 2026 The behavesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV and SVG renderings of evaluation results.

#include <cstdio>
#include <set>
#include <sstream>

#include "behavesim/evaluator.h"
#include "json.hpp"

namespace behavesim {
namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string cell_columns(const CellKey& key, const CellSummary& c) {
  return std::string(platform_name(key.first)) + "," +
         std::string(element_kind_name(key.second)) + "," + std::to_string(c.n) +
         "," + fixed(c.f1.mean) + "," + fixed(c.f1.stddev) + "," +
         fixed(c.accuracy.mean) + "," + fixed(c.accuracy.stddev) + "," +
         std::to_string(c.unparseable);
}

constexpr const char* kCellHeader =
    "platform,kind,n,f1_mean,f1_std,accuracy_mean,accuracy_std,unparseable";

constexpr const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3",
                                    "#e7298a", "#66a61e", "#e6ab02",
                                    "#a6761d", "#666666", "#1f78b4"};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string report_csv(const EvalReport& report) {
  std::string out = std::string(kCellHeader) + ",trials,single_trial\n";
  for (const auto& [key, c] : report.cells) {
    out += cell_columns(key, c) + "," + std::to_string(report.trials) + "," +
           (report.single_trial ? "true" : "false") + "\n";
  }
  return out;
}

std::string ablation_csv(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::string out = std::string("ablation,") + kCellHeader + "\n";
  for (const auto& [name, report] : rows) {
    for (const auto& [key, c] : report.cells) {
      out += name + "," + cell_columns(key, c) + "\n";
    }
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = std::string("window,") + kCellHeader + "\n";
  for (const auto& p : points) {
    for (const auto& [key, c] : p.report.cells) {
      out += window_label(p.window) + "," + cell_columns(key, c) + "\n";
    }
  }
  return out;
}

std::string similarity_csv(const std::vector<SimilarityRow>& rows) {
  std::string out = "section,bucket,lower,upper,n,mean_correct\n";
  for (const auto& r : rows) {
    out += r.section + "," + std::to_string(r.bucket) + "," + fixed(r.lower, 2) +
           "," + fixed(r.upper, 2) + "," + std::to_string(r.n) + "," +
           (r.mean_correct ? fixed(*r.mean_correct) : std::string()) + "\n";
  }
  return out;
}

std::string sweep_svg(const std::vector<SweepPoint>& points) {
  constexpr double kWidth = 720, kHeight = 420;
  constexpr double kLeft = 60, kRight = 200, kTop = 30, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const std::size_t n = points.size();
  auto x_at = [&](std::size_t i) {
    return kLeft + (n <= 1 ? plot_w / 2 : plot_w * static_cast<double>(i) /
                                              static_cast<double>(n - 1));
  };
  auto y_at = [&](double f1) { return kTop + plot_h * (1.0 - f1 / 100.0); };

  std::set<CellKey> keys;
  for (const auto& p : points) {
    for (const auto& [key, c] : p.report.cells) keys.insert(key);
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"14\">Macro-F1 by history window</text>\n";
  for (int tick = 0; tick <= 100; tick += 20) {
    const auto y = fixed(y_at(tick), 1);
    svg << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\"" << y
        << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << y
        << "\" text-anchor=\"end\" dominant-baseline=\"middle\">" << tick << "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    svg << "<text x=\"" << fixed(x_at(i), 1) << "\" y=\"" << kTop + plot_h + 20
        << "\" text-anchor=\"middle\">" << window_label(points[i].window) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">history window</text>\n";
  svg << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft << "\" y1=\"" << kTop
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\""
      << kTop + plot_h << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";

  std::size_t series = 0;
  for (const auto& key : keys) {
    const char* color = kPalette[series % std::size(kPalette)];
    std::string path;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = points[i].report.cells.find(key);
      if (it == points[i].report.cells.end()) continue;
      path += (path.empty() ? "" : " ") + fixed(x_at(i), 1) + "," +
              fixed(y_at(it->second.f1.mean), 1);
    }
    const std::string name = std::string(platform_name(key.first)) + " " +
                             std::string(element_kind_name(key.second));
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
        << path << "\"><title>" << xml_escape(name) << "</title></polyline>\n";
    const double ly = kTop + 16.0 * static_cast<double>(series);
    svg << "<line x1=\"" << kWidth - kRight + 20 << "\" x2=\"" << kWidth - kRight + 40
        << "\" y1=\"" << ly << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 46 << "\" y=\"" << ly
        << "\" dominant-baseline=\"middle\">" << xml_escape(name) << "</text>\n";
    ++series;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string predictions_jsonl(const std::vector<TrialResult>& trials) {
  std::string out;
  for (const auto& t : trials) {
    for (const auto& p : t.predictions) {
      nlohmann::json j;
      j["trial"] = t.trial_index;
      j["question_id"] = p.question_id;
      j["gold_letter"] = std::string(1, p.gold_letter);
      j["predicted"] = p.letter ? nlohmann::json(std::string(1, *p.letter))
                                : nlohmann::json(nullptr);
      if (!p.error.empty()) j["error"] = p.error;
      j["response"] = p.raw_text;
      out += j.dump() + "\n";
    }
  }
  return out;
}

}  // namespace behavesim
