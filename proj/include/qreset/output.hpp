// Copyright 2026 The qreset Authors
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

#ifndef QRESET_OUTPUT_HPP
#define QRESET_OUTPUT_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qreset/config.hpp"

namespace qreset {

struct ResultRow {
  double t = 0.0;  // time in us, or the scan coordinate for sweep-style tables
  int qubit = 0;
  std::string observable;
  double value = 0.0;
  std::optional<double> stderr_;
  std::string solver;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::string x_label = "t_us";

  void append_series(const TimeSeries& s, const std::string& solver,
                     const std::string& label_suffix = "") {
    for (const auto& r : s.rows) {
      ResultRow row;
      row.t = r.t_us;
      row.qubit = r.qubit;
      row.observable = r.label + label_suffix;
      row.value = r.value;
      if (r.has_stderr) row.stderr_ = r.stderr_;
      row.solver = solver;
      rows.push_back(std::move(row));
    }
  }

  void append_with_suffix(const ResultTable& other, const std::string& suffix) {
    for (ResultRow row : other.rows) {
      row.observable += suffix;
      rows.push_back(std::move(row));
    }
  }
};

namespace detail {

inline std::string fmt_g12(double v) {
  if (!std::isfinite(v)) throw NumericalError("output: non-finite value in table");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline std::string to_csv(const ResultTable& table) {
  std::string out = "t_us,qubit,observable,value,stderr,solver\n";
  for (const auto& r : table.rows) {
    out += detail::fmt_g12(r.t);
    out += ',';
    out += std::to_string(r.qubit);
    out += ',';
    out += r.observable;
    out += ',';
    out += detail::fmt_g12(r.value);
    out += ',';
    if (r.stderr_) out += detail::fmt_g12(*r.stderr_);
    out += ',';
    out += r.solver;
    out += '\n';
  }
  return out;
}

/// Static SVG line plot: one polyline per (qubit, observable) pair, axes
/// with tick labels, series legend. No interactivity.
inline std::string to_svg(const ResultTable& table, const std::string& y_label = "value") {
  const int width = 880, height = 560;
  const int ml = 70, mr = 220, mt = 30, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;

  std::map<std::pair<std::string, int>, std::vector<std::pair<double, double>>> groups;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& r : table.rows) {
    groups[{r.observable, r.qubit}].push_back({r.t, r.value});
    if (first) {
      xmin = xmax = r.t;
      ymin = ymax = r.value;
      first = false;
    } else {
      xmin = std::min(xmin, r.t);
      xmax = std::max(xmax, r.t);
      ymin = std::min(ymin, r.value);
      ymax = std::max(ymax, r.value);
    }
  }
  if (xmax - xmin < 1e-300) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-300) {
    ymax += 0.5;
    ymin -= 0.5;
  } else {
    const double pad = 0.05 * (ymax - ymin);
    ymax += pad;
    ymin -= pad;
  }

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
       "\" height=\"" + std::to_string(height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    s += "<line x1=\"" + detail::fmt_g12(px(xv)) + "\" y1=\"" + std::to_string(mt) +
         "\" x2=\"" + detail::fmt_g12(px(xv)) + "\" y2=\"" + std::to_string(mt + (int)ph) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + detail::fmt_g12(px(xv)) + "\" y=\"" + std::to_string(height - mb + 20) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + detail::fmt_g12(xv) + "</text>\n";
    s += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + detail::fmt_g12(py(yv)) +
         "\" x2=\"" + std::to_string(ml + (int)pw) + "\" y2=\"" + detail::fmt_g12(py(yv)) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + std::to_string(ml - 8) + "\" y=\"" + detail::fmt_g12(py(yv) + 4) +
         "\" font-size=\"12\" text-anchor=\"end\">" + detail::fmt_g12(yv) + "</text>\n";
  }
  s += "<rect x=\"" + std::to_string(ml) + "\" y=\"" + std::to_string(mt) + "\" width=\"" +
       std::to_string((int)pw) + "\" height=\"" + std::to_string((int)ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + std::to_string(ml + (int)pw / 2) + "\" y=\"" +
       std::to_string(height - 12) + "\" font-size=\"14\" text-anchor=\"middle\">" +
       table.x_label + "</text>\n";
  s += "<text x=\"18\" y=\"" + std::to_string(mt + (int)ph / 2) +
       "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       std::to_string(mt + (int)ph / 2) + ")\">" + y_label + "</text>\n";

  int idx = 0;
  for (const auto& [key, pts] : groups) {
    const char* color = palette[idx % 8];
    std::string poly = "<polyline fill=\"none\" stroke=\"";
    poly += color;
    poly += "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) {
      poly += detail::fmt_g12(px(x));
      poly += ',';
      poly += detail::fmt_g12(py(y));
      poly += ' ';
    }
    poly += "\"/>\n";
    s += poly;
    const std::string name =
        key.first + (key.second > 0 ? " q" + std::to_string(key.second) : "");
    const int ly = mt + 16 + 18 * idx;
    s += "<line x1=\"" + std::to_string(width - mr + 14) + "\" y1=\"" + std::to_string(ly - 4) +
         "\" x2=\"" + std::to_string(width - mr + 40) + "\" y2=\"" + std::to_string(ly - 4) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + std::to_string(width - mr + 46) + "\" y=\"" + std::to_string(ly) +
         "\" font-size=\"12\">" + name + "</text>\n";
    ++idx;
  }
  s += "</svg>\n";
  return s;
}

/// CSV always; optional SVG plot data. Returns the written paths.
inline std::vector<std::string> emit_outputs(const ResultTable& table,
                                             const OutputOptions& opts) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  std::error_code ec;
  fs::create_directories(opts.dir, ec);
  if (ec) throw IoError("cannot create output directory '" + opts.dir + "': " + ec.message());

  auto write_file = [&](const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw IoError("write failed for '" + path + "'");
    written.push_back(path);
  };

  if (opts.csv) write_file((fs::path(opts.dir) / (opts.basename + ".csv")).string(), to_csv(table));
  if (opts.svg) write_file((fs::path(opts.dir) / (opts.basename + ".svg")).string(), to_svg(table));
  return written;
}

}  // namespace qreset

#endif  // QRESET_OUTPUT_HPP
