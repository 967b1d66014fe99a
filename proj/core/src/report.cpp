// Copyright 2026 The ProCC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "procc/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "procc/feature_file.hpp"

namespace procc {

namespace {

constexpr double kSvgSize = 400.0;
constexpr double kSvgMargin = 40.0;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReportError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw ReportError("write failed for " + path.string());
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

void write_summary_md(std::ostream& out, const MetricsSummary& m, std::span<const TrainReport> reports,
                      const std::string& title) {
  out << "# " << title << "\n\n";
  out << "| metric | value |\n|---|---|\n";
  out << "| best seen (S) | " << fixed(m.best_seen) << " |\n";
  out << "| best unseen (U) | " << fixed(m.best_unseen) << " |\n";
  out << "| best HM | " << fixed(m.best_hm) << " |\n";
  out << "| AUC | " << fixed(m.auc) << " |\n";
  out << "| state accuracy | " << fixed(m.state_acc) << " |\n";
  out << "| object accuracy | " << fixed(m.object_acc) << " |\n\n";
  out << "Records: " << m.seen_records << " seen, " << m.unseen_records << " unseen. Sweep points: "
      << m.sweep.points.size() << ".\n";
  if (reports.empty()) return;
  out << "\n| stage | epochs | best epoch | best val | stop | seconds |\n|---|---|---|---|---|---|\n";
  for (const TrainReport& r : reports) {
    out << "| " << r.stage << " | " << r.epochs.size() << " | " << r.best_epoch << " | "
        << fixed(r.best_val_metric) << " | " << to_string(r.stop) << " | " << fixed(r.wall_seconds, 3)
        << " |\n";
  }
}

}  // namespace

std::string confusion_file_name(const ConditionalConfusion& c) {
  return "confusion_" + std::string(direction_tag(c.direction)) + "_" + (c.use_cpc ? "cpc" : "nocpc") +
         ".csv";
}

void write_metrics_csv(std::ostream& out, const MetricsSummary& m) {
  out << "metric,value\n";
  out << "best_seen," << format_real(m.best_seen) << '\n';
  out << "best_unseen," << format_real(m.best_unseen) << '\n';
  out << "best_hm," << format_real(m.best_hm) << '\n';
  out << "auc," << format_real(m.auc) << '\n';
  out << "state_acc," << format_real(m.state_acc) << '\n';
  out << "object_acc," << format_real(m.object_acc) << '\n';
}

void write_sweep_csv(std::ostream& out, const BiasSweepResult& sweep) {
  out << "bias,seen,unseen,hm\n";
  for (const SweepPoint& p : sweep.points) {
    out << format_real(p.bias) << ',' << format_real(p.seen) << ',' << format_real(p.unseen) << ','
        << format_real(harmonic_mean(p.seen, p.unseen)) << '\n';
  }
}

BiasSweepResult parse_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "bias,seen,unseen,hm") {
    throw ReportError("sweep.csv: missing header");
  }
  BiasSweepResult out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != 4) throw ReportError("sweep.csv: expected 4 columns in '" + line + "'");
    out.points.push_back({parse_real(cells[0]), parse_real(cells[1]), parse_real(cells[2])});
  }
  return out;
}

void write_confusion_csv(std::ostream& out, const ConditionalConfusion& c) {
  const bool by_object = c.direction == CpmDirection::kObjectToState;
  out << (by_object ? "object" : "state") << ",empty";
  for (std::size_t j = 0; j < c.matrix.cols(); ++j) out << ',' << (by_object ? "s" : "o") << j;
  out << '\n';
  for (std::size_t i = 0; i < c.matrix.rows(); ++i) {
    out << i << ',' << (c.empty_rows[i] ? 1 : 0);
    for (double v : c.matrix.row(i)) out << ',' << format_real(v);
    out << '\n';
  }
}

void write_sweep_svg(std::ostream& out, const BiasSweepResult& sweep) {
  std::vector<SweepPoint> pts = sweep.points;
  std::stable_sort(pts.begin(), pts.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return a.unseen < b.unseen || (a.unseen == b.unseen && a.seen > b.seen);
  });
  const double span = kSvgSize - 2.0 * kSvgMargin;
  auto x = [&](double u) { return fixed(kSvgMargin + u * span, 2); };
  auto y = [&](double s) { return fixed(kSvgSize - kSvgMargin - s * span, 2); };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"400\" height=\"400\" fill=\"white\"/>\n";
  out << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(1) << "\" y2=\"" << y(0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\"" << x(0) << "\" y2=\"" << y(1)
      << "\" stroke=\"black\"/>\n";
  for (double t : {0.0, 0.5, 1.0}) {
    out << "<text x=\"" << x(t) << "\" y=\"" << fixed(kSvgSize - kSvgMargin + 16, 2)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fixed(t, 1) << "</text>\n";
    out << "<text x=\"" << fixed(kSvgMargin - 6, 2) << "\" y=\"" << y(t)
        << "\" font-size=\"11\" text-anchor=\"end\">" << fixed(t, 1) << "</text>\n";
  }
  out << "<text x=\"200\" y=\"392\" font-size=\"12\" text-anchor=\"middle\">unseen accuracy</text>\n";
  out << "<text x=\"12\" y=\"200\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 12 200)\">"
         "seen accuracy</text>\n";
  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) out << (i ? " " : "") << x(pts[i].unseen) << ',' << y(pts[i].seen);
  out << "\"/>\n</svg>\n";
}

void write_stage_report(std::ostream& out, const TrainReport& report) {
  out << "epoch,train_loss,val_metric,seconds\n";
  for (const EpochRecord& e : report.epochs) {
    out << e.epoch << ',' << format_real(e.train_loss) << ',' << format_real(e.val_metric) << ','
        << format_real(e.seconds) << '\n';
  }
}

void write_stage_report(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out = open_out(path);
  write_stage_report(out, report);
  finish(out, path);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  finish(out, path);
}

void export_report(const std::filesystem::path& dir, const MetricsSummary& summary,
                   std::span<const ConditionalConfusion> confusions, std::span<const TrainReport> reports,
                   const std::string& title) {
  if (summary.sweep.points.empty()) throw ReportError("export_report: empty sweep");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());

  auto emit = [&](const std::string& name, const auto& writer) {
    const std::filesystem::path path = dir / name;
    std::ofstream out = open_out(path);
    writer(out);
    finish(out, path);
  };
  emit("metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, summary); });
  emit("sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, summary.sweep); });
  for (const ConditionalConfusion& c : confusions)
    emit(confusion_file_name(c), [&](std::ostream& o) { write_confusion_csv(o, c); });
  emit("sweep.svg", [&](std::ostream& o) { write_sweep_svg(o, summary.sweep); });
  emit("summary.md", [&](std::ostream& o) { write_summary_md(o, summary, reports, title); });
}

}  // namespace procc
