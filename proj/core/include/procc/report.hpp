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

#ifndef PROCC_REPORT_HPP_
#define PROCC_REPORT_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

#include "procc/diagnostics.hpp"
#include "procc/metrics.hpp"
#include "procc/trainer.hpp"

namespace procc {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes metrics.csv, sweep.csv, one confusion_<dir>_<cpc>.csv per confusion,
/// sweep.svg and summary.md into `dir` (created if missing).
void export_report(const std::filesystem::path& dir, const MetricsSummary& summary,
                   std::span<const ConditionalConfusion> confusions,
                   std::span<const TrainReport> reports = {}, const std::string& title = "ProCC evaluation");

std::string confusion_file_name(const ConditionalConfusion& confusion);

void write_metrics_csv(std::ostream& out, const MetricsSummary& summary);
void write_sweep_csv(std::ostream& out, const BiasSweepResult& sweep);
BiasSweepResult parse_sweep_csv(std::istream& in);
void write_confusion_csv(std::ostream& out, const ConditionalConfusion& confusion);
void write_sweep_svg(std::ostream& out, const BiasSweepResult& sweep);

/// epoch,train_loss,val_metric,seconds
void write_stage_report(std::ostream& out, const TrainReport& report);
void write_stage_report(const std::filesystem::path& path, const TrainReport& report);

/// Writes `text` to `path`, throwing ReportError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace procc

#endif  // PROCC_REPORT_HPP_
