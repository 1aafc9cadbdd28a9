#pragma once

#include "lapewc/serialize.hpp"
#include "lapewc/trainer.hpp"

#include <string>
#include <vector>

namespace lapewc {

/// Structured run report. Wall-clock timings are deliberately absent so that
/// identical configs produce byte-identical files; see timing_to_json.
[[nodiscard]] Json report_to_json(const RunReport& report, const Json& config_echo);
[[nodiscard]] RunReport report_from_json(const Json& j);
[[nodiscard]] Json timing_to_json(const RunReport& report);

/// Cross-strategy comparison: final loss row, average final loss, oracle
/// distance and distance to the first task's optimum per strategy.
[[nodiscard]] Json summary_to_json(const std::vector<RunReport>& reports);

/// Matrix as CSV: header "task,after_<id>...", one row per task, empty cells where
/// the stage precedes the task. Values use %.17g, lines end in LF.
[[nodiscard]] std::string matrix_to_csv(const Matrix& m, const std::vector<TaskId>& tasks);
/// Inverse of matrix_to_csv; empty cells come back as NaN.
[[nodiscard]] Matrix matrix_from_csv(const std::string& csv, std::vector<TaskId>* tasks = nullptr);

}  // namespace lapewc
