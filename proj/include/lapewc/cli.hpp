#pragma once

#include "lapewc/verify.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace lapewc {

/// Process exit codes shared by all subcommands.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,       // verify failures, I/O and other runtime errors
    kExitInvalidInput = 2,  // bad config, missing report
    kExitDiverged = 3,
};

struct RunOptions {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed_override;
};

/// Runs every configured strategy and writes <out>/<strategy>.report.json,
/// <out>/<strategy>.timing.json and <out>/summary.json.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

int cmd_verify(const VerifyOptions& options, std::ostream& out);

enum class ExportFormat { csv, structured };

/// csv: <stem>.loss.csv and <stem>.proxy.csv. structured: <stem>.export.json.
/// The stem is the report file name without ".report.json" (or ".json").
int cmd_export(const std::string& report_path, ExportFormat format, const std::optional<std::string>& out_dir,
               std::ostream& out, std::ostream& err);

}  // namespace lapewc
