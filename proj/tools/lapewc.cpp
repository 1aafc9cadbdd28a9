// Command-line harness: run experiments, self-verify, export reports.
#include "lapewc/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("lapewc");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* level = std::getenv("LAPEWC_LOG_LEVEL");
    spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Sequential-task consolidation experiments (EWC and recursive Laplace penalties)"};
    app.require_subcommand(1);

    lapewc::RunOptions run_opts;
    std::string out_dir;
    std::uint64_t seed_override = 0;
    auto* run = app.add_subcommand("run", "Run every strategy listed in a config file");
    run->add_option("config", run_opts.config_path, "Experiment config")->required();
    auto* out_opt = run->add_option("--out-dir", out_dir, "Directory for reports (overrides config output)");
    auto* seed_opt = run->add_option("--seed-override", seed_override, "Offset added to every seed in the config");

    lapewc::VerifyOptions verify_opts;
    auto* verify = app.add_subcommand("verify", "Run the built-in property suite");
    verify->add_flag("--fault-flip-denominator", verify_opts.flip_denominator,
                     "Test hook: compute debiased centers with F_T instead of lambda_T * F_T");

    std::string report_path;
    std::string format = "csv";
    std::string export_dir;
    auto* exp = app.add_subcommand("export", "Export a run report as CSV matrices or structured JSON");
    exp->add_option("report", report_path, "Report file written by `run`")->required();
    exp->add_option("--format", format, "csv or structured")->check(CLI::IsMember({"csv", "structured"}));
    auto* export_out = exp->add_option("--out-dir", export_dir, "Output directory (default: next to the report)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lapewc::kExitInvalidInput;
    }

    if (*run) {
        if (*out_opt) run_opts.out_dir = out_dir;
        if (*seed_opt) run_opts.seed_override = seed_override;
        return lapewc::cmd_run(run_opts, std::cout, std::cerr);
    }
    if (*verify) return lapewc::cmd_verify(verify_opts, std::cout);
    const auto fmt = format == "csv" ? lapewc::ExportFormat::csv : lapewc::ExportFormat::structured;
    return lapewc::cmd_export(report_path, fmt, *export_out ? std::optional<std::string>(export_dir) : std::nullopt,
                              std::cout, std::cerr);
}
