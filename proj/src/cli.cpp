#include "lapewc/cli.hpp"

#include "lapewc/config.hpp"
#include "lapewc/errors.hpp"
#include "lapewc/report.hpp"

#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace lapewc {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
}

std::string pretty(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    ExperimentConfig config;
    try {
        config = load_config(options.config_path);
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    if (options.seed_override) apply_seed_override(config, *options.seed_override);
    if (options.out_dir) config.output = *options.out_dir;
    const Json echo = config_to_json(config);

    try {
        const fs::path dir(config.output);
        fs::create_directories(dir);
        std::vector<RunReport> reports;
        for (auto strategy : config.strategies) {
            spdlog::info("running strategy {} on {} tasks", to_string(strategy), config.tasks.size());
            RunReport report = run_sequence(config.tasks, strategy, config.settings);
            for (const auto& st : report.stages) {
                if (!st.converged) {
                    spdlog::warn("{}: stage {} did not converge in {} steps", to_string(strategy), st.task, st.steps);
                }
            }
            write_file(dir / (to_string(strategy) + ".report.json"), pretty(report_to_json(report, echo)));
            write_file(dir / (to_string(strategy) + ".timing.json"), pretty(timing_to_json(report)));
            reports.push_back(std::move(report));
        }
        const Json summary = summary_to_json(reports);
        write_file(dir / "summary.json", pretty(summary));
        for (const auto& row : summary.at("strategies")) {
            out << row.at("strategy").get<std::string>() << ": average final loss "
                << row.at("average_final_loss").get<double>();
            if (!row.at("oracle_distance").is_null()) {
                out << ", oracle distance " << row.at("oracle_distance").get<double>();
            }
            out << "\n";
        }
        return kExitOk;
    } catch (const TrainingError& e) {
        err << "training diverged: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

int cmd_verify(const VerifyOptions& options, std::ostream& out) {
    const auto results = run_verify_suite(options);
    std::size_t failed = 0;
    for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << "  (" << r.detail << ")\n";
        failed += r.passed ? 0 : 1;
    }
    if (failed) {
        out << failed << " of " << results.size() << " properties failed:";
        for (const auto& r : results) {
            if (!r.passed) out << " " << r.name;
        }
        out << "\n";
        return kExitFailure;
    }
    out << "all " << results.size() << " properties passed\n";
    return kExitOk;
}

int cmd_export(const std::string& report_path, ExportFormat format, const std::optional<std::string>& out_dir,
               std::ostream& out, std::ostream& err) {
    const fs::path path(report_path);
    if (!fs::exists(path)) {
        err << "report not found: " << report_path << "\n";
        return kExitInvalidInput;
    }
    RunReport report;
    Json doc;
    try {
        std::ifstream in(path);
        doc = Json::parse(in);
        report = report_from_json(doc);
    } catch (const std::exception& e) {
        err << "unreadable report " << report_path << ": " << e.what() << "\n";
        return kExitInvalidInput;
    }

    std::string stem = path.filename().string();
    for (const std::string suffix : {".report.json", ".json"}) {
        if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
            stem.resize(stem.size() - suffix.size());
            break;
        }
    }
    const fs::path dir = out_dir ? fs::path(*out_dir) : path.parent_path();
    try {
        if (!dir.empty()) fs::create_directories(dir);
        if (format == ExportFormat::csv) {
            const auto loss = dir / (stem + ".loss.csv");
            const auto proxy = dir / (stem + ".proxy.csv");
            write_file(loss, matrix_to_csv(report.loss, report.tasks));
            write_file(proxy, matrix_to_csv(report.proxy, report.tasks));
            out << loss.string() << "\n" << proxy.string() << "\n";
        } else {
            const auto target = dir / (stem + ".export.json");
            write_file(target, pretty(report_to_json(report, doc.at("config"))));
            out << target.string() << "\n";
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace lapewc
