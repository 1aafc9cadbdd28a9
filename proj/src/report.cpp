#include "lapewc/report.hpp"

#include "lapewc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace lapewc {

namespace {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        Json row = Json::array();
        for (Eigen::Index s = 0; s < m.cols(); ++s) {
            if (std::isnan(m(t, s))) {
                row.push_back(nullptr);
            } else {
                row.push_back(m(t, s));
            }
        }
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    const auto n = static_cast<Eigen::Index>(j.size());
    Matrix m = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto& row = j.at(static_cast<std::size_t>(t));
        if (static_cast<Eigen::Index>(row.size()) != n) throw ArgumentError("report matrix is not square");
        for (Eigen::Index s = 0; s < n; ++s) {
            const auto& v = row.at(static_cast<std::size_t>(s));
            if (!v.is_null()) m(t, s) = v.get<double>();
        }
    }
    return m;
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

Json report_to_json(const RunReport& report, const Json& config_echo) {
    Json stages = Json::array();
    for (const auto& st : report.stages) {
        stages.push_back({{"task", st.task},
                          {"converged", st.converged},
                          {"steps", st.steps},
                          {"objective", st.objective},
                          {"lambda", st.lambda},
                          {"state_bytes", st.state_bytes},
                          {"penalty_count", st.penalty_count},
                          {"oracle_distance", st.oracle_distance ? Json(*st.oracle_distance) : Json(nullptr)},
                          {"params", to_json(st.params)}});
    }
    return {{"schema_version", kSchemaVersion},
            {"kind", "run_report"},
            {"strategy", to_string(report.strategy)},
            {"tasks", report.tasks},
            {"loss", matrix_to_json(report.loss)},
            {"proxy", matrix_to_json(report.proxy)},
            {"stages", stages},
            {"config", config_echo}};
}

RunReport report_from_json(const Json& j) {
    if (!j.is_object() || j.value("kind", "") != "run_report" || j.value("schema_version", 0) != kSchemaVersion) {
        throw ArgumentError("not a run report (kind/schema_version mismatch)");
    }
    RunReport r;
    r.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    r.tasks = j.at("tasks").get<std::vector<TaskId>>();
    r.loss = matrix_from_json(j.at("loss"));
    r.proxy = matrix_from_json(j.at("proxy"));
    for (const auto& st : j.at("stages")) {
        StageRecord rec;
        rec.task = st.at("task").get<std::string>();
        rec.converged = st.at("converged").get<bool>();
        rec.steps = st.at("steps").get<std::size_t>();
        rec.objective = st.at("objective").get<double>();
        rec.lambda = st.at("lambda").get<double>();
        rec.state_bytes = st.at("state_bytes").get<std::size_t>();
        rec.penalty_count = st.at("penalty_count").get<std::size_t>();
        if (!st.at("oracle_distance").is_null()) rec.oracle_distance = st.at("oracle_distance").get<double>();
        rec.params = param_vector_from_json(st.at("params"));
        r.stages.push_back(std::move(rec));
    }
    return r;
}

Json timing_to_json(const RunReport& report) {
    Json stages = Json::array();
    for (const auto& st : report.stages) stages.push_back({{"task", st.task}, {"wall_seconds", st.wall_seconds}});
    return {{"strategy", to_string(report.strategy)}, {"stages", stages}};
}

Json summary_to_json(const std::vector<RunReport>& reports) {
    Json rows = Json::array();
    for (const auto& r : reports) {
        const Eigen::Index last = r.loss.cols() - 1;
        Json final_losses = Json::array();
        for (Eigen::Index t = 0; t < r.loss.rows(); ++t) final_losses.push_back(r.loss(t, last));
        const auto& final_stage = r.stages.back();
        const double to_first =
            (final_stage.params.values() - r.stages.front().params.values()).lpNorm<2>();
        bool converged = true;
        for (const auto& st : r.stages) converged = converged && st.converged;
        rows.push_back({{"strategy", to_string(r.strategy)},
                        {"final_losses", final_losses},
                        {"average_final_loss", r.loss.col(last).mean()},
                        {"oracle_distance", final_stage.oracle_distance ? Json(*final_stage.oracle_distance) : Json(nullptr)},
                        {"distance_to_first_optimum", to_first},
                        {"all_converged", converged},
                        {"final_state_bytes", final_stage.state_bytes}});
    }
    return {{"schema_version", kSchemaVersion}, {"kind", "summary"}, {"strategies", rows}};
}

std::string matrix_to_csv(const Matrix& m, const std::vector<TaskId>& tasks) {
    require_same_size(tasks.size(), static_cast<std::size_t>(m.rows()), "csv task labels");
    std::string out = "task";
    for (const auto& id : tasks) out += ",after_" + id;
    out += '\n';
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        out += tasks[static_cast<std::size_t>(t)];
        for (Eigen::Index s = 0; s < m.cols(); ++s) {
            out += ',';
            if (!std::isnan(m(t, s))) out += format_number(m(t, s));
        }
        out += '\n';
    }
    return out;
}

Matrix matrix_from_csv(const std::string& csv, std::vector<TaskId>* tasks) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("csv: missing header");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix m = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    if (tasks) tasks->clear();
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto& cells = rows[static_cast<std::size_t>(t)];
        if (static_cast<Eigen::Index>(cells.size()) != n + 1) throw ArgumentError("csv: ragged row " + std::to_string(t));
        if (tasks) tasks->push_back(cells[0]);
        for (Eigen::Index s = 0; s < n; ++s) {
            const auto& c = cells[static_cast<std::size_t>(s + 1)];
            if (!c.empty()) m(t, s) = std::stod(c);
        }
    }
    return m;
}

}  // namespace lapewc
