#include "lapewc/config.hpp"

#include "lapewc/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lapewc {

namespace {

// Walks one JSON object, remembering which keys were consumed so leftovers can be rejected.
class Section {
  public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[nodiscard]] std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const Json& required(const std::string& key) {
        if (!has(key)) throw ConfigError(at(key), "required field is missing");
        return j_.at(key);
    }

    double number(const std::string& key, double fallback, bool required_field = false) {
        if (!has(key)) {
            if (required_field) throw ConfigError(at(key), "required field is missing");
            return fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
        return x;
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback, bool required_field = false) {
        if (!has(key)) {
            if (required_field) throw ConfigError(at(key), "required field is missing");
            return fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw ConfigError(at(key), "expected a nonnegative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string text(const std::string& key, const std::string& fallback, bool required_field = false) {
        if (!has(key)) {
            if (required_field) throw ConfigError(at(key), "required field is missing");
            return fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }

    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v.get<bool>();
    }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(at(key), "unknown key");
        }
    }

  private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename F>
auto enum_field(const std::string& field, const std::string& value, F convert) {
    try {
        return convert(value);
    } catch (const ArgumentError& e) {
        throw ConfigError(field, e.what());
    }
}

Architecture parse_architecture(const Json& j) {
    Section s(j, "architecture");
    Architecture arch;
    const auto& sizes = s.required("layer_sizes");
    if (!sizes.is_array() || sizes.size() < 2) {
        throw ConfigError(s.at("layer_sizes"), "expected an array of at least two positive integers");
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const auto& v = sizes[i];
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 1) {
            throw ConfigError(s.at("layer_sizes") + "[" + std::to_string(i) + "]", "expected a positive integer");
        }
        arch.layer_sizes.push_back(v.get<std::size_t>());
    }
    arch.activation = enum_field(s.at("activation"), s.text("activation", "tanh"), activation_from_string);
    arch.bias = s.flag("bias", true);
    if (s.has("head")) {
        Section h(j.at("head"), s.at("head"));
        arch.head.kind = enum_field(h.at("kind"), h.text("kind", "", true), head_from_string);
        arch.head.noise_variance = h.number("noise_variance", 1.0);
        if (!(arch.head.noise_variance > 0.0)) throw ConfigError(h.at("noise_variance"), "must be > 0");
        h.finish();
    }
    if (arch.head.kind == HeadKind::categorical && arch.output_dim() < 2) {
        throw ConfigError(s.at("layer_sizes"), "categorical head needs an output layer of at least 2 classes");
    }
    s.finish();
    return arch;
}

TaskSpec parse_task(const Json& j, const std::string& path) {
    Section s(j, path);
    TaskSpec t;
    t.id = s.text("id", "", true);
    if (t.id.empty()) throw ConfigError(s.at("id"), "must be nonempty");
    t.kind = enum_field(s.at("kind"), s.text("kind", "", true), task_kind_from_string);
    t.n_samples = s.count("n_samples", 64);
    if (t.n_samples < 1) throw ConfigError(s.at("n_samples"), "must be >= 1");
    t.input_dim = s.count("input_dim", 16);
    if (t.input_dim < 1) throw ConfigError(s.at("input_dim"), "must be >= 1");
    t.seed = s.count("seed", 0, true);
    t.overlap = s.number("overlap", 0.0);
    if (!(t.overlap >= 0.0 && t.overlap <= 1.0)) throw ConfigError(s.at("overlap"), "must be in [0,1]");
    t.noise_variance = s.number("noise_variance", 1.0);
    if (!(t.noise_variance > 0.0)) throw ConfigError(s.at("noise_variance"), "must be > 0");
    t.base_seed = s.count("base_seed", 0);
    s.finish();
    return t;
}

OptimizerConfig parse_optimizer(const Json& j) {
    Section s(j, "optimizer");
    OptimizerConfig o;
    o.method = enum_field(s.at("method"), s.text("method", "gradient_descent"), optimizer_method_from_string);
    o.learning_rate = s.number("learning_rate", o.learning_rate);
    if (!(o.learning_rate > 0.0)) throw ConfigError(s.at("learning_rate"), "must be > 0");
    o.momentum = s.number("momentum", o.momentum);
    if (!(o.momentum >= 0.0 && o.momentum < 1.0)) throw ConfigError(s.at("momentum"), "must be in [0,1)");
    o.max_steps = s.count("max_steps", o.max_steps);
    if (o.max_steps < 1) throw ConfigError(s.at("max_steps"), "must be >= 1");
    o.grad_tol = s.number("grad_tol", o.grad_tol);
    if (!(o.grad_tol > 0.0)) throw ConfigError(s.at("grad_tol"), "must be > 0");
    o.seed = s.count("seed", 0);
    o.batch_size = s.count("batch_size", 0);
    s.finish();
    return o;
}

Hyperparams parse_hyper(const Json& j) {
    Section s(j, "hyperparams");
    Hyperparams h;
    h.lambda_prior = s.number("lambda_prior", 0.0);
    if (!(h.lambda_prior >= 0.0)) throw ConfigError(s.at("lambda_prior"), "must be >= 0");
    if (s.has("lambda_per_task")) {
        const auto& m = j.at("lambda_per_task");
        if (!m.is_object()) throw ConfigError(s.at("lambda_per_task"), "expected an object of task id -> lambda");
        for (const auto& [id, v] : m.items()) {
            const std::string field = s.at("lambda_per_task") + "." + id;
            if (!v.is_number()) throw ConfigError(field, "expected a number");
            const double lam = v.get<double>();
            if (!(lam > 0.0) || !std::isfinite(lam)) throw ConfigError(field, "must be > 0");
            h.lambda_per_task[id] = lam;
        }
    }
    s.finish();
    return h;
}

std::string locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(locate(text, e.byte == 0 ? 0 : e.byte - 1), std::string("malformed config: ") + e.what());
    }
    Section root(doc, "");
    ExperimentConfig cfg;
    const auto version = root.count("format_version", 0, true);
    if (version != kConfigFormatVersion) {
        throw ConfigError("format_version", "unsupported version " + std::to_string(version) + " (expected " +
                                                std::to_string(kConfigFormatVersion) + ")");
    }
    cfg.settings.architecture = parse_architecture(root.required("architecture"));
    cfg.settings.init_seed = root.count("init_seed", 0);

    const auto& tasks = root.required("tasks");
    if (!tasks.is_array() || tasks.empty()) throw ConfigError("tasks", "expected a nonempty array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string path = "tasks[" + std::to_string(i) + "]";
        TaskSpec t = parse_task(tasks[i], path);
        if (!ids.insert(t.id).second) throw ConfigError(path + ".id", "duplicate task id '" + t.id + "'");
        if (t.input_dim != cfg.settings.architecture.input_dim()) {
            throw ConfigError(path + ".input_dim", "does not match architecture input layer " +
                                                       std::to_string(cfg.settings.architecture.input_dim()));
        }
        const bool classification = t.kind == TaskKind::permuted_features_classification;
        const auto& head = cfg.settings.architecture.head;
        if (classification && (head.kind != HeadKind::categorical || cfg.settings.architecture.output_dim() != 2)) {
            throw ConfigError(path + ".kind", "classification tasks need a categorical head with 2 outputs");
        }
        if (!classification && (head.kind != HeadKind::gaussian_regression || cfg.settings.architecture.output_dim() != 1)) {
            throw ConfigError(path + ".kind", "regression tasks need a gaussian_regression head with 1 output");
        }
        cfg.tasks.push_back(std::move(t));
    }

    const auto& strategies = root.required("strategies");
    if (!strategies.is_array() || strategies.empty()) throw ConfigError("strategies", "expected a nonempty array");
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const std::string path = "strategies[" + std::to_string(i) + "]";
        if (!strategies[i].is_string()) throw ConfigError(path, "expected a strategy name");
        cfg.strategies.push_back(enum_field(path, strategies[i].get<std::string>(), strategy_from_string));
    }

    if (root.has("hyperparams")) cfg.settings.hyper = parse_hyper(doc.at("hyperparams"));
    for (const auto& [id, _] : cfg.settings.hyper.lambda_per_task) {
        if (!ids.count(id)) throw ConfigError("hyperparams.lambda_per_task." + id, "no task with this id");
    }
    if (root.has("optimizer")) cfg.settings.optimizer = parse_optimizer(doc.at("optimizer"));
    if (root.has("fisher")) {
        Section f(doc.at("fisher"), "fisher");
        cfg.settings.learner.fisher_mode = enum_field(f.at("mode"), f.text("mode", "observed"), fisher_mode_from_string);
        cfg.settings.learner.fisher_seed = f.count("seed", 0);
        f.finish();
    }
    if (root.has("consolidation")) {
        Section c(doc.at("consolidation"), "consolidation");
        cfg.settings.learner.debias.floor = c.number("degenerate_floor", 1e-12);
        if (!(cfg.settings.learner.debias.floor >= 0.0)) throw ConfigError(c.at("degenerate_floor"), "must be >= 0");
        c.finish();
    }
    cfg.output = root.text("output", cfg.output);
    if (cfg.output.empty()) throw ConfigError("output", "must be nonempty");
    root.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot read config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

Json config_to_json(const ExperimentConfig& c) {
    const auto& s = c.settings;
    Json tasks = Json::array();
    for (const auto& t : c.tasks) {
        tasks.push_back({{"id", t.id},
                         {"kind", to_string(t.kind)},
                         {"n_samples", t.n_samples},
                         {"input_dim", t.input_dim},
                         {"seed", t.seed},
                         {"overlap", t.overlap},
                         {"noise_variance", t.noise_variance},
                         {"base_seed", t.base_seed}});
    }
    Json strategies = Json::array();
    for (auto st : c.strategies) strategies.push_back(to_string(st));
    Json lambdas = Json::object();
    for (const auto& [id, lam] : s.hyper.lambda_per_task) lambdas[id] = lam;
    Json arch = to_json(s.architecture);
    if (!arch["head"].contains("noise_variance")) arch["head"]["noise_variance"] = s.architecture.head.noise_variance;
    return {{"format_version", c.format_version},
            {"architecture", arch},
            {"init_seed", s.init_seed},
            {"tasks", tasks},
            {"strategies", strategies},
            {"hyperparams", {{"lambda_prior", s.hyper.lambda_prior}, {"lambda_per_task", lambdas}}},
            {"optimizer",
             {{"method", to_string(s.optimizer.method)},
              {"learning_rate", s.optimizer.learning_rate},
              {"momentum", s.optimizer.momentum},
              {"max_steps", s.optimizer.max_steps},
              {"grad_tol", s.optimizer.grad_tol},
              {"seed", s.optimizer.seed},
              {"batch_size", s.optimizer.batch_size}}},
            {"fisher", {{"mode", to_string(s.learner.fisher_mode)}, {"seed", s.learner.fisher_seed}}},
            {"consolidation", {{"degenerate_floor", s.learner.debias.floor}}},
            {"output", c.output}};
}

void apply_seed_override(ExperimentConfig& config, std::uint64_t offset) {
    for (auto& t : config.tasks) {
        t.seed += offset;
        t.base_seed += offset;
    }
    config.settings.init_seed += offset;
    config.settings.optimizer.seed += offset;
    config.settings.learner.fisher_seed += offset;
}

}  // namespace lapewc
