#include "lapewc/trainer.hpp"

#include "lapewc/errors.hpp"
#include "lapewc/oracle.hpp"
#include "lapewc/rng.hpp"
#include "lapewc/serialize.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace lapewc {

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("momentum must be in [0,1)");
    if (max_steps < 1) throw ArgumentError("max_steps must be >= 1");
    if (!(grad_tol > 0.0)) throw ArgumentError("grad_tol must be > 0");
}

std::string to_string(OptimizerMethod m) {
    return m == OptimizerMethod::gradient_descent ? "gradient_descent" : "gradient_descent_momentum";
}

OptimizerMethod optimizer_method_from_string(const std::string& s) {
    if (s == "gradient_descent") return OptimizerMethod::gradient_descent;
    if (s == "gradient_descent_momentum") return OptimizerMethod::gradient_descent_momentum;
    throw ArgumentError("unknown optimizer method '" + s + "'");
}

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::naive: return "naive";
        case Strategy::ewc_multi: return "ewc_multi";
        case Strategy::laplace_single: return "laplace_single";
        case Strategy::laplace_multi_debiased: return "laplace_multi_debiased";
        case Strategy::joint: return "joint";
    }
    return "naive";
}

Strategy strategy_from_string(const std::string& s) {
    for (auto v : {Strategy::naive, Strategy::ewc_multi, Strategy::laplace_single, Strategy::laplace_multi_debiased,
                   Strategy::joint}) {
        if (to_string(v) == s) return v;
    }
    throw ArgumentError("unknown strategy '" + s + "'");
}

double penalty_value(const PenaltySet& penalties, const ParamVector& theta) {
    return std::visit(
        [&](const auto& p) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, std::monostate>) {
                return 0.0;
            } else {
                return p.value(theta);
            }
        },
        penalties);
}

Vector penalty_gradient(const PenaltySet& penalties, const ParamVector& theta) {
    return std::visit(
        [&](const auto& p) -> Vector {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, std::monostate>) {
                return Vector::Zero(theta.values().size());
            } else {
                return p.grad(theta).values();
            }
        },
        penalties);
}

namespace {

TaskDataset subset(const TaskDataset& data, const std::vector<std::size_t>& rows) {
    TaskDataset out;
    out.inputs.resize(static_cast<Eigen::Index>(rows.size()), data.inputs.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.inputs.row(static_cast<Eigen::Index>(k)) = data.inputs.row(static_cast<Eigen::Index>(rows[k]));
    }
    if (data.is_classification()) {
        std::vector<int> labels;
        labels.reserve(rows.size());
        for (auto r : rows) labels.push_back(data.class_targets()[r]);
        out.targets = std::move(labels);
    } else {
        const auto& y = data.regression_targets();
        Matrix sub(static_cast<Eigen::Index>(rows.size()), y.cols());
        for (std::size_t k = 0; k < rows.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = y.row(static_cast<Eigen::Index>(rows[k]));
        out.targets = std::move(sub);
    }
    return out;
}

}  // namespace

TrainResult train_task(const Network& net, const TaskDataset& data, const ParamVector& init,
                       const PenaltySet& penalties, const OptimizerConfig& opt, const StepObserver& observer) {
    opt.validate();
    net.check_params(init);
    net.check_data(data);

    const std::size_t n = data.sample_count();
    const bool minibatch = opt.batch_size > 0 && opt.batch_size < n;
    Rng shuffler(opt.seed);
    std::vector<std::size_t> order;
    std::size_t cursor = n;

    Vector theta = init.values();
    Vector velocity = Vector::Zero(theta.size());
    Vector best = theta;
    double best_objective = std::numeric_limits<double>::infinity();
    const double momentum = opt.method == OptimizerMethod::gradient_descent_momentum ? opt.momentum : 0.0;

    for (std::size_t step = 0;; ++step) {
        const ParamVector point(theta);
        double objective = 0.0;
        Vector grad;
        try {
            objective = net.neg_log_likelihood(point, data) + penalty_value(penalties, point);
            grad = net.grad_nll(point, data).values() + penalty_gradient(penalties, point);
        } catch (const NumericError& e) {
            throw TrainingError("training diverged at step " + std::to_string(step) + ": " + e.what(), step);
        }
        if (!std::isfinite(objective) || !grad.allFinite()) {
            throw TrainingError("training diverged at step " + std::to_string(step) + ": non-finite objective", step);
        }
        const double gnorm = grad.lpNorm<Eigen::Infinity>();
        if (gnorm < opt.grad_tol) return TrainResult{point, true, step, objective, gnorm};
        if (objective < best_objective) {
            best_objective = objective;
            best = theta;
        }
        if (step == opt.max_steps) break;
        if (observer) observer(step, objective);

        if (minibatch) {
            std::vector<std::size_t> rows;
            rows.reserve(opt.batch_size);
            while (rows.size() < opt.batch_size) {
                if (cursor == n) {
                    order = shuffler.permutation(n);
                    cursor = 0;
                }
                rows.push_back(order[cursor++]);
            }
            const double scale = static_cast<double>(n) / static_cast<double>(rows.size());
            grad = scale * net.grad_nll(point, subset(data, rows)).values() + penalty_gradient(penalties, point);
        }
        velocity = momentum * velocity - opt.learning_rate * grad;
        theta += velocity;
        if (!theta.allFinite()) {
            throw TrainingError("training diverged at step " + std::to_string(step) + ": non-finite parameters", step);
        }
    }

    const ParamVector result(best);
    const double objective = net.neg_log_likelihood(result, data) + penalty_value(penalties, result);
    const Vector grad = net.grad_nll(result, data).values() + penalty_gradient(penalties, result);
    return TrainResult{result, false, opt.max_steps, objective, grad.lpNorm<Eigen::Infinity>()};
}

Learner::Learner(Network net, Strategy strategy, Hyperparams hyper, OptimizerConfig opt, ParamVector init,
                 LearnerOptions options)
    : net_(std::move(net)),
      strategy_(strategy),
      hyper_(std::move(hyper)),
      opt_(opt),
      options_(options),
      params_(std::move(init)) {
    hyper_.validate();
    opt_.validate();
    net_.check_params(params_);
    consolidated_ = init_posterior(hyper_, net_.param_count());
    bank_ = PenaltyBank{net_.param_count(), hyper_.lambda_prior, {}};
}

std::uint64_t Learner::fisher_seed_for(std::size_t stage) const { return options_.fisher_seed + stage; }

PenaltySet Learner::active_penalty() const {
    switch (strategy_) {
        case Strategy::ewc_multi:
        case Strategy::laplace_multi_debiased: return bank_;
        default: return consolidated_;
    }
}

StageOutcome Learner::learn(const TaskId& id, const TaskDataset& data, const std::optional<OptimizerConfig>& opt) {
    for (const auto& seen : order_) {
        if (seen == id) throw ArgumentError("task '" + id + "' was already learned; use revisit");
    }
    net_.check_data(data);
    const double lambda = hyper_.lambda_for(id, data.sample_count());
    const std::size_t stage = order_.size();

    const PenaltySet penalty = active_penalty();
    TrainResult result;
    if (strategy_ == Strategy::joint) {
        joint_data_ = joint_data_ ? joint_data_->concatenated(data) : data;
        result = train_task(net_, *joint_data_, params_, penalty, opt.value_or(opt_));
    } else {
        result = train_task(net_, data, params_, penalty, opt.value_or(opt_));
    }
    params_ = result.params;
    DiagPrecision fisher = empirical_fisher_diag(net_, params_, data, options_.fisher_mode, fisher_seed_for(stage));

    StageOutcome outcome{id, result, fisher, lambda, {}};
    switch (strategy_) {
        case Strategy::laplace_single:
            consolidated_ = consolidate_single(consolidated_, id, params_, fisher, lambda);
            break;
        case Strategy::laplace_multi_debiased: {
            auto deb = debiased_center(bank_, consolidated_, id, params_, fisher, lambda, options_.debias);
            outcome.degenerate = deb.degenerate;
            bank_ = add_penalty(bank_, std::move(deb.penalty));
            consolidated_ = consolidate_single(consolidated_, id, params_, fisher, lambda);
            datasets_.emplace(id, data);
            break;
        }
        default: break;
    }
    history_.push_back(TaskOptimum{id, params_, fisher, lambda});
    if (strategy_ == Strategy::ewc_multi) bank_ = ewc_multi_penalty(history_, hyper_.lambda_prior);
    order_.push_back(id);
    return outcome;
}

StageOutcome Learner::revisit(const TaskId& id, const std::optional<OptimizerConfig>& opt) {
    if (strategy_ != Strategy::laplace_multi_debiased) {
        throw UnsupportedOperation("revisit requires per-task debiased penalties; strategy '" + to_string(strategy_) +
                                   "' does not keep them");
    }
    if (!bank_.contains(id)) throw ArgumentError("revisit: unknown task '" + id + "'");
    const double lambda = bank_.find(id).lambda;
    const TaskDataset& data = datasets_.at(id);
    std::size_t stage = 0;
    while (order_[stage] != id) ++stage;

    const PenaltyBank remaining = drop_penalty(bank_, id);
    TrainResult result = train_task(net_, data, params_, remaining, opt.value_or(opt_));
    const ParamVector& theta = result.params;
    DiagPrecision fisher = empirical_fisher_diag(net_, theta, data, options_.fisher_mode, fisher_seed_for(stage));

    const ConsolidatedPosterior without = collapse(remaining, theta);
    auto deb = debiased_center(remaining, without, id, theta, fisher, lambda, options_.debias);
    StageOutcome outcome{id, result, fisher, lambda, deb.degenerate};
    bank_ = add_penalty(remaining, std::move(deb.penalty));
    consolidated_ = consolidate_single(without, id, theta, fisher, lambda);
    params_ = theta;
    for (auto& h : history_) {
        if (h.id == id) h = TaskOptimum{id, theta, fisher, lambda};
    }
    return outcome;
}

QuadraticPenalty Learner::proxy_penalty(const TaskId& id) const {
    if (strategy_ == Strategy::laplace_multi_debiased) return bank_.find(id);
    for (const auto& h : history_) {
        if (h.id == id) return QuadraticPenalty(h.optimum, h.fisher.scaled(h.lambda), id, h.lambda);
    }
    throw ArgumentError("no proxy for unknown task '" + id + "'");
}

std::size_t Learner::state_bytes() const {
    switch (strategy_) {
        case Strategy::laplace_single: return normalized_state(consolidated_).size();
        case Strategy::ewc_multi: return normalized_state(bank_).size();
        case Strategy::laplace_multi_debiased:
            return normalized_state(bank_).size() + normalized_state(consolidated_).size();
        default: return 0;
    }
}

bool oracle_applicable(const std::vector<TaskSpec>& specs, const Architecture& arch) {
    if (arch.layer_sizes.size() != 2 || arch.output_dim() != 1 || arch.bias) return false;
    if (arch.head.kind != HeadKind::gaussian_regression) return false;
    for (const auto& s : specs) {
        if (s.kind != TaskKind::diag_linear_gaussian || s.input_dim != arch.input_dim()) return false;
    }
    return !specs.empty();
}

RunReport run_sequence(const std::vector<TaskSpec>& specs, Strategy strategy, const RunSettings& settings) {
    if (specs.empty()) throw ArgumentError("run_sequence: no tasks");
    Network net(settings.architecture);
    Learner learner(net, strategy, settings.hyper, settings.optimizer, net.init_params(settings.init_seed),
                    settings.learner);
    const auto datasets = generate_sequence(specs);
    const bool with_oracle = oracle_applicable(specs, settings.architecture);

    const auto n_tasks = static_cast<Eigen::Index>(specs.size());
    RunReport report;
    report.strategy = strategy;
    report.loss = Matrix::Constant(n_tasks, n_tasks, std::numeric_limits<double>::quiet_NaN());
    report.proxy = report.loss;
    for (const auto& s : specs) report.tasks.push_back(s.id);

    std::optional<std::size_t> single_state_size;
    for (Eigen::Index s = 0; s < n_tasks; ++s) {
        const auto& spec = specs[static_cast<std::size_t>(s)];
        const auto started = std::chrono::steady_clock::now();
        const StageOutcome outcome = learner.learn(spec.id, datasets[static_cast<std::size_t>(s)]);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        const ParamVector& theta = learner.params();
        for (Eigen::Index t = 0; t <= s; ++t) {
            const auto& tid = specs[static_cast<std::size_t>(t)].id;
            report.loss(t, s) = net.neg_log_likelihood(theta, datasets[static_cast<std::size_t>(t)]);
            report.proxy(t, s) = per_task_loss_proxy(learner.proxy_penalty(tid), theta);
        }

        StageRecord rec;
        rec.task = spec.id;
        rec.params = theta;
        rec.converged = outcome.train.converged;
        rec.steps = outcome.train.steps;
        rec.objective = outcome.train.objective;
        rec.lambda = outcome.lambda;
        rec.state_bytes = learner.state_bytes();
        rec.penalty_count = strategy == Strategy::laplace_single ? 1 : learner.bank().penalties.size();
        rec.wall_seconds = wall;
        if (strategy == Strategy::laplace_single) {
            if (single_state_size && *single_state_size != rec.state_bytes) {
                throw StateError("single-penalty state grew from " + std::to_string(*single_state_size) + " to " +
                                 std::to_string(rec.state_bytes) + " bytes");
            }
            single_state_size = rec.state_bytes;
        }
        if (with_oracle) {
            const std::vector<TaskDataset> seen(datasets.begin(), datasets.begin() + s + 1);
            const auto exact = exact_sequential_posterior(seen, settings.hyper.lambda_prior,
                                                          settings.architecture.head.noise_variance, net.param_count());
            rec.oracle_distance = (theta.values() - exact.mean.values()).lpNorm<Eigen::Infinity>();
        }
        report.stages.push_back(std::move(rec));
    }
    return report;
}

}  // namespace lapewc
