#pragma once

#include "lapewc/consolidate.hpp"
#include "lapewc/fisher.hpp"
#include "lapewc/net.hpp"
#include "lapewc/tasks.hpp"
#include "lapewc/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lapewc {

enum class OptimizerMethod { gradient_descent, gradient_descent_momentum };

struct OptimizerConfig {
    OptimizerMethod method = OptimizerMethod::gradient_descent;
    double learning_rate = 0.01;
    double momentum = 0.0;
    std::size_t max_steps = 10000;
    /// Stop once the penalized-objective gradient inf-norm drops below this.
    double grad_tol = 1e-8;
    std::uint64_t seed = 0;
    /// 0 means full batch. Otherwise shuffled minibatches of this size, with
    /// the gradient rescaled to the full-data sum.
    std::size_t batch_size = 0;

    void validate() const;
};

std::string to_string(OptimizerMethod m);
OptimizerMethod optimizer_method_from_string(const std::string& s);

/// What a task is trained against: nothing, the single consolidated penalty, or a bank.
using PenaltySet = std::variant<std::monostate, ConsolidatedPosterior, PenaltyBank>;

[[nodiscard]] double penalty_value(const PenaltySet& penalties, const ParamVector& theta);
[[nodiscard]] Vector penalty_gradient(const PenaltySet& penalties, const ParamVector& theta);

struct TrainResult {
    ParamVector params;
    bool converged = false;
    std::size_t steps = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
};

/// Called once per step with (step, objective before the update).
using StepObserver = std::function<void(std::size_t, double)>;

/// Minimize -log p(D|theta) + penalty from `init`. Returns the converged point,
/// or the best iterate seen with converged = false. Throws TrainingError if the
/// objective becomes non-finite.
[[nodiscard]] TrainResult train_task(const Network& net, const TaskDataset& data, const ParamVector& init,
                                     const PenaltySet& penalties, const OptimizerConfig& opt,
                                     const StepObserver& observer = {});

enum class Strategy { naive, ewc_multi, laplace_single, laplace_multi_debiased, joint };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct LearnerOptions {
    FisherMode fisher_mode = FisherMode::observed;
    std::uint64_t fisher_seed = 0;
    DebiasOptions debias;
};

struct StageOutcome {
    TaskId task;
    TrainResult train;
    DiagPrecision fisher;
    double lambda = 0.0;
    std::vector<std::size_t> degenerate;  // debiased strategy only
};

/// Sequential learner holding the consolidation state of one strategy.
///
/// naive trains every task against the prior alone. laplace_single keeps one
/// ConsolidatedPosterior. ewc_multi keeps one penalty per task at its own optimum.
/// laplace_multi_debiased keeps both a ConsolidatedPosterior and a bank of
/// debiased per-task penalties, and is the only strategy that can revisit.
/// joint retrains on the union of all data seen so far.
class Learner {
  public:
    Learner(Network net, Strategy strategy, Hyperparams hyper, OptimizerConfig opt, ParamVector init,
            LearnerOptions options = {});

    StageOutcome learn(const TaskId& id, const TaskDataset& data, const std::optional<OptimizerConfig>& opt = {});

    /// Drop the task's penalty, retrain on its data against the remaining
    /// penalties, then rebuild its Fisher and debiased center.
    StageOutcome revisit(const TaskId& id, const std::optional<OptimizerConfig>& opt = {});

    [[nodiscard]] const Network& network() const noexcept { return net_; }
    [[nodiscard]] Strategy strategy() const noexcept { return strategy_; }
    [[nodiscard]] const ParamVector& params() const noexcept { return params_; }
    [[nodiscard]] const ConsolidatedPosterior& consolidated() const noexcept { return consolidated_; }
    [[nodiscard]] const PenaltyBank& bank() const noexcept { return bank_; }
    [[nodiscard]] const std::vector<TaskId>& tasks() const noexcept { return order_; }

    /// The penalty the next task would be trained against.
    [[nodiscard]] PenaltySet active_penalty() const;
    /// Per-task quadratic loss proxy: the debiased penalty for
    /// laplace_multi_debiased, (theta*_t, lambda_t F_t) otherwise.
    [[nodiscard]] QuadraticPenalty proxy_penalty(const TaskId& id) const;
    /// Byte length of the normalized consolidation state (0 for naive and joint).
    [[nodiscard]] std::size_t state_bytes() const;

  private:
    std::uint64_t fisher_seed_for(std::size_t stage) const;

    Network net_;
    Strategy strategy_;
    Hyperparams hyper_;
    OptimizerConfig opt_;
    LearnerOptions options_;
    ParamVector params_;

    ConsolidatedPosterior consolidated_;
    PenaltyBank bank_;
    std::vector<TaskOptimum> history_;  // ewc_multi state; report-only proxies for the rest
    std::vector<TaskId> order_;
    std::map<TaskId, TaskDataset> datasets_;  // joint and laplace_multi_debiased
    std::optional<TaskDataset> joint_data_;
};

struct RunSettings {
    Architecture architecture;
    std::uint64_t init_seed = 0;
    Hyperparams hyper;
    OptimizerConfig optimizer;
    LearnerOptions learner;
};

struct StageRecord {
    TaskId task;
    ParamVector params;
    bool converged = false;
    std::size_t steps = 0;
    double objective = 0.0;
    double lambda = 0.0;
    std::size_t state_bytes = 0;
    std::size_t penalty_count = 0;
    std::optional<double> oracle_distance;  // inf-norm to the exact posterior mean, quadratic runs only
    double wall_seconds = 0.0;
};

/// loss(t, s) = -log p(D_t | theta after stage s); proxy(t, s) is the per-task
/// quadratic proxy at the same point. Entries with s < t are NaN.
struct RunReport {
    Strategy strategy = Strategy::naive;
    std::vector<TaskId> tasks;
    Matrix loss;
    Matrix proxy;
    std::vector<StageRecord> stages;
};

/// True when every spec is diag_linear_gaussian and the architecture is a
/// bias-free single identity layer with one Gaussian output, i.e. the exact
/// conjugate oracle applies.
[[nodiscard]] bool oracle_applicable(const std::vector<TaskSpec>& specs, const Architecture& arch);

[[nodiscard]] RunReport run_sequence(const std::vector<TaskSpec>& specs, Strategy strategy, const RunSettings& settings);

}  // namespace lapewc
