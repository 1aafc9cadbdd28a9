#pragma once

#include "lapewc/types.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace lapewc {

using TaskId = std::string;

/// 0.5 * sum_i q_i (theta_i - c_i)^2 for one task (or for the consolidated state).
/// `lambda` records the scale the precision was built with (q = lambda * F).
struct QuadraticPenalty {
    ParamVector center;
    DiagPrecision precision;
    TaskId label;
    double lambda = 1.0;

    QuadraticPenalty(ParamVector c, DiagPrecision q, TaskId id, double lam = 1.0);
};

[[nodiscard]] double penalty_value(const QuadraticPenalty& p, const ParamVector& theta);
[[nodiscard]] ParamVector penalty_grad(const QuadraticPenalty& p, const ParamVector& theta);

/// Local quadratic model of task loss around the task's optimum, up to an additive
/// constant. Only trustworthy near that optimum; for quadratic tasks with a
/// debiased center it reproduces loss differences exactly.
[[nodiscard]] double per_task_loss_proxy(const QuadraticPenalty& p, const ParamVector& theta);

struct TaskLogEntry {
    TaskId id;
    double lambda = 0.0;
    friend bool operator==(const TaskLogEntry&, const TaskLogEntry&) = default;
};

/// Single-penalty summary of every task seen so far: anchor at the latest
/// optimum, precision = lambda_prior + sum_t lambda_t F_t. Storage does not
/// depend on the number of tasks (task_log is bookkeeping only).
struct ConsolidatedPosterior {
    ParamVector anchor;
    DiagPrecision precision;
    double lambda_prior = 0.0;
    std::vector<TaskLogEntry> task_log;

    [[nodiscard]] QuadraticPenalty as_penalty() const;
    [[nodiscard]] double value(const ParamVector& theta) const;
    [[nodiscard]] ParamVector grad(const ParamVector& theta) const;
};

/// One penalty per task plus a zero-centred prior penalty with precision prior_precision.
struct PenaltyBank {
    std::size_t dim = 0;
    double prior_precision = 0.0;
    std::vector<QuadraticPenalty> penalties;

    [[nodiscard]] double value(const ParamVector& theta) const;
    [[nodiscard]] ParamVector grad(const ParamVector& theta) const;
    [[nodiscard]] bool contains(const TaskId& id) const;
    [[nodiscard]] const QuadraticPenalty& find(const TaskId& id) const;
    /// lambda_prior + sum of penalty precisions.
    [[nodiscard]] DiagPrecision total_precision() const;
};

struct Hyperparams {
    std::map<TaskId, double> lambda_per_task;
    double lambda_prior = 0.0;

    /// Configured lambda for `id`, or the task's sample count when not overridden.
    [[nodiscard]] double lambda_for(const TaskId& id, std::size_t sample_count) const;
    void validate() const;
};

[[nodiscard]] ConsolidatedPosterior init_posterior(const Hyperparams& hyper, std::size_t dim);

[[nodiscard]] ConsolidatedPosterior consolidate_single(const ConsolidatedPosterior& prev, const TaskId& id,
                                                       const ParamVector& optimum, const DiagPrecision& fisher,
                                                       double lambda);

/// A finished task as the multi-penalty baselines see it.
struct TaskOptimum {
    TaskId id;
    ParamVector optimum;
    DiagPrecision fisher;
    double lambda = 0.0;
};

/// Original EWC: one penalty per past task centred at its own optimum.
[[nodiscard]] PenaltyBank ewc_multi_penalty(const std::vector<TaskOptimum>& history, double lambda_prior);

enum class CenterDenominator {
    scaled_fisher,  // lambda_T * F_T, the form consistent with the bank/single gradient identity
    raw_fisher,     // F_T alone; fault-injection hook for the verify suite
};

struct DebiasOptions {
    double floor = 1e-12;
    CenterDenominator denominator = CenterDenominator::scaled_fisher;
};

struct DebiasedPenalty {
    QuadraticPenalty penalty;
    /// Coordinates where lambda_T F_T fell below the floor. Their center is the
    /// optimum and their precision is zero.
    std::vector<std::size_t> degenerate;
};

/// Center for task T's own penalty such that the bank (prev_bank + this penalty
/// + prior) has the same gradient everywhere as the single consolidated penalty
/// after adding T. `prev` and `prev_bank` must describe the same tasks in the same order.
[[nodiscard]] DebiasedPenalty debiased_center(const PenaltyBank& prev_bank, const ConsolidatedPosterior& prev,
                                              const TaskId& id, const ParamVector& optimum,
                                              const DiagPrecision& fisher, double lambda,
                                              const DebiasOptions& options = {});

struct TaskRecord {
    TaskId id;
    DiagPrecision fisher;
    double lambda = 0.0;
    ParamVector center;
};

/// Split a consolidated state into per-task penalties with the given centers.
[[nodiscard]] PenaltyBank decompose(const ConsolidatedPosterior& consolidated, const std::vector<TaskRecord>& per_task,
                                    double floor = 1e-12);

[[nodiscard]] PenaltyBank drop_penalty(const PenaltyBank& bank, const TaskId& id);
[[nodiscard]] PenaltyBank add_penalty(const PenaltyBank& bank, QuadraticPenalty penalty);

/// Consolidated view of a bank's curvature (anchor supplied by the caller).
[[nodiscard]] ConsolidatedPosterior collapse(const PenaltyBank& bank, const ParamVector& anchor);

}  // namespace lapewc
