#include "lapewc/consolidate.hpp"

#include "lapewc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lapewc {

QuadraticPenalty::QuadraticPenalty(ParamVector c, DiagPrecision q, TaskId id, double lam)
    : center(std::move(c)), precision(std::move(q)), label(std::move(id)), lambda(lam) {
    require_same_size(center.size(), precision.size(), "penalty center vs precision");
}

double penalty_value(const QuadraticPenalty& p, const ParamVector& theta) {
    require_same_size(theta.size(), p.center.size(), "penalty_value");
    const Vector d = theta.values() - p.center.values();
    return 0.5 * (p.precision.values().array() * d.array().square()).sum();
}

ParamVector penalty_grad(const QuadraticPenalty& p, const ParamVector& theta) {
    require_same_size(theta.size(), p.center.size(), "penalty_grad");
    return ParamVector(p.precision.values().cwiseProduct(theta.values() - p.center.values()));
}

double per_task_loss_proxy(const QuadraticPenalty& p, const ParamVector& theta) { return penalty_value(p, theta); }

QuadraticPenalty ConsolidatedPosterior::as_penalty() const {
    return QuadraticPenalty(anchor, precision, "consolidated");
}

double ConsolidatedPosterior::value(const ParamVector& theta) const { return penalty_value(as_penalty(), theta); }

ParamVector ConsolidatedPosterior::grad(const ParamVector& theta) const { return penalty_grad(as_penalty(), theta); }

double PenaltyBank::value(const ParamVector& theta) const {
    require_same_size(theta.size(), dim, "PenaltyBank::value");
    double total = 0.5 * prior_precision * theta.values().squaredNorm();
    for (const auto& p : penalties) total += penalty_value(p, theta);
    return total;
}

ParamVector PenaltyBank::grad(const ParamVector& theta) const {
    require_same_size(theta.size(), dim, "PenaltyBank::grad");
    Vector g = prior_precision * theta.values();
    for (const auto& p : penalties) g += p.precision.values().cwiseProduct(theta.values() - p.center.values());
    return ParamVector(std::move(g));
}

bool PenaltyBank::contains(const TaskId& id) const {
    return std::any_of(penalties.begin(), penalties.end(), [&](const auto& p) { return p.label == id; });
}

const QuadraticPenalty& PenaltyBank::find(const TaskId& id) const {
    for (const auto& p : penalties) {
        if (p.label == id) return p;
    }
    throw ArgumentError("no penalty for task '" + id + "'");
}

DiagPrecision PenaltyBank::total_precision() const {
    Vector q = Vector::Constant(static_cast<Eigen::Index>(dim), prior_precision);
    for (const auto& p : penalties) q += p.precision.values();
    return DiagPrecision(std::move(q));
}

double Hyperparams::lambda_for(const TaskId& id, std::size_t sample_count) const {
    auto it = lambda_per_task.find(id);
    return it != lambda_per_task.end() ? it->second : static_cast<double>(sample_count);
}

void Hyperparams::validate() const {
    if (!(lambda_prior >= 0.0) || !std::isfinite(lambda_prior)) throw ArgumentError("lambda_prior must be >= 0");
    for (const auto& [id, lam] : lambda_per_task) {
        if (!(lam > 0.0) || !std::isfinite(lam)) throw ArgumentError("lambda for task '" + id + "' must be > 0");
    }
}

ConsolidatedPosterior init_posterior(const Hyperparams& hyper, std::size_t dim) {
    hyper.validate();
    if (dim < 1) throw ArgumentError("init_posterior: parameter count must be >= 1");
    return ConsolidatedPosterior{ParamVector::zeros(dim), DiagPrecision::constant(dim, hyper.lambda_prior),
                                 hyper.lambda_prior, {}};
}

ConsolidatedPosterior consolidate_single(const ConsolidatedPosterior& prev, const TaskId& id,
                                         const ParamVector& optimum, const DiagPrecision& fisher, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("consolidate_single: lambda must be > 0");
    require_same_size(optimum.size(), prev.anchor.size(), "consolidate_single optimum");
    require_same_size(fisher.size(), prev.anchor.size(), "consolidate_single fisher");
    ConsolidatedPosterior next{optimum, prev.precision.plus(fisher.scaled(lambda)), prev.lambda_prior, prev.task_log};
    next.task_log.push_back({id, lambda});
    return next;
}

PenaltyBank ewc_multi_penalty(const std::vector<TaskOptimum>& history, double lambda_prior) {
    if (history.empty()) throw ArgumentError("ewc_multi_penalty: empty history");
    if (!(lambda_prior >= 0.0)) throw ArgumentError("ewc_multi_penalty: lambda_prior must be >= 0");
    PenaltyBank bank{history.front().optimum.size(), lambda_prior, {}};
    for (const auto& t : history) {
        require_same_size(t.optimum.size(), bank.dim, "ewc_multi_penalty optimum");
        if (!(t.lambda > 0.0)) throw ArgumentError("ewc_multi_penalty: lambda for task '" + t.id + "' must be > 0");
        bank.penalties.emplace_back(t.optimum, t.fisher.scaled(t.lambda), t.id, t.lambda);
    }
    return bank;
}

namespace {

void require_matching_state(const PenaltyBank& bank, const ConsolidatedPosterior& state) {
    if (bank.penalties.size() != state.task_log.size()) {
        throw StateError("penalty bank has " + std::to_string(bank.penalties.size()) + " tasks, consolidated state has " +
                         std::to_string(state.task_log.size()));
    }
    for (std::size_t k = 0; k < bank.penalties.size(); ++k) {
        if (bank.penalties[k].label != state.task_log[k].id) {
            throw StateError("task order mismatch at position " + std::to_string(k) + ": bank '" +
                             bank.penalties[k].label + "' vs consolidated '" + state.task_log[k].id + "'");
        }
    }
    if (bank.prior_precision != state.lambda_prior) throw StateError("prior precision differs between bank and state");
    require_same_size(bank.dim, state.anchor.size(), "bank vs consolidated dimension");
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

DebiasedPenalty debiased_center(const PenaltyBank& prev_bank, const ConsolidatedPosterior& prev, const TaskId& id,
                                const ParamVector& optimum, const DiagPrecision& fisher, double lambda,
                                const DebiasOptions& options) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("debiased_center: lambda must be > 0");
    require_matching_state(prev_bank, prev);
    require_same_size(optimum.size(), prev_bank.dim, "debiased_center optimum");
    require_same_size(fisher.size(), prev_bank.dim, "debiased_center fisher");

    const Vector& f = fisher.values();
    const Vector scaled = lambda * f;
    const Vector total = prev.precision.values() + scaled;

    // Bank-side sum of q_t * center_t over earlier tasks.
    Vector weighted = Vector::Zero(static_cast<Eigen::Index>(prev_bank.dim));
    for (const auto& p : prev_bank.penalties) weighted += p.precision.values().cwiseProduct(p.center.values());

    Vector center(static_cast<Eigen::Index>(prev_bank.dim));
    Vector q = scaled;
    std::vector<std::size_t> degenerate;
    for (Eigen::Index i = 0; i < center.size(); ++i) {
        if (scaled[i] < options.floor) {
            center[i] = optimum.values()[i];
            q[i] = 0.0;
            degenerate.push_back(static_cast<std::size_t>(i));
            continue;
        }
        const double denom = options.denominator == CenterDenominator::scaled_fisher ? scaled[i] : f[i];
        center[i] = (total[i] * optimum.values()[i] - weighted[i]) / denom;
    }
    return DebiasedPenalty{QuadraticPenalty(ParamVector(std::move(center)), DiagPrecision(std::move(q)), id, lambda),
                           std::move(degenerate)};
}

PenaltyBank decompose(const ConsolidatedPosterior& consolidated, const std::vector<TaskRecord>& per_task,
                      double floor) {
    if (per_task.size() != consolidated.task_log.size()) {
        throw StateError("decompose: " + std::to_string(per_task.size()) + " task records for " +
                         std::to_string(consolidated.task_log.size()) + " consolidated tasks");
    }
    const std::size_t dim = consolidated.anchor.size();
    PenaltyBank bank{dim, consolidated.lambda_prior, {}};
    for (std::size_t k = 0; k < per_task.size(); ++k) {
        const auto& rec = per_task[k];
        if (rec.id != consolidated.task_log[k].id) {
            throw StateError("decompose: task record '" + rec.id + "' does not match consolidated task '" +
                             consolidated.task_log[k].id + "'");
        }
        require_same_size(rec.fisher.size(), dim, "decompose fisher");
        require_same_size(rec.center.size(), dim, "decompose center");
        Vector q = rec.lambda * rec.fisher.values();
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            if (q[i] < floor) q[i] = 0.0;
        }
        bank.penalties.emplace_back(rec.center, DiagPrecision(std::move(q)), rec.id, rec.lambda);
    }
    const Vector summed = bank.total_precision().values();
    // Coordinates zeroed by the floor may differ by less than floor per task.
    const double tol = 1e-10 + floor * static_cast<double>(per_task.size());
    for (Eigen::Index i = 0; i < summed.size(); ++i) {
        if (!close(summed[i], consolidated.precision.values()[i], tol)) {
            throw StateError("decompose: per-task precisions do not sum to the consolidated precision at coordinate " +
                             std::to_string(i));
        }
    }
    return bank;
}

PenaltyBank drop_penalty(const PenaltyBank& bank, const TaskId& id) {
    if (!bank.contains(id)) throw ArgumentError("drop_penalty: unknown task '" + id + "'");
    PenaltyBank out{bank.dim, bank.prior_precision, {}};
    for (const auto& p : bank.penalties) {
        if (p.label != id) out.penalties.push_back(p);
    }
    return out;
}

PenaltyBank add_penalty(const PenaltyBank& bank, QuadraticPenalty penalty) {
    require_same_size(penalty.center.size(), bank.dim, "add_penalty");
    if (bank.contains(penalty.label)) throw ArgumentError("add_penalty: task '" + penalty.label + "' already present");
    PenaltyBank out = bank;
    out.penalties.push_back(std::move(penalty));
    return out;
}

ConsolidatedPosterior collapse(const PenaltyBank& bank, const ParamVector& anchor) {
    require_same_size(anchor.size(), bank.dim, "collapse anchor");
    ConsolidatedPosterior out{anchor, bank.total_precision(), bank.prior_precision, {}};
    for (const auto& p : bank.penalties) out.task_log.push_back({p.label, p.lambda});
    return out;
}

}  // namespace lapewc
