#pragma once

#include "lapewc/consolidate.hpp"
#include "lapewc/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lapewc {

struct VerifyOptions {
    /// Fault injection: divide by F_T instead of lambda_T * F_T when computing debiased centers.
    bool flip_denominator = false;
};

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Gradient checks, decomposition identity, conjugate-oracle equality and
/// friends, each reported separately.
[[nodiscard]] std::vector<PropertyResult> run_verify_suite(const VerifyOptions& options = {});

/// A consolidated state and its debiased bank built from random task optima.
/// Coordinates with zero Fisher get the optimum an exact minimizer would
/// reach there (the minimizer of the earlier penalties), so the random
/// state is one the trainer could actually produce.
struct RandomConsolidation {
    ConsolidatedPosterior consolidated;
    PenaltyBank bank;
};

[[nodiscard]] RandomConsolidation random_consolidation(std::uint64_t seed, std::size_t dim, std::size_t n_tasks,
                                                       double lambda_prior, const DebiasOptions& options = {});

/// Largest |grad single - grad bank| / max(1, |grad single|) over coordinates
/// and `n_points` random theta.
[[nodiscard]] double max_gradient_gap(const ConsolidatedPosterior& consolidated, const PenaltyBank& bank,
                                      std::uint64_t seed, std::size_t n_points);

/// Desk-scale setup for quadratic tasks: bias-free identity layer d -> 1,
/// Gaussian head with unit noise, expected-Fisher consolidation, full-batch GD.
[[nodiscard]] RunSettings quadratic_settings(std::size_t dim, double lambda_prior);

/// `n` diagonal linear-Gaussian task specs with ids A, B, C, ...
[[nodiscard]] std::vector<TaskSpec> quadratic_tasks(std::size_t n, std::size_t dim, std::size_t n_samples,
                                                    double overlap, std::uint64_t seed);

}  // namespace lapewc
