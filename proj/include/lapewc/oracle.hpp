#pragma once

#include "lapewc/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace lapewc {

struct GaussianPosterior {
    ParamVector mean;
    DiagPrecision precision_diag;
    std::optional<Matrix> dense_precision;
};

/// Closed-form conjugate posterior of a bias-free linear model with Gaussian
/// noise and a zero-mean prior with precision lambda_prior * I, updated task by
/// task. Every input row must have exactly one nonzero entry (diagonal design),
/// which keeps the exact posterior precision diagonal.
[[nodiscard]] GaussianPosterior exact_sequential_posterior(const std::vector<TaskDataset>& tasks, double lambda_prior,
                                                           double noise_variance, std::size_t dim);

/// True when every row of `inputs` has exactly one nonzero entry.
[[nodiscard]] bool is_diagonal_design(const Matrix& inputs);

using ScalarField = std::function<double(const ParamVector&)>;

struct DenseLaplaceOptions {
    double step = 1e-4;
    /// Max allowed |central-difference gradient| at params_opt.
    double grad_tol = 1e-5;
};

/// Laplace approximation with a full central-difference Hessian of `objective`
/// at `params_opt`, symmetrized. Throws ArgumentError when the finite-difference
/// gradient says params_opt is not a stationary point.
[[nodiscard]] GaussianPosterior dense_laplace(const ParamVector& params_opt, const ScalarField& objective,
                                              const DenseLaplaceOptions& options = {});

[[nodiscard]] Vector central_difference_gradient(const ScalarField& f, const ParamVector& at, double step);
[[nodiscard]] Matrix central_difference_hessian(const ScalarField& f, const ParamVector& at, double step);
[[nodiscard]] double min_eigenvalue(const Matrix& symmetric);

}  // namespace lapewc
