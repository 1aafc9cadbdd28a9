#include "lapewc/oracle.hpp"

#include "lapewc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace lapewc {

bool is_diagonal_design(const Matrix& inputs) {
    for (Eigen::Index n = 0; n < inputs.rows(); ++n) {
        if ((inputs.row(n).array() != 0.0).count() != 1) return false;
    }
    return true;
}

GaussianPosterior exact_sequential_posterior(const std::vector<TaskDataset>& tasks, double lambda_prior,
                                             double noise_variance, std::size_t dim) {
    if (!(lambda_prior >= 0.0)) throw ArgumentError("exact_sequential_posterior: lambda_prior must be >= 0");
    if (!(noise_variance > 0.0)) throw ArgumentError("exact_sequential_posterior: noise variance must be > 0");
    const auto p = static_cast<Eigen::Index>(dim);
    Vector precision = Vector::Constant(p, lambda_prior);
    Vector shift = Vector::Zero(p);  // precision * mean
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& task = tasks[t];
        task.validate();
        require_same_size(static_cast<std::size_t>(task.inputs.cols()), dim, "oracle task input width");
        const Matrix& y = task.regression_targets();
        if (y.cols() != 1) throw ArgumentError("exact_sequential_posterior: single-output regression only");
        if (!is_diagonal_design(task.inputs)) {
            throw ArgumentError("exact_sequential_posterior: task " + std::to_string(t) +
                                " does not have a diagonal design");
        }
        precision += task.inputs.colwise().squaredNorm().transpose() / noise_variance;
        shift += task.inputs.transpose() * y.col(0) / noise_variance;
    }
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(precision[i] > 0.0)) {
            throw ArgumentError("exact_sequential_posterior: coordinate " + std::to_string(i) +
                                " has zero precision (no prior, no data)");
        }
    }
    Vector mean = shift.cwiseQuotient(precision);
    return GaussianPosterior{ParamVector(std::move(mean)), DiagPrecision(std::move(precision)), std::nullopt};
}

Vector central_difference_gradient(const ScalarField& f, const ParamVector& at, double step) {
    const Vector& x = at.values();
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector plus = x;
        Vector minus = x;
        plus[i] += step;
        minus[i] -= step;
        g[i] = (f(ParamVector(plus)) - f(ParamVector(minus))) / (2.0 * step);
    }
    return g;
}

Matrix central_difference_hessian(const ScalarField& f, const ParamVector& at, double step) {
    const Vector& x = at.values();
    const Eigen::Index n = x.size();
    const double f0 = f(at);
    Matrix h(n, n);
    auto eval = [&](Eigen::Index i, double di, Eigen::Index j, double dj) {
        Vector y = x;
        y[i] += di;
        y[j] += dj;
        return f(ParamVector(y));
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        h(i, i) = (eval(i, step, i, 0.0) - 2.0 * f0 + eval(i, -step, i, 0.0)) / (step * step);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (eval(i, step, j, step) - eval(i, step, j, -step) - eval(i, -step, j, step) +
                              eval(i, -step, j, -step)) /
                             (4.0 * step * step);
            h(i, j) = v;
            h(j, i) = v;
        }
    }
    return h;
}

double min_eigenvalue(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

GaussianPosterior dense_laplace(const ParamVector& params_opt, const ScalarField& objective,
                                const DenseLaplaceOptions& options) {
    if (!(options.step > 0.0)) throw ArgumentError("dense_laplace: step must be > 0");
    const Vector g = central_difference_gradient(objective, params_opt, options.step);
    if (!g.allFinite()) throw NumericError("dense_laplace: non-finite gradient");
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm > options.grad_tol) {
        throw ArgumentError("dense_laplace: not at optimum (gradient inf-norm " + std::to_string(gnorm) + ")");
    }
    Matrix h = central_difference_hessian(objective, params_opt, options.step);
    if (!h.allFinite()) throw NumericError("dense_laplace: non-finite Hessian entry");
    h = 0.5 * (h + h.transpose());
    // The diagonal summary clips round-off negatives; the dense matrix keeps them.
    Vector diag = h.diagonal().cwiseMax(0.0);
    return GaussianPosterior{params_opt, DiagPrecision(std::move(diag)), std::move(h)};
}

}  // namespace lapewc
