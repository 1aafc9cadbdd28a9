#include "lapewc/net.hpp"

#include "lapewc/errors.hpp"
#include "lapewc/rng.hpp"

#include <cmath>
#include <numbers>

namespace lapewc {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

std::size_t Architecture::param_count() const {
    std::size_t total = 0;
    for (std::size_t l = 1; l < layer_sizes.size(); ++l) {
        total += layer_sizes[l - 1] * layer_sizes[l] + (bias ? layer_sizes[l] : 0);
    }
    return total;
}

void Architecture::validate() const {
    if (layer_sizes.size() < 2) throw ArgumentError("architecture needs at least an input and an output layer");
    for (auto s : layer_sizes) {
        if (s < 1) throw ArgumentError("architecture layer sizes must be >= 1");
    }
    if (head.kind == HeadKind::gaussian_regression && !(head.noise_variance > 0.0 && std::isfinite(head.noise_variance))) {
        throw ArgumentError("gaussian head noise variance must be positive and finite");
    }
    if (head.kind == HeadKind::categorical && output_dim() < 2) {
        throw ArgumentError("categorical head needs at least 2 classes");
    }
}

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "identity"; }
std::string to_string(HeadKind h) { return h == HeadKind::categorical ? "categorical" : "gaussian_regression"; }

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "identity") return Activation::identity;
    throw ArgumentError("unknown activation '" + s + "'");
}

HeadKind head_from_string(const std::string& s) {
    if (s == "gaussian_regression") return HeadKind::gaussian_regression;
    if (s == "categorical") return HeadKind::categorical;
    throw ArgumentError("unknown head '" + s + "'");
}

double log_sum_exp(const Vector& z) {
    const double m = z.maxCoeff();
    return m + std::log((z.array() - m).exp().sum());
}

Vector softmax(const Vector& z) {
    const double m = z.maxCoeff();
    Vector e = (z.array() - m).exp();
    return e / e.sum();
}

Network::Network(Architecture arch) : arch_(std::move(arch)) {
    arch_.validate();
    std::size_t offset = 0;
    for (std::size_t l = 1; l < arch_.layer_sizes.size(); ++l) {
        offsets_.push_back(offset);
        offset += arch_.layer_sizes[l - 1] * arch_.layer_sizes[l] + (arch_.bias ? arch_.layer_sizes[l] : 0);
    }
    param_count_ = offset;
}

ParamVector Network::init_params(std::uint64_t seed) const {
    Rng rng(seed);
    Vector theta = Vector::Zero(static_cast<Eigen::Index>(param_count_));
    for (std::size_t l = 1; l < arch_.layer_sizes.size(); ++l) {
        const std::size_t fan_in = arch_.layer_sizes[l - 1];
        const std::size_t n_weights = fan_in * arch_.layer_sizes[l];
        const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t k = 0; k < n_weights; ++k) {
            theta[static_cast<Eigen::Index>(offsets_[l - 1] + k)] = rng.uniform(-r, r);
        }
    }
    return ParamVector(std::move(theta));
}

void Network::check_params(const ParamVector& params) const {
    require_same_size(params.size(), param_count_, "parameter vector vs architecture");
}

void Network::check_data(const TaskDataset& data) const {
    data.validate();
    require_same_size(static_cast<std::size_t>(data.inputs.cols()), arch_.input_dim(), "input width vs architecture");
    if (arch_.head.kind == HeadKind::categorical) {
        const auto& labels = data.class_targets();
        for (std::size_t n = 0; n < labels.size(); ++n) {
            if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= arch_.output_dim()) {
                throw ArgumentError("class label out of range at example " + std::to_string(n));
            }
        }
    } else {
        require_same_size(static_cast<std::size_t>(data.regression_targets().cols()), arch_.output_dim(),
                          "target width vs architecture");
    }
}

Network::Trace Network::run(const Vector& theta, const Vector& x) const {
    Trace trace;
    trace.activations.reserve(arch_.layer_sizes.size());
    trace.activations.push_back(x);
    const std::size_t n_layers = arch_.layer_sizes.size() - 1;
    for (std::size_t l = 1; l <= n_layers; ++l) {
        const auto fan_in = static_cast<Eigen::Index>(arch_.layer_sizes[l - 1]);
        const auto fan_out = static_cast<Eigen::Index>(arch_.layer_sizes[l]);
        const double* base = theta.data() + offsets_[l - 1];
        Eigen::Map<const RowMajor> w(base, fan_out, fan_in);
        Vector z = w * trace.activations.back();
        if (arch_.bias) z += Eigen::Map<const Vector>(base + fan_out * fan_in, fan_out);
        if (l < n_layers && arch_.activation == Activation::tanh) z = z.array().tanh();
        trace.activations.push_back(std::move(z));
    }
    return trace;
}

Vector Network::raw_output(const ParamVector& params, const Vector& x) const {
    check_params(params);
    require_same_size(static_cast<std::size_t>(x.size()), arch_.input_dim(), "input width vs architecture");
    return run(params.values(), x).activations.back();
}

Matrix Network::raw_outputs(const ParamVector& params, const Matrix& inputs) const {
    check_params(params);
    require_same_size(static_cast<std::size_t>(inputs.cols()), arch_.input_dim(), "input width vs architecture");
    Matrix out(inputs.rows(), static_cast<Eigen::Index>(arch_.output_dim()));
    for (Eigen::Index n = 0; n < inputs.rows(); ++n) {
        out.row(n) = run(params.values(), inputs.row(n).transpose()).activations.back().transpose();
    }
    return out;
}

Matrix Network::forward(const ParamVector& params, const Matrix& inputs) const {
    Matrix out = raw_outputs(params, inputs);
    if (arch_.head.kind == HeadKind::categorical) {
        for (Eigen::Index n = 0; n < out.rows(); ++n) {
            out.row(n) = softmax(out.row(n).transpose()).transpose();
        }
    }
    return out;
}

double Network::example_nll(const Vector& raw, const TaskDataset& data, std::size_t n) const {
    if (arch_.head.kind == HeadKind::categorical) {
        const int label = data.class_targets()[n];
        return log_sum_exp(raw) - raw[label];
    }
    const double var = arch_.head.noise_variance;
    const Vector r = data.regression_targets().row(static_cast<Eigen::Index>(n)).transpose() - raw;
    const auto k = static_cast<double>(raw.size());
    return 0.5 * k * std::log(2.0 * std::numbers::pi * var) + 0.5 * r.squaredNorm() / var;
}

Vector Network::example_upstream(const Vector& raw, const TaskDataset& data, std::size_t n) const {
    if (arch_.head.kind == HeadKind::categorical) {
        Vector g = softmax(raw);
        g[data.class_targets()[n]] -= 1.0;
        return g;
    }
    return (raw - data.regression_targets().row(static_cast<Eigen::Index>(n)).transpose()) / arch_.head.noise_variance;
}

double Network::neg_log_likelihood(const ParamVector& params, const TaskDataset& data) const {
    check_params(params);
    check_data(data);
    double total = 0.0;
    for (std::size_t n = 0; n < data.sample_count(); ++n) {
        const Vector raw = run(params.values(), data.inputs.row(static_cast<Eigen::Index>(n)).transpose()).activations.back();
        const double v = example_nll(raw, data, n);
        if (!std::isfinite(v)) throw NumericError("non-finite negative log-likelihood at example " + std::to_string(n));
        total += v;
    }
    return total;
}

Vector Network::backprop(const ParamVector& params, const Vector& x, const Vector& upstream) const {
    check_params(params);
    require_same_size(static_cast<std::size_t>(upstream.size()), arch_.output_dim(), "upstream gradient width");
    const Vector& theta = params.values();
    const Trace trace = run(theta, x);
    Vector grad = Vector::Zero(static_cast<Eigen::Index>(param_count_));
    Vector delta = upstream;
    const std::size_t n_layers = arch_.layer_sizes.size() - 1;
    for (std::size_t l = n_layers; l >= 1; --l) {
        const auto fan_in = static_cast<Eigen::Index>(arch_.layer_sizes[l - 1]);
        const auto fan_out = static_cast<Eigen::Index>(arch_.layer_sizes[l]);
        const auto offset = static_cast<Eigen::Index>(offsets_[l - 1]);
        Eigen::Map<RowMajor> gw(grad.data() + offset, fan_out, fan_in);
        gw.noalias() = delta * trace.activations[l - 1].transpose();
        if (arch_.bias) grad.segment(offset + fan_out * fan_in, fan_out) = delta;
        if (l == 1) break;
        Eigen::Map<const RowMajor> w(theta.data() + offset, fan_out, fan_in);
        Vector back = w.transpose() * delta;
        if (arch_.activation == Activation::tanh) {
            back.array() *= 1.0 - trace.activations[l - 1].array().square();
        }
        delta = std::move(back);
    }
    return grad;
}

std::vector<ParamVector> Network::per_example_grads(const ParamVector& params, const TaskDataset& data) const {
    check_params(params);
    check_data(data);
    std::vector<ParamVector> grads;
    grads.reserve(data.sample_count());
    for (std::size_t n = 0; n < data.sample_count(); ++n) {
        const Vector x = data.inputs.row(static_cast<Eigen::Index>(n)).transpose();
        const Vector raw = run(params.values(), x).activations.back();
        const Vector up = example_upstream(raw, data, n);
        if (!up.allFinite()) throw NumericError("non-finite output gradient at example " + std::to_string(n));
        grads.emplace_back(backprop(params, x, up));
    }
    return grads;
}

ParamVector Network::grad_nll(const ParamVector& params, const TaskDataset& data) const {
    // Sequential sum in example order; per_example_grads sums to this bitwise.
    Vector total = Vector::Zero(static_cast<Eigen::Index>(param_count_));
    for (const auto& g : per_example_grads(params, data)) total += g.values();
    return ParamVector(std::move(total));
}

}  // namespace lapewc
