#include "lapewc/fisher.hpp"

#include "lapewc/errors.hpp"
#include "lapewc/rng.hpp"

#include <cmath>

namespace lapewc {

std::string to_string(FisherMode m) {
    switch (m) {
        case FisherMode::observed: return "observed";
        case FisherMode::sampled: return "sampled";
        case FisherMode::expected: return "expected";
    }
    return "observed";
}

FisherMode fisher_mode_from_string(const std::string& s) {
    if (s == "observed") return FisherMode::observed;
    if (s == "sampled") return FisherMode::sampled;
    if (s == "expected") return FisherMode::expected;
    throw ArgumentError("unknown fisher mode '" + s + "'");
}

namespace {

Vector sampled_upstream(const Head& head, const Vector& raw, Rng& rng) {
    if (head.kind == HeadKind::categorical) {
        const Vector p = softmax(raw);
        const double u = rng.uniform();
        Eigen::Index label = p.size() - 1;
        double acc = 0.0;
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            acc += p[k];
            if (u < acc) {
                label = k;
                break;
            }
        }
        Vector g = p;
        g[label] -= 1.0;
        return g;
    }
    // y = mean + sigma * eps, so (mean - y) / sigma^2 = -eps / sigma
    const double sigma = std::sqrt(head.noise_variance);
    Vector g(raw.size());
    for (Eigen::Index k = 0; k < raw.size(); ++k) g[k] = -rng.normal() / sigma;
    return g;
}

}  // namespace

DiagPrecision empirical_fisher_diag(const Network& net, const ParamVector& params, const TaskDataset& data,
                                    FisherMode mode, std::uint64_t seed) {
    if (data.inputs.rows() < 1) throw ArgumentError("empirical_fisher_diag: empty dataset");
    net.check_params(params);
    net.check_data(data);

    const auto p = static_cast<Eigen::Index>(net.param_count());
    const Head& head = net.architecture().head;
    const auto n_samples = data.sample_count();
    Vector acc = Vector::Zero(p);

    if (mode == FisherMode::observed) {
        for (const auto& g : net.per_example_grads(params, data)) acc.array() += g.values().array().square();
    } else {
        Rng rng(seed);
        for (std::size_t n = 0; n < n_samples; ++n) {
            const Vector x = data.inputs.row(static_cast<Eigen::Index>(n)).transpose();
            const Vector raw = net.raw_output(params, x);
            if (mode == FisherMode::sampled) {
                acc.array() += net.backprop(params, x, sampled_upstream(head, raw, rng)).array().square();
                continue;
            }
            const auto k_out = raw.size();
            if (head.kind == HeadKind::categorical) {
                const Vector prob = softmax(raw);
                for (Eigen::Index k = 0; k < k_out; ++k) {
                    Vector up = prob;
                    up[k] -= 1.0;
                    acc.array() += prob[k] * net.backprop(params, x, up).array().square();
                }
            } else {
                for (Eigen::Index k = 0; k < k_out; ++k) {
                    const Vector jac = net.backprop(params, x, Vector::Unit(k_out, k));
                    acc.array() += jac.array().square() / head.noise_variance;
                }
            }
        }
    }
    acc /= static_cast<double>(n_samples);
    if (!acc.allFinite()) throw NumericError("empirical_fisher_diag: non-finite result");
    return DiagPrecision(std::move(acc));
}

}  // namespace lapewc
