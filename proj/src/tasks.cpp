#include "lapewc/tasks.hpp"

#include "lapewc/errors.hpp"
#include "lapewc/rng.hpp"

#include <algorithm>
#include <cmath>

namespace lapewc {

std::string to_string(TaskKind k) {
    switch (k) {
        case TaskKind::diag_linear_gaussian: return "diag_linear_gaussian";
        case TaskKind::linear_gaussian: return "linear_gaussian";
        case TaskKind::permuted_features_classification: return "permuted_features_classification";
    }
    return "diag_linear_gaussian";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "diag_linear_gaussian") return TaskKind::diag_linear_gaussian;
    if (s == "linear_gaussian") return TaskKind::linear_gaussian;
    if (s == "permuted_features_classification") return TaskKind::permuted_features_classification;
    throw ArgumentError("unknown task kind '" + s + "'");
}

void TaskSpec::validate() const {
    if (id.empty()) throw ArgumentError("task id must be nonempty");
    if (n_samples < 1) throw ArgumentError("task '" + id + "': n_samples must be >= 1");
    if (input_dim < 1) throw ArgumentError("task '" + id + "': input_dim must be >= 1");
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw ArgumentError("task '" + id + "': overlap must be in [0,1]");
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
        throw ArgumentError("task '" + id + "': noise_variance must be > 0");
    }
}

namespace {

std::size_t informative_count(std::size_t d) { return (d + 1) / 2; }

// Own (prev-independent) ranking of coordinates; the first k are the base informative set.
std::vector<std::size_t> base_ranking(const TaskSpec& spec) {
    Rng rng(spec.seed);
    return rng.permutation(spec.input_dim);
}

}  // namespace

std::vector<std::size_t> informative_coordinates(const TaskSpec& spec, const std::optional<TaskSpec>& prev) {
    const std::size_t d = spec.input_dim;
    const std::size_t k = informative_count(d);
    const auto own = base_ranking(spec);
    if (!prev) return {own.begin(), own.begin() + static_cast<std::ptrdiff_t>(k)};

    const auto prev_rank = base_ranking(*prev);
    const std::vector<std::size_t> prev_set(prev_rank.begin(), prev_rank.begin() + static_cast<std::ptrdiff_t>(k));
    const auto shared = static_cast<std::size_t>(std::lround(spec.overlap * static_cast<double>(k)));
    std::vector<std::size_t> out(prev_set.begin(), prev_set.begin() + static_cast<std::ptrdiff_t>(shared));
    for (auto c : own) {
        if (out.size() == k) break;
        if (std::find(prev_set.begin(), prev_set.end(), c) == prev_set.end()) out.push_back(c);
    }
    // Only reachable when fewer than k coordinates lie outside the previous set.
    for (auto c : own) {
        if (out.size() == k) break;
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
}

std::vector<std::size_t> feature_permutation(const TaskSpec& spec) {
    const std::size_t d = spec.input_dim;
    Rng rng(spec.seed);
    const auto order = rng.permutation(d);
    const auto fixed = static_cast<std::size_t>(std::lround(spec.overlap * static_cast<double>(d)));
    std::vector<std::size_t> moving(order.begin() + static_cast<std::ptrdiff_t>(fixed), order.end());
    std::vector<std::size_t> targets = moving;
    rng.shuffle(targets);
    std::vector<std::size_t> perm(d);
    for (std::size_t j = 0; j < d; ++j) perm[j] = j;
    for (std::size_t m = 0; m < moving.size(); ++m) perm[moving[m]] = targets[m];
    return perm;
}

namespace {

TaskDataset regression_task(const TaskSpec& spec, const std::optional<TaskSpec>& prev) {
    const std::size_t d = spec.input_dim;
    const auto n = static_cast<Eigen::Index>(spec.n_samples);
    Rng rng(spec.seed);
    (void)rng.permutation(d);  // consumed by informative_coordinates

    Vector w = Vector::Zero(static_cast<Eigen::Index>(d));
    for (auto c : informative_coordinates(spec, prev)) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        w[static_cast<Eigen::Index>(c)] = sign * (1.0 + rng.uniform());
    }

    Matrix x = Matrix::Zero(n, static_cast<Eigen::Index>(d));
    for (Eigen::Index r = 0; r < n; ++r) {
        if (spec.kind == TaskKind::diag_linear_gaussian) {
            x(r, r % static_cast<Eigen::Index>(d)) = 1.0;
        } else {
            for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.normal();
        }
    }
    const double sigma = std::sqrt(spec.noise_variance);
    Matrix y(n, 1);
    for (Eigen::Index r = 0; r < n; ++r) y(r, 0) = x.row(r).dot(w) + sigma * rng.normal();
    return TaskDataset{std::move(x), std::move(y)};
}

TaskDataset permuted_task(const TaskSpec& spec) {
    const std::size_t d = spec.input_dim;
    const auto n = static_cast<Eigen::Index>(spec.n_samples);

    Rng base(spec.base_seed);
    const auto rank = base.permutation(d);
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < informative_count(d); ++k) {
        mean[static_cast<Eigen::Index>(rank[k])] = base.uniform() < 0.5 ? -1.5 : 1.5;
    }
    Matrix base_x(n, static_cast<Eigen::Index>(d));
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        const int label = static_cast<int>(r % 2);
        labels[static_cast<std::size_t>(r)] = label;
        const double s = label == 1 ? 1.0 : -1.0;
        for (Eigen::Index c = 0; c < base_x.cols(); ++c) base_x(r, c) = s * mean[c] + base.normal();
    }

    const auto perm = feature_permutation(spec);
    Matrix x(n, static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
        x.col(static_cast<Eigen::Index>(j)) = base_x.col(static_cast<Eigen::Index>(perm[j]));
    }
    return TaskDataset{std::move(x), std::move(labels)};
}

}  // namespace

TaskDataset generate(const TaskSpec& spec, const std::optional<TaskSpec>& prev) {
    spec.validate();
    if (prev && prev->input_dim != spec.input_dim) {
        throw ArgumentError("task '" + spec.id + "': input_dim " + std::to_string(spec.input_dim) +
                            " differs from previous task's " + std::to_string(prev->input_dim));
    }
    if (spec.kind == TaskKind::permuted_features_classification) return permuted_task(spec);
    return regression_task(spec, prev);
}

std::vector<TaskDataset> generate_sequence(const std::vector<TaskSpec>& specs) {
    std::vector<TaskDataset> out;
    out.reserve(specs.size());
    for (std::size_t t = 0; t < specs.size(); ++t) {
        out.push_back(generate(specs[t], t == 0 ? std::nullopt : std::optional<TaskSpec>(specs[t - 1])));
    }
    return out;
}

}  // namespace lapewc
