#pragma once

#include "lapewc/consolidate.hpp"
#include "lapewc/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lapewc {

enum class TaskKind { diag_linear_gaussian, linear_gaussian, permuted_features_classification };

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

/// Recipe for one synthetic task. Generation is a pure function of the spec
/// and (optionally) the previous spec in the sequence.
///
/// Regression kinds: half of the coordinates (rounded up) are informative with
/// weights +-(1 + U[0,1)); `overlap` is the fraction of them shared with the
/// previous task's informative set.
/// permuted_features_classification: a two-class Gaussian-blob base dataset
/// drawn from `base_seed` is shared by every task; each task permutes its input
/// columns with a permutation drawn from `seed`, leaving round(overlap * d)
/// columns in place.
struct TaskSpec {
    TaskId id;
    TaskKind kind = TaskKind::diag_linear_gaussian;
    std::size_t n_samples = 64;
    std::size_t input_dim = 16;
    std::uint64_t seed = 0;
    double overlap = 0.0;
    double noise_variance = 1.0;
    std::uint64_t base_seed = 0;

    void validate() const;
};

[[nodiscard]] TaskDataset generate(const TaskSpec& spec, const std::optional<TaskSpec>& prev = std::nullopt);
[[nodiscard]] std::vector<TaskDataset> generate_sequence(const std::vector<TaskSpec>& specs);

/// Informative coordinates of a regression task, in generation order.
[[nodiscard]] std::vector<std::size_t> informative_coordinates(const TaskSpec& spec,
                                                               const std::optional<TaskSpec>& prev = std::nullopt);

/// Column permutation applied by a permuted_features_classification task:
/// task column j holds base column perm[j].
[[nodiscard]] std::vector<std::size_t> feature_permutation(const TaskSpec& spec);

}  // namespace lapewc
