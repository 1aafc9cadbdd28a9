#pragma once

#include "lapewc/net.hpp"
#include "lapewc/types.hpp"

#include <cstdint>
#include <string>

namespace lapewc {

/// Which targets the squared per-example gradients are taken at.
///   observed: the dataset's own targets (empirical Fisher).
///   sampled:  one target per example drawn from the model's predictive distribution (seeded).
///   expected: exact expectation over the predictive distribution. For the Gaussian
///             head this is J^T J / sigma^2 per example, for the categorical head
///             sum_k p_k g_k^2 over classes.
enum class FisherMode { observed, sampled, expected };

std::string to_string(FisherMode m);
FisherMode fisher_mode_from_string(const std::string& s);

/// Per-example average of squared per-example NLL gradients at `params`.
/// Multiply by N_t (or lambda_t) to get a precision contribution.
[[nodiscard]] DiagPrecision empirical_fisher_diag(const Network& net, const ParamVector& params,
                                                  const TaskDataset& data, FisherMode mode = FisherMode::observed,
                                                  std::uint64_t seed = 0);

}  // namespace lapewc
