#pragma once

#include "lapewc/types.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lapewc {

enum class Activation { tanh, identity };
enum class HeadKind { gaussian_regression, categorical };

struct Head {
    HeadKind kind = HeadKind::gaussian_regression;
    /// Fixed observation noise variance of the Gaussian head; ignored for categorical.
    double noise_variance = 1.0;
};

/// Fully connected feedforward layout. The activation applies to hidden
/// layers only; the last layer feeds the head (means or logits).
struct Architecture {
    std::vector<std::size_t> layer_sizes;
    Activation activation = Activation::tanh;
    Head head;
    bool bias = true;

    [[nodiscard]] std::size_t input_dim() const { return layer_sizes.front(); }
    [[nodiscard]] std::size_t output_dim() const { return layer_sizes.back(); }
    [[nodiscard]] std::size_t param_count() const;
    void validate() const;
};

std::string to_string(Activation a);
std::string to_string(HeadKind h);
Activation activation_from_string(const std::string& s);
HeadKind head_from_string(const std::string& s);

/// Small MLP with hand-written backprop. Stateless apart from its architecture,
/// so every member is safe to call concurrently.
class Network {
  public:
    explicit Network(Architecture arch);

    [[nodiscard]] const Architecture& architecture() const noexcept { return arch_; }
    [[nodiscard]] std::size_t param_count() const noexcept { return param_count_; }

    /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
    [[nodiscard]] ParamVector init_params(std::uint64_t seed) const;

    /// Predicted means (Gaussian head) or class probabilities (categorical head), one row per input.
    [[nodiscard]] Matrix forward(const ParamVector& params, const Matrix& inputs) const;
    /// Pre-head outputs: means for the Gaussian head, logits for the categorical head.
    [[nodiscard]] Matrix raw_outputs(const ParamVector& params, const Matrix& inputs) const;

    /// Exact -log p(D | theta), summed over rows, Gaussian normalizer included.
    [[nodiscard]] double neg_log_likelihood(const ParamVector& params, const TaskDataset& data) const;
    [[nodiscard]] ParamVector grad_nll(const ParamVector& params, const TaskDataset& data) const;
    [[nodiscard]] std::vector<ParamVector> per_example_grads(const ParamVector& params,
                                                             const TaskDataset& data) const;

    /// d/dtheta of <upstream, raw_output(x)>. Building block for per-example
    /// gradients and Fisher variants that need other target choices.
    [[nodiscard]] Vector backprop(const ParamVector& params, const Vector& x, const Vector& upstream) const;
    /// Raw output (means or logits) for a single input row.
    [[nodiscard]] Vector raw_output(const ParamVector& params, const Vector& x) const;

    void check_params(const ParamVector& params) const;
    void check_data(const TaskDataset& data) const;

  private:
    struct Trace {
        std::vector<Vector> activations;  // activations[0] = input, activations[l] = layer l output
    };
    Trace run(const Vector& params, const Vector& x) const;
    [[nodiscard]] double example_nll(const Vector& raw, const TaskDataset& data, std::size_t n) const;
    [[nodiscard]] Vector example_upstream(const Vector& raw, const TaskDataset& data, std::size_t n) const;

    Architecture arch_;
    std::size_t param_count_ = 0;
    std::vector<std::size_t> offsets_;  // start of each layer's block in the flat vector
};

/// Numerically stable log(sum(exp(z))).
double log_sum_exp(const Vector& z);
Vector softmax(const Vector& z);

}  // namespace lapewc
