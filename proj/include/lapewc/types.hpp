#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace lapewc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Flat vector of every network parameter. Entries are always finite.
///
/// Flattening order is fixed: layer by layer, each layer's weight matrix
/// (fan_out x fan_in, row-major) followed by its bias vector when present.
class ParamVector {
  public:
    ParamVector() = default;
    explicit ParamVector(Vector values);
    static ParamVector zeros(std::size_t size);

    [[nodiscard]] const Vector& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

    friend bool operator==(const ParamVector& a, const ParamVector& b) {
        return a.values_.size() == b.values_.size() && a.values_ == b.values_;
    }

  private:
    Vector values_;
};

/// Nonnegative per-parameter precision (inverse variance) diagonal.
class DiagPrecision {
  public:
    DiagPrecision() = default;
    explicit DiagPrecision(Vector values);
    static DiagPrecision constant(std::size_t size, double value);

    [[nodiscard]] const Vector& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

    [[nodiscard]] DiagPrecision scaled(double factor) const;
    [[nodiscard]] DiagPrecision plus(const DiagPrecision& other) const;

  private:
    Vector values_;
};

/// Class labels for the categorical head, real targets (N x K) for the Gaussian head.
using Targets = std::variant<Matrix, std::vector<int>>;

/// One task's training data: N i.i.d. rows.
struct TaskDataset {
    Matrix inputs;  // N x d
    Targets targets;

    [[nodiscard]] std::size_t sample_count() const noexcept { return static_cast<std::size_t>(inputs.rows()); }
    [[nodiscard]] bool is_classification() const noexcept {
        return std::holds_alternative<std::vector<int>>(targets);
    }
    [[nodiscard]] const Matrix& regression_targets() const;
    [[nodiscard]] const std::vector<int>& class_targets() const;

    /// Rows of `this` followed by rows of `other`. Target kinds must agree.
    [[nodiscard]] TaskDataset concatenated(const TaskDataset& other) const;
    /// Copy with rows reordered: row n of the result is row order[n] of this.
    [[nodiscard]] TaskDataset permuted_rows(const std::vector<std::size_t>& order) const;

    /// Throws DimensionError unless target rows match input rows and N >= 1.
    void validate() const;
};

void require_same_size(std::size_t a, std::size_t b, const char* what);

}  // namespace lapewc
