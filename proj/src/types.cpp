#include "lapewc/types.hpp"

#include "lapewc/errors.hpp"

#include <cmath>
#include <string>

namespace lapewc {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": length " + std::to_string(a) + " != " + std::to_string(b));
    }
}

ParamVector::ParamVector(Vector values) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw NumericError("ParamVector: non-finite entry at index " + std::to_string(i));
        }
    }
}

ParamVector ParamVector::zeros(std::size_t size) {
    return ParamVector(Vector::Zero(static_cast<Eigen::Index>(size)));
}

DiagPrecision::DiagPrecision(Vector values) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw NumericError("DiagPrecision: non-finite entry at index " + std::to_string(i));
        }
        if (values_[i] < 0.0) {
            throw ArgumentError("DiagPrecision: negative entry at index " + std::to_string(i));
        }
    }
}

DiagPrecision DiagPrecision::constant(std::size_t size, double value) {
    return DiagPrecision(Vector::Constant(static_cast<Eigen::Index>(size), value));
}

DiagPrecision DiagPrecision::scaled(double factor) const {
    if (factor < 0.0) throw ArgumentError("DiagPrecision::scaled: negative factor");
    return DiagPrecision(values_ * factor);
}

DiagPrecision DiagPrecision::plus(const DiagPrecision& other) const {
    require_same_size(size(), other.size(), "DiagPrecision::plus");
    return DiagPrecision(values_ + other.values_);
}

const Matrix& TaskDataset::regression_targets() const {
    if (is_classification()) throw ArgumentError("dataset has class targets, regression head requires real targets");
    return std::get<Matrix>(targets);
}

const std::vector<int>& TaskDataset::class_targets() const {
    if (!is_classification()) throw ArgumentError("dataset has real targets, categorical head requires class labels");
    return std::get<std::vector<int>>(targets);
}

void TaskDataset::validate() const {
    if (inputs.rows() < 1) throw ArgumentError("dataset is empty");
    const auto n = static_cast<std::size_t>(inputs.rows());
    if (is_classification()) {
        require_same_size(std::get<std::vector<int>>(targets).size(), n, "class targets vs inputs");
    } else {
        require_same_size(static_cast<std::size_t>(std::get<Matrix>(targets).rows()), n, "targets vs inputs");
    }
}

TaskDataset TaskDataset::concatenated(const TaskDataset& other) const {
    if (is_classification() != other.is_classification()) {
        throw ArgumentError("cannot concatenate regression and classification datasets");
    }
    require_same_size(static_cast<std::size_t>(inputs.cols()), static_cast<std::size_t>(other.inputs.cols()),
                      "concatenate input width");
    TaskDataset out;
    out.inputs.resize(inputs.rows() + other.inputs.rows(), inputs.cols());
    out.inputs << inputs, other.inputs;
    if (is_classification()) {
        auto labels = class_targets();
        const auto& tail = other.class_targets();
        labels.insert(labels.end(), tail.begin(), tail.end());
        out.targets = std::move(labels);
    } else {
        const auto& a = regression_targets();
        const auto& b = other.regression_targets();
        require_same_size(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(b.cols()),
                          "concatenate target width");
        Matrix y(a.rows() + b.rows(), a.cols());
        y << a, b;
        out.targets = std::move(y);
    }
    return out;
}

TaskDataset TaskDataset::permuted_rows(const std::vector<std::size_t>& order) const {
    require_same_size(order.size(), sample_count(), "row permutation");
    TaskDataset out;
    out.inputs.resize(inputs.rows(), inputs.cols());
    for (std::size_t n = 0; n < order.size(); ++n) {
        out.inputs.row(static_cast<Eigen::Index>(n)) = inputs.row(static_cast<Eigen::Index>(order[n]));
    }
    if (is_classification()) {
        const auto& labels = class_targets();
        std::vector<int> permuted(labels.size());
        for (std::size_t n = 0; n < order.size(); ++n) permuted[n] = labels[order[n]];
        out.targets = std::move(permuted);
    } else {
        const auto& y = regression_targets();
        Matrix permuted(y.rows(), y.cols());
        for (std::size_t n = 0; n < order.size(); ++n) {
            permuted.row(static_cast<Eigen::Index>(n)) = y.row(static_cast<Eigen::Index>(order[n]));
        }
        out.targets = std::move(permuted);
    }
    return out;
}

}  // namespace lapewc
