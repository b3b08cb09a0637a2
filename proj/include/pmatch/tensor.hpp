#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmatch {

// Dense row-major matrix of 64-bit floats. Scalars are 1x1, row vectors 1xC,
// column vectors Rx1.
class Tensor {
public:
    Tensor() = default;

    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_) {
            throw std::invalid_argument("Tensor: value count " + std::to_string(values_.size()) +
                                        " does not match shape " + shape_string(rows_, cols_));
        }
    }

    static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor(rows, cols, 0.0); }
    static Tensor ones(std::size_t rows, std::size_t cols) { return Tensor(rows, cols, 1.0); }
    static Tensor full(std::size_t rows, std::size_t cols, double v) { return Tensor(rows, cols, v); }
    static Tensor scalar(double v) { return Tensor(1, 1, v); }

    static Tensor identity(std::size_t n) {
        Tensor t(n, n);
        for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
        return t;
    }

    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.begin()->size();
        Tensor t(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw std::invalid_argument("Tensor::from_rows: ragged rows");
            std::size_t j = 0;
            for (double v : row) t(i, j++) = v;
            ++i;
        }
        return t;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }
    std::vector<std::size_t> shape() const { return {rows_, cols_}; }

    bool same_shape(const Tensor& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return values_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return values_[r * cols_ + c];
    }

    double& operator[](std::size_t i) {
        assert(i < values_.size());
        return values_[i];
    }
    double operator[](std::size_t i) const {
        assert(i < values_.size());
        return values_[i];
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double max_abs_diff(const Tensor& other) const {
        if (!same_shape(other)) throw std::invalid_argument("max_abs_diff: shape mismatch");
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            m = std::max(m, std::abs(values_[i] - other.values_[i]));
        return m;
    }

    bool operator==(const Tensor& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && values_ == other.values_;
    }

    static std::string shape_string(std::size_t r, std::size_t c) {
        return std::to_string(r) + "x" + std::to_string(c);
    }
    std::string shape_string() const { return shape_string(rows_, cols_); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

} // namespace pmatch
