#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hdts/errors.hpp"

namespace hdts {

// Dense row-major matrix. Time series panels store one observation per row,
// so rows() = n time points and cols() = p coordinates.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t dim) {
        Matrix m(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    std::span<double> row_span(std::size_t i) { return {row(i), cols_}; }
    std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& other) const = default;

    std::vector<double> col_means() const {
        std::vector<double> m(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* r = row(i);
            for (std::size_t j = 0; j < cols_; ++j) m[j] += r[j];
        }
        for (double& v : m) v /= static_cast<double>(rows_);
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace hdts
