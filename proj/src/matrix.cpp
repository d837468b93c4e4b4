#include "uqkit/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uqkit/error.hpp"

namespace uqkit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw InvalidInput("matrix data length does not match rows x cols");
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw InvalidInput("ragged matrix initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::row_vector(std::span<const double> values) {
    return {1, values.size(), std::vector<double>(values.begin(), values.end())};
}

Matrix Matrix::column_vector(std::span<const double> values) {
    return {values.size(), 1, std::vector<double>(values.begin(), values.end())};
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

bool Matrix::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_) {
            throw std::out_of_range("row index out of range");
        }
        auto src = row(indices[i]);
        auto dst = out.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

} // namespace uqkit
