#include "uqkit/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "uqkit/error.hpp"

namespace uqkit::kernels {

namespace {

void check_gemm(std::size_t inner_a, std::size_t inner_b) {
    if (inner_a != inner_b) {
        throw InvalidInput("gemm: inner dimensions differ");
    }
}

// Row r of A*B. k-outer keeps B accesses contiguous; the k order is fixed.
inline void gemm_row(const Matrix& a, const Matrix& b, std::size_t r, Matrix& c) {
    auto out = c.row(r);
    for (std::size_t k = 0; k < a.cols(); ++k) {
        const double av = a(r, k);
        const auto brow = b.row(k);
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] += av * brow[j];
        }
    }
}

// Row r of A^T*B, i.e. column r of A against B.
inline void gemm_tn_row(const Matrix& a, const Matrix& b, std::size_t r, Matrix& c) {
    auto out = c.row(r);
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double av = a(k, r);
        const auto brow = b.row(k);
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] += av * brow[j];
        }
    }
}

inline void gemm_nt_row(const Matrix& a, const Matrix& b, std::size_t r, Matrix& c) {
    const auto arow = a.row(r);
    for (std::size_t j = 0; j < b.rows(); ++j) {
        const auto brow = b.row(j);
        double s = 0.0;
        for (std::size_t k = 0; k < arow.size(); ++k) {
            s += arow[k] * brow[k];
        }
        c(r, j) = s;
    }
}

long work(std::size_t m, std::size_t k, std::size_t n) {
    return static_cast<long>(m) * static_cast<long>(k) * static_cast<long>(n);
}

} // namespace

void softmax_row(std::span<const double> row, double temperature, std::span<double> out) {
    double m = row[0] / temperature;
    for (double v : row) {
        m = std::max(m, v / temperature);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = std::exp(row[j] / temperature - m);
        sum += out[j];
    }
    for (double& v : out) {
        v /= sum;
    }
}

namespace serial {

Matrix gemm(const Matrix& a, const Matrix& b) {
    check_gemm(a.cols(), b.rows());
    Matrix c(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        gemm_row(a, b, r, c);
    }
    return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
    check_gemm(a.rows(), b.rows());
    Matrix c(a.cols(), b.cols());
    for (std::size_t r = 0; r < a.cols(); ++r) {
        gemm_tn_row(a, b, r, c);
    }
    return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
    check_gemm(a.cols(), b.cols());
    Matrix c(a.rows(), b.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        gemm_nt_row(a, b, r, c);
    }
    return c;
}

Matrix softmax_rows(const Matrix& logits, double temperature) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        softmax_row(logits.row(r), temperature, out.row(r));
    }
    return out;
}

} // namespace serial

namespace parallel {

Matrix gemm(const Matrix& a, const Matrix& b) {
    check_gemm(a.cols(), b.rows());
    Matrix c(a.rows(), b.cols());
    const auto rows = static_cast<long>(a.rows());
#pragma omp parallel for schedule(static) if (work(a.rows(), a.cols(), b.cols()) > parallel_threshold)
    for (long r = 0; r < rows; ++r) {
        gemm_row(a, b, static_cast<std::size_t>(r), c);
    }
    return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
    check_gemm(a.rows(), b.rows());
    Matrix c(a.cols(), b.cols());
    const auto rows = static_cast<long>(a.cols());
#pragma omp parallel for schedule(static) if (work(a.cols(), a.rows(), b.cols()) > parallel_threshold)
    for (long r = 0; r < rows; ++r) {
        gemm_tn_row(a, b, static_cast<std::size_t>(r), c);
    }
    return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
    check_gemm(a.cols(), b.cols());
    Matrix c(a.rows(), b.rows());
    const auto rows = static_cast<long>(a.rows());
#pragma omp parallel for schedule(static) if (work(a.rows(), a.cols(), b.rows()) > parallel_threshold)
    for (long r = 0; r < rows; ++r) {
        gemm_nt_row(a, b, static_cast<std::size_t>(r), c);
    }
    return c;
}

Matrix softmax_rows(const Matrix& logits, double temperature) {
    Matrix out(logits.rows(), logits.cols());
    const auto rows = static_cast<long>(logits.rows());
#pragma omp parallel for schedule(static) if (work(logits.rows(), logits.cols(), 8) > parallel_threshold)
    for (long r = 0; r < rows; ++r) {
        const auto i = static_cast<std::size_t>(r);
        softmax_row(logits.row(i), temperature, out.row(i));
    }
    return out;
}

} // namespace parallel

} // namespace uqkit::kernels
