#pragma once

#include <span>

#include "uqkit/matrix.hpp"

// Dense kernels in two flavours: `serial` is the reference implementation and
// `parallel` spreads independent output rows over OpenMP threads. Every output
// element is accumulated in the same order in both, so results are bit-identical.
namespace uqkit::kernels {

/// out = softmax(row / temperature); shared by both flavours.
void softmax_row(std::span<const double> row, double temperature, std::span<double> out);

namespace serial {

/// C = A * B
Matrix gemm(const Matrix& a, const Matrix& b);
/// C = A^T * B
Matrix gemm_tn(const Matrix& a, const Matrix& b);
/// C = A * B^T
Matrix gemm_nt(const Matrix& a, const Matrix& b);
Matrix softmax_rows(const Matrix& logits, double temperature);

} // namespace serial

namespace parallel {

Matrix gemm(const Matrix& a, const Matrix& b);
Matrix gemm_tn(const Matrix& a, const Matrix& b);
Matrix gemm_nt(const Matrix& a, const Matrix& b);
Matrix softmax_rows(const Matrix& logits, double temperature);

} // namespace parallel

/// Below this many multiply-adds the parallel kernels run on the calling thread.
inline constexpr long parallel_threshold = 1L << 15;

} // namespace uqkit::kernels
