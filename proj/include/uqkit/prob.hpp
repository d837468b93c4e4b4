#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uqkit/matrix.hpp"

namespace uqkit {

/// Max-shifted softmax. Throws InvalidInput on empty or non-finite logits.
std::vector<double> softmax(std::span<const double> logits);

/// ln sum exp(v_i), shifted by the max. Entries equal to -inf are allowed.
double log_sum_exp(std::span<const double> values);

/// k-th order statistic, k is 1-based. Throws std::out_of_range unless 1 <= k <= n.
double kth_smallest(std::span<const double> values, std::size_t k);

/// Shannon entropy in nats; 0 * ln 0 is taken as 0.
double entropy(std::span<const double> probs);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Row-wise softmax of logits / temperature.
Matrix softmax_rows(const Matrix& logits, double temperature = 1.0);

/// Throws InvalidInput if any row is not a probability vector within tol.
void require_normalized_rows(const Matrix& probs, double tol, const char* what);

} // namespace uqkit
