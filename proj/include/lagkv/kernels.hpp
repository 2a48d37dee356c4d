// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "lagkv/matrix.hpp"

namespace lagkv {

/// Per-column minimum and maximum of a matrix. Both output vectors have
/// length m.cols. Throws std::invalid_argument("empty reference") when the
/// matrix has no rows.
std::pair<RealVector, RealVector> column_min_max(const Matrix& m);

/// Population standard deviation of every row (divisor = cols, not cols-1).
/// Output length = m.rows.
RealVector row_std(const Matrix& m);

/// Numerically safe softmax: subtracts the maximum before exponentiating so
/// arbitrarily large inputs cannot overflow. Output sums to 1.
RealVector softmax(const RealVector& v);

/// Indices of the k largest scores, emitted in ascending index order so the
/// original sequence order is preserved. Ties prefer the smaller index.
/// Throws std::invalid_argument("k exceeds candidates") when k > scores.size().
std::vector<std::size_t> top_k_indices(const RealVector& scores, std::size_t k);

}  // namespace lagkv
