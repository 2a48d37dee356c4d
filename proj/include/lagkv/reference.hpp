// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "lagkv/matrix.hpp"
#include "lagkv/scoring.hpp"

// Serial reference implementations, written as independent straight-line
// loops. They never call into the main kernels; tests check the parallel
// implementations against them and the benchmark compares their runtimes.

namespace lagkv::reference {

std::pair<RealVector, RealVector> column_min_max(const Matrix& m);
RealVector row_std(const Matrix& m);
RealVector softmax(const RealVector& v);

/// Full sort, take k, re-sort by index.
std::vector<std::size_t> top_k_indices(const RealVector& scores, std::size_t k);

/// Single-pass transcription of the lag scoring pipeline (reference min/max,
/// normalize, per-row std, softmax, K+V sum), all inline loops.
RealVector lag_score(const ChunkPair& chunk, const ChunkPair& ref, double eps);
RealVector local_score(const ChunkPair& chunk, double eps);
RealVector l2_score(const Matrix& chunk_k);

/// Brute-force double-loop attention over all rows.
RealVector attention(const Matrix& k, const Matrix& v, const RealVector& query);

}  // namespace lagkv::reference
