// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "lagkv/matrix.hpp"

namespace lagkv {

/// Token-importance scoring strategies.
///   Lag        -- normalize each partition by the column min/max of the next
///                 partition, score = softmax(row std of K) + softmax(row std of V)
///   Local      -- same pipeline but min/max taken from the partition itself
///   L2Norm     -- score = -||K row||_2; V ignored; callers usually skip the
///                 first two layers with this strategy
///   WindowOnly -- pure recency; keeps the newest k rows of each partition
enum class Strategy {
    Lag,
    Local,
    L2Norm,
    WindowOnly,
};

/// Parses "lag" | "local" | "l2norm" | "window-only"; throws
/// std::invalid_argument on anything else.
Strategy strategy_from_string(std::string_view name);
std::string_view to_string(Strategy strategy);

/// K and V rows of one partition chunk; both matrices share a shape.
struct ChunkPair {
    Matrix K;
    Matrix V;
};

/// Per-token importance scores for one partition under one strategy.
/// Lag/Local scores are sums of two softmaxes: every entry is positive and
/// they total 2. L2Norm scores are <= 0.
struct ScoreVector {
    RealVector scores;
    Strategy strategy = Strategy::Lag;
};

/// K-part and V-part of a lag/local score before summation; each part is a
/// softmax over the chunk's tokens.
struct ScoreParts {
    RealVector k_part;
    RealVector v_part;
};

/// Min-max normalization of a chunk against per-channel statistics of a
/// reference: out[t,c] = (chunk[t,c] - min_c) / max(max_c - min_c, eps).
/// Values may fall outside [0,1] when the chunk exceeds the reference range;
/// eps guards zero-range channels.
Matrix normalize_by_reference(const Matrix& chunk, const Matrix& ref, double eps);

ScoreParts lag_score_parts(const ChunkPair& chunk, const ChunkPair& ref, double eps);

/// Lag-referenced score of a chunk against the immediately following chunk:
/// softmax(row_std(normalize(chunk.K, ref.K))) + softmax(row_std(normalize(chunk.V, ref.V))).
ScoreVector lag_score(const ChunkPair& chunk, const ChunkPair& ref, double eps);

/// Same pipeline with the chunk itself as reference.
ScoreVector local_score(const ChunkPair& chunk, double eps);

/// score[t] = -||K row t||_2.
ScoreVector l2_score(const Matrix& chunk_k);

/// score[t] = t, so top-k keeps the newest rows.
ScoreVector recency_score(std::size_t n);

}  // namespace lagkv
