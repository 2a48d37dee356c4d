// SPDX-License-Identifier: Apache-2.0

#include "lagkv/scoring.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "lagkv/kernels.hpp"

namespace lagkv {

Strategy strategy_from_string(std::string_view name) {
    if (name == "lag") return Strategy::Lag;
    if (name == "local") return Strategy::Local;
    if (name == "l2norm") return Strategy::L2Norm;
    if (name == "window-only") return Strategy::WindowOnly;
    throw std::invalid_argument("unknown strategy: " + std::string(name));
}

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::Lag: return "lag";
        case Strategy::Local: return "local";
        case Strategy::L2Norm: return "l2norm";
        case Strategy::WindowOnly: return "window-only";
    }
    return "?";
}

Matrix normalize_by_reference(const Matrix& chunk, const Matrix& ref, double eps) {
    if (chunk.cols != ref.cols) {
        throw std::invalid_argument("channel count mismatch between chunk and reference");
    }
    const auto [mins, maxs] = column_min_max(ref);
    RealVector range(chunk.cols);
    for (std::size_t c = 0; c < chunk.cols; ++c) {
        range[c] = std::max(maxs[c] - mins[c], eps);
    }
    Matrix out(chunk.rows, chunk.cols);
    const auto rows = static_cast<std::ptrdiff_t>(chunk.rows);
#pragma omp parallel for schedule(static) if (chunk.rows * chunk.cols >= 16384)
    for (std::ptrdiff_t t = 0; t < rows; ++t) {
        const double* src = chunk.row(t);
        double* dst = out.row(t);
        for (std::size_t c = 0; c < chunk.cols; ++c) {
            dst[c] = (src[c] - mins[c]) / range[c];
        }
    }
    return out;
}

namespace {

// row_std(normalize_by_reference(chunk, ref, eps)) without materializing the
// normalized matrix.
RealVector normalized_row_std(const Matrix& chunk, const Matrix& ref, double eps) {
    if (chunk.cols != ref.cols) {
        throw std::invalid_argument("channel count mismatch between chunk and reference");
    }
    if (chunk.cols == 0) {
        throw std::invalid_argument("matrix has no channels");
    }
    const auto [mins, maxs] = column_min_max(ref);
    RealVector range(chunk.cols);
    for (std::size_t c = 0; c < chunk.cols; ++c) {
        range[c] = std::max(maxs[c] - mins[c], eps);
    }
    RealVector out(chunk.rows);
    const auto rows = static_cast<std::ptrdiff_t>(chunk.rows);
    const double inv_cols = 1.0 / static_cast<double>(chunk.cols);
#pragma omp parallel for schedule(static) if (chunk.rows * chunk.cols >= 16384)
    for (std::ptrdiff_t t = 0; t < rows; ++t) {
        const double* row = chunk.row(t);
        double mean = 0.0;
        for (std::size_t c = 0; c < chunk.cols; ++c) {
            mean += (row[c] - mins[c]) / range[c];
        }
        mean *= inv_cols;
        double var = 0.0;
        for (std::size_t c = 0; c < chunk.cols; ++c) {
            const double d = (row[c] - mins[c]) / range[c] - mean;
            var += d * d;
        }
        out[t] = std::sqrt(var * inv_cols);
    }
    return out;
}

}  // namespace

ScoreParts lag_score_parts(const ChunkPair& chunk, const ChunkPair& ref, double eps) {
    if (!chunk.K.same_shape(chunk.V)) {
        throw std::invalid_argument("chunk K and V shapes disagree");
    }
    ScoreParts parts;
    parts.k_part = softmax(normalized_row_std(chunk.K, ref.K, eps));
    parts.v_part = softmax(normalized_row_std(chunk.V, ref.V, eps));
    return parts;
}

ScoreVector lag_score(const ChunkPair& chunk, const ChunkPair& ref, double eps) {
    const ScoreParts parts = lag_score_parts(chunk, ref, eps);
    ScoreVector out;
    out.strategy = Strategy::Lag;
    out.scores.resize(parts.k_part.size());
    for (std::size_t t = 0; t < out.scores.size(); ++t) {
        out.scores[t] = parts.k_part[t] + parts.v_part[t];
    }
    return out;
}

ScoreVector local_score(const ChunkPair& chunk, double eps) {
    ScoreVector out = lag_score(chunk, chunk, eps);
    out.strategy = Strategy::Local;
    return out;
}

ScoreVector l2_score(const Matrix& chunk_k) {
    ScoreVector out;
    out.strategy = Strategy::L2Norm;
    out.scores.resize(chunk_k.rows);
    const auto rows = static_cast<std::ptrdiff_t>(chunk_k.rows);
#pragma omp parallel for schedule(static) if (chunk_k.rows * chunk_k.cols >= 16384)
    for (std::ptrdiff_t t = 0; t < rows; ++t) {
        const double* row = chunk_k.row(t);
        double sq = 0.0;
        for (std::size_t c = 0; c < chunk_k.cols; ++c) {
            sq += row[c] * row[c];
        }
        out.scores[t] = -std::sqrt(sq);
    }
    return out;
}

ScoreVector recency_score(std::size_t n) {
    ScoreVector out;
    out.strategy = Strategy::WindowOnly;
    out.scores.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        out.scores[t] = static_cast<double>(t);
    }
    return out;
}

}  // namespace lagkv
