// SPDX-License-Identifier: Apache-2.0

#include "lagkv/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lagkv::reference {

std::pair<RealVector, RealVector> column_min_max(const Matrix& m) {
    if (m.rows == 0) {
        throw std::invalid_argument("empty reference");
    }
    RealVector mins(m.cols);
    RealVector maxs(m.cols);
    for (std::size_t c = 0; c < m.cols; ++c) {
        double lo = m.at(0, c);
        double hi = m.at(0, c);
        for (std::size_t r = 1; r < m.rows; ++r) {
            const double x = m.at(r, c);
            if (x < lo) lo = x;
            if (x > hi) hi = x;
        }
        mins[c] = lo;
        maxs[c] = hi;
    }
    return {mins, maxs};
}

RealVector row_std(const Matrix& m) {
    RealVector out(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double mean = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) {
            mean += m.at(r, c);
        }
        mean /= static_cast<double>(m.cols);
        double var = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) {
            const double d = m.at(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(m.cols);
        out[r] = std::sqrt(var);
    }
    return out;
}

RealVector softmax(const RealVector& v) {
    double mx = v[0];
    for (double x : v) {
        if (x > mx) mx = x;
    }
    RealVector out(v.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        denom += out[i];
    }
    for (double& x : out) {
        x /= denom;
    }
    return out;
}

std::vector<std::size_t> top_k_indices(const RealVector& scores, std::size_t k) {
    if (k > scores.size()) {
        throw std::invalid_argument("k exceeds candidates");
    }
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace {

// softmax(row std of (chunk normalized by ref's column min/max)), as one
// self-contained pass over a single tensor.
RealVector normalized_std_softmax(const Matrix& chunk, const Matrix& ref, double eps) {
    if (chunk.cols != ref.cols) {
        throw std::invalid_argument("channel count mismatch between chunk and reference");
    }
    if (ref.rows == 0) {
        throw std::invalid_argument("empty reference");
    }
    RealVector lo(ref.cols);
    RealVector hi(ref.cols);
    for (std::size_t c = 0; c < ref.cols; ++c) {
        double mn = ref.at(0, c);
        double mx = ref.at(0, c);
        for (std::size_t r = 1; r < ref.rows; ++r) {
            const double x = ref.at(r, c);
            if (x < mn) mn = x;
            if (x > mx) mx = x;
        }
        lo[c] = mn;
        hi[c] = mx;
    }

    RealVector stds(chunk.rows);
    for (std::size_t t = 0; t < chunk.rows; ++t) {
        double mean = 0.0;
        for (std::size_t c = 0; c < chunk.cols; ++c) {
            double range = hi[c] - lo[c];
            if (range < eps) range = eps;
            mean += (chunk.at(t, c) - lo[c]) / range;
        }
        mean /= static_cast<double>(chunk.cols);
        double var = 0.0;
        for (std::size_t c = 0; c < chunk.cols; ++c) {
            double range = hi[c] - lo[c];
            if (range < eps) range = eps;
            const double d = (chunk.at(t, c) - lo[c]) / range - mean;
            var += d * d;
        }
        var /= static_cast<double>(chunk.cols);
        stds[t] = std::sqrt(var);
    }
    return softmax(stds);
}

}  // namespace

RealVector lag_score(const ChunkPair& chunk, const ChunkPair& ref, double eps) {
    const RealVector k_part = normalized_std_softmax(chunk.K, ref.K, eps);
    const RealVector v_part = normalized_std_softmax(chunk.V, ref.V, eps);
    RealVector total(k_part.size());
    for (std::size_t t = 0; t < total.size(); ++t) {
        total[t] = k_part[t] + v_part[t];
    }
    return total;
}

RealVector local_score(const ChunkPair& chunk, double eps) {
    return reference::lag_score(chunk, chunk, eps);
}

RealVector l2_score(const Matrix& chunk_k) {
    RealVector out(chunk_k.rows);
    for (std::size_t t = 0; t < chunk_k.rows; ++t) {
        double sq = 0.0;
        for (std::size_t c = 0; c < chunk_k.cols; ++c) {
            sq += chunk_k.at(t, c) * chunk_k.at(t, c);
        }
        out[t] = -std::sqrt(sq);
    }
    return out;
}

RealVector attention(const Matrix& k, const Matrix& v, const RealVector& query) {
    if (k.rows == 0) {
        throw std::invalid_argument("empty cache");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(k.cols));
    RealVector logits(k.rows);
    for (std::size_t i = 0; i < k.rows; ++i) {
        double dot = 0.0;
        for (std::size_t c = 0; c < k.cols; ++c) {
            dot += query[c] * k.at(i, c);
        }
        logits[i] = dot * scale;
    }
    const RealVector w = softmax(logits);
    RealVector out(v.cols, 0.0);
    for (std::size_t i = 0; i < v.rows; ++i) {
        for (std::size_t c = 0; c < v.cols; ++c) {
            out[c] += w[i] * v.at(i, c);
        }
    }
    return out;
}

}  // namespace lagkv::reference
