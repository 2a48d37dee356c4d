// SPDX-License-Identifier: Apache-2.0

#include "lagkv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>

namespace lagkv {

namespace {

// Element count below which spawning a team costs more than it saves.
constexpr std::size_t kParallelGrain = 1 << 14;

}  // namespace

std::pair<RealVector, RealVector> column_min_max(const Matrix& m) {
    if (m.rows == 0) {
        throw std::invalid_argument("empty reference");
    }
    RealVector mins(m.cols);
    RealVector maxs(m.cols);
    const auto cols = static_cast<std::ptrdiff_t>(m.cols);
#pragma omp parallel for schedule(static) if (m.rows * m.cols >= kParallelGrain)
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
        double lo = m.at(0, c);
        double hi = lo;
        for (std::size_t r = 1; r < m.rows; ++r) {
            const double x = m.at(r, c);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        mins[c] = lo;
        maxs[c] = hi;
    }
    return {std::move(mins), std::move(maxs)};
}

RealVector row_std(const Matrix& m) {
    if (m.cols == 0) {
        throw std::invalid_argument("matrix has no channels");
    }
    RealVector out(m.rows);
    const auto rows = static_cast<std::ptrdiff_t>(m.rows);
    const double inv_cols = 1.0 / static_cast<double>(m.cols);
#pragma omp parallel for schedule(static) if (m.rows * m.cols >= kParallelGrain)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const double* row = m.row(r);
        double mean = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) {
            mean += row[c];
        }
        mean *= inv_cols;
        double var = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) {
            const double d = row[c] - mean;
            var += d * d;
        }
        out[r] = std::sqrt(var * inv_cols);
    }
    return out;
}

RealVector softmax(const RealVector& v) {
    if (v.empty()) {
        throw std::invalid_argument("softmax of empty vector");
    }
    const double mx = *std::max_element(v.begin(), v.end());
    RealVector out(v.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        denom += out[i];
    }
    const double inv = 1.0 / denom;
    for (double& x : out) {
        x *= inv;
    }
    return out;
}

std::vector<std::size_t> top_k_indices(const RealVector& scores, std::size_t k) {
    if (k > scores.size()) {
        throw std::invalid_argument("k exceeds candidates");
    }
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto better = [&scores](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;  // ties keep the older token
    };
    if (k < idx.size()) {
        std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                         idx.end(), better);
        idx.resize(k);
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace lagkv
