// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lagkv/matrix.hpp"

namespace lagkv {

/// K/V state of one KV head plus the original position of every retained row.
/// Positions stay strictly increasing across every compression step.
struct HeadCache {
    Matrix K;  // seq x d_h
    Matrix V;  // seq x d_h
    std::vector<std::uint32_t> positions;

    std::size_t size() const { return positions.size(); }
    std::size_t head_dim() const { return K.cols; }

    void append(const double* k_row, const double* v_row, std::uint32_t position);

    bool operator==(const HeadCache&) const = default;
};

/// One attention layer's KV heads. After any compression step all heads hold
/// the same number of rows (a uniform k per head), though the retained
/// position sets may differ between heads.
struct LayerCache {
    std::vector<HeadCache> heads;
    std::size_t layer_index = 0;

    std::size_t num_heads() const { return heads.size(); }
    std::size_t seq_len() const { return heads.empty() ? 0 : heads.front().size(); }
    std::size_t head_dim() const { return heads.empty() ? 0 : heads.front().head_dim(); }

    bool operator==(const LayerCache&) const = default;
};

/// Shape/monotonicity sanity check; throws std::invalid_argument on violation.
void validate_cache(const LayerCache& layer);

}  // namespace lagkv
