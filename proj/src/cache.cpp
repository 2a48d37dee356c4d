// SPDX-License-Identifier: Apache-2.0

#include "lagkv/cache.hpp"

#include <stdexcept>

namespace lagkv {

void HeadCache::append(const double* k_row, const double* v_row,
                       std::uint32_t position) {
    const std::size_t d = K.cols;
    K.data.insert(K.data.end(), k_row, k_row + d);
    V.data.insert(V.data.end(), v_row, v_row + d);
    ++K.rows;
    ++V.rows;
    positions.push_back(position);
}

void validate_cache(const LayerCache& layer) {
    for (const HeadCache& head : layer.heads) {
        if (head.K.rows != head.V.rows || head.K.rows != head.positions.size()) {
            throw std::invalid_argument("K/V/positions row counts disagree");
        }
        if (head.K.cols != head.V.cols) {
            throw std::invalid_argument("K and V head dims disagree");
        }
        if (head.K.cols != layer.head_dim() || head.size() != layer.seq_len()) {
            throw std::invalid_argument("heads disagree in shape");
        }
        for (std::size_t i = 1; i < head.positions.size(); ++i) {
            if (head.positions[i] <= head.positions[i - 1]) {
                throw std::invalid_argument("positions not strictly increasing");
            }
        }
    }
}

}  // namespace lagkv
