// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace lagkv {

/// Half-open range [begin, end) of original token positions.
struct TokenRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t width() const { return end - begin; }
    bool empty() const { return begin == end; }
    bool contains(std::size_t p) const { return p >= begin && p < end; }
    bool operator==(const TokenRange&) const = default;
};

/// Decomposition of a sequence of length seq_len into
///   sink        -- the first min(S, seq_len) positions, never evicted
///   partitions  -- compressible chunks of width exactly L
///   window_tail -- the last full partition plus the modulo remainder,
///                  never evicted
///
/// For seq_len <= S + 2L there are no compressible partitions and the whole
/// tail forms the window. Otherwise the region after the sink splits into
/// floor((seq_len - S) / L) full partitions; all but the last are
/// compressible and the last one plus the remainder becomes the window.
struct PartitionLayout {
    TokenRange sink;
    std::vector<TokenRange> partitions;
    TokenRange window_tail;
};

PartitionLayout partition_layout(std::size_t seq_len, std::size_t sink_size,
                                 std::size_t lag_size);

/// Tokens kept per compressed partition: floor(r * L).
std::size_t kept_per_partition(double retain_ratio, std::size_t lag_size);

/// Closed-form cache length after compression:
///   seq_len <= S + 2L          -> seq_len (nothing evicted)
///   otherwise                  -> S + floor(r*L)*(n-1) + L + (seq_len-S) mod L
/// where n = floor((seq_len - S) / L).
std::size_t retained_length(std::size_t seq_len, std::size_t sink_size,
                            std::size_t lag_size, double retain_ratio);

/// 1 - retained_length / seq_len, in [0, 1). Throws
/// std::invalid_argument("empty sequence") when seq_len == 0.
double compression_ratio(std::size_t seq_len, std::size_t sink_size,
                         std::size_t lag_size, double retain_ratio);

}  // namespace lagkv
