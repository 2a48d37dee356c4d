// SPDX-License-Identifier: Apache-2.0

#include "lagkv/layout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lagkv {

PartitionLayout partition_layout(std::size_t seq_len, std::size_t sink_size,
                                 std::size_t lag_size) {
    if (lag_size == 0) {
        throw std::invalid_argument("lag size must be positive");
    }
    PartitionLayout out;
    const std::size_t sink_end = std::min(sink_size, seq_len);
    out.sink = {0, sink_end};
    if (seq_len <= sink_size + 2 * lag_size) {
        out.window_tail = {sink_end, seq_len};
        return out;
    }
    const std::size_t full = (seq_len - sink_size) / lag_size;  // >= 2 here
    const std::size_t compressible = full - 1;
    out.partitions.reserve(compressible);
    for (std::size_t p = 0; p < compressible; ++p) {
        const std::size_t begin = sink_size + p * lag_size;
        out.partitions.push_back({begin, begin + lag_size});
    }
    out.window_tail = {sink_size + compressible * lag_size, seq_len};
    return out;
}

std::size_t kept_per_partition(double retain_ratio, std::size_t lag_size) {
    return static_cast<std::size_t>(
        std::floor(retain_ratio * static_cast<double>(lag_size)));
}

std::size_t retained_length(std::size_t seq_len, std::size_t sink_size,
                            std::size_t lag_size, double retain_ratio) {
    if (seq_len <= sink_size + 2 * lag_size) {
        return seq_len;
    }
    const std::size_t full = (seq_len - sink_size) / lag_size;
    const std::size_t remainder = (seq_len - sink_size) % lag_size;
    const std::size_t kept = kept_per_partition(retain_ratio, lag_size);
    return sink_size + kept * (full - 1) + lag_size + remainder;
}

double compression_ratio(std::size_t seq_len, std::size_t sink_size,
                         std::size_t lag_size, double retain_ratio) {
    if (seq_len == 0) {
        throw std::invalid_argument("empty sequence");
    }
    const std::size_t retained =
        retained_length(seq_len, sink_size, lag_size, retain_ratio);
    return 1.0 - static_cast<double>(retained) / static_cast<double>(seq_len);
}

}  // namespace lagkv
