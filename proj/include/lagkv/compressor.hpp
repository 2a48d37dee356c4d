// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lagkv/cache.hpp"
#include "lagkv/layout.hpp"
#include "lagkv/scoring.hpp"

namespace lagkv {

struct CompressorConfig {
    std::size_t sink_size = 16;   // S
    std::size_t lag_size = 1024;  // L
    double retain_ratio = 0.25;   // r, in (0, 1]
    Strategy strategy = Strategy::Lag;
    double eps = 1e-6;
    std::set<std::size_t> skip_layers;  // layers exempt from compression

    /// Throws std::invalid_argument when L < 1, r outside (0,1], or eps <= 0.
    void validate() const;
};

/// One committed eviction: the partition that was scored and, per head, the
/// exactly floor(r*L) original positions that survived.
struct CompressionEvent {
    std::size_t layer = 0;
    TokenRange partition_range;
    std::vector<std::vector<std::uint32_t>> kept_positions;
};

/// Decode-stage bookkeeping. raw_consumed counts original tokens already
/// folded into the compressed region (S + m*L after m events); raw_total
/// counts every original token seen so far.
struct CompressionState {
    std::size_t raw_consumed = 0;
    std::size_t raw_total = 0;
};

/// Running min/max/mean over every per-token score a compression run produced.
struct ScoreStats {
    std::size_t count = 0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;

    void absorb(const RealVector& scores);
    void merge(const ScoreStats& other);
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

struct LayerMetrics {
    std::size_t layer = 0;
    std::size_t raw_len = 0;
    std::size_t retained_len = 0;
    double achieved_ratio = 0.0;
    std::size_t events = 0;
    std::string strategy;
    ScoreStats scores;
};

struct MetricsReport {
    std::vector<LayerMetrics> layers;

    /// One JSON record per layer, newline-delimited.
    void write_jsonl(std::ostream& os) const;
};

/// Scores the partition chunk [part) of one head against the reference chunk
/// [ref) that immediately follows it, keeps the top floor(r*L) tokens in
/// original order and removes the rest from K, V and positions. Both ranges
/// must be fully resident (throws std::invalid_argument("stale range")
/// otherwise). Returns the kept original positions.
std::vector<std::uint32_t> compress_partition(HeadCache& head, TokenRange part,
                                              TokenRange ref,
                                              const CompressorConfig& cfg,
                                              ScoreStats* stats = nullptr);

/// One-shot compression of a full uncompressed prompt cache: every
/// compressible partition is scored against the raw rows of the partition
/// that follows it, left to right. The sink and the window tail are never
/// touched, so the resulting length equals retained_length(...). Layers in
/// cfg.skip_layers are returned unmodified.
std::vector<CompressionEvent> compress_prefill(LayerCache& layer,
                                               const CompressorConfig& cfg,
                                               ScoreStats* stats = nullptr);

/// State for continuing with step_decode after a prefill (compressed or not)
/// of original length raw_total.
CompressionState state_after_prefill(std::size_t raw_total,
                                     const CompressorConfig& cfg);

/// Appends one token (per-head K and V rows of length d_h) and compresses the
/// oldest pending partition once enough lookahead has accumulated. The
/// trigger fires when raw_total - raw_consumed >= 2L, except that no event
/// ever fires while raw_total <= S + 2L: sequences at or below that length
/// are kept whole, which makes the decode path reproduce one-shot prefill
/// compression exactly at every prefix length. At most one event per step.
std::optional<CompressionEvent> step_decode(CompressionState& state,
                                            LayerCache& layer,
                                            const std::vector<RealVector>& new_k,
                                            const std::vector<RealVector>& new_v,
                                            const CompressorConfig& cfg,
                                            ScoreStats* stats = nullptr);

enum class CompressionMode {
    OneShot,      // compress_prefill over the whole cache
    Incremental,  // keep the first S+2L-1 tokens, then replay the rest through step_decode
};

/// Applies the selected mode to every layer (layers are independent and run
/// in parallel) and reports per-layer retention metrics. Kept-position sets
/// are identical between the two modes.
std::pair<std::vector<LayerCache>, MetricsReport> run_compression(
    std::vector<LayerCache> caches, const CompressorConfig& cfg,
    CompressionMode mode);

}  // namespace lagkv
