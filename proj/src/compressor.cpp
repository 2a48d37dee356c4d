// SPDX-License-Identifier: Apache-2.0

#include "lagkv/compressor.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "lagkv/kernels.hpp"

namespace lagkv {

void CompressorConfig::validate() const {
    if (lag_size < 1) {
        throw std::invalid_argument("lag size must be >= 1");
    }
    if (!(retain_ratio > 0.0) || retain_ratio > 1.0) {
        throw std::invalid_argument("retain ratio must be in (0, 1]");
    }
    if (!(eps > 0.0)) {
        throw std::invalid_argument("eps must be positive");
    }
}

void ScoreStats::absorb(const RealVector& scores) {
    for (double s : scores) {
        min = std::min(min, s);
        max = std::max(max, s);
        sum += s;
    }
    count += scores.size();
}

void ScoreStats::merge(const ScoreStats& other) {
    min = std::min(min, other.min);
    max = std::max(max, other.max);
    sum += other.sum;
    count += other.count;
}

void MetricsReport::write_jsonl(std::ostream& os) const {
    for (const LayerMetrics& lm : layers) {
        nlohmann::ordered_json j{
            {"layer", lm.layer},
            {"raw_len", lm.raw_len},
            {"retained_len", lm.retained_len},
            {"achieved_ratio", lm.achieved_ratio},
            {"events", lm.events},
            {"strategy", lm.strategy},
        };
        if (lm.scores.count > 0) {
            j["score_min"] = lm.scores.min;
            j["score_max"] = lm.scores.max;
            j["score_mean"] = lm.scores.mean();
        }
        os << j.dump() << "\n";
    }
}

namespace {

// Row span [first, first+width) whose positions equal the token range exactly.
// Positions are strictly increasing, so matching endpoints and count implies
// the whole range is resident.
std::pair<std::size_t, std::size_t> resident_rows(
    const std::vector<std::uint32_t>& positions, TokenRange range) {
    const auto it = std::lower_bound(positions.begin(), positions.end(),
                                     static_cast<std::uint32_t>(range.begin));
    const auto first = static_cast<std::size_t>(it - positions.begin());
    const std::size_t width = range.width();
    if (width == 0 || first + width > positions.size() ||
        positions[first] != range.begin ||
        positions[first + width - 1] != range.end - 1) {
        throw std::invalid_argument("stale range");
    }
    return {first, first + width};
}

Matrix extract_rows(const Matrix& m, std::size_t row_begin, std::size_t row_end) {
    Matrix out(row_end - row_begin, m.cols);
    std::copy(m.row(row_begin), m.row(row_begin) + out.rows * m.cols,
              out.data.begin());
    return out;
}

// Compacts the head in place: inside [row_begin, row_end) only the rows named
// by kept_local (ascending, relative to row_begin) survive; everything after
// row_end shifts down.
void commit_partition(HeadCache& head, std::size_t row_begin, std::size_t row_end,
                      const std::vector<std::size_t>& kept_local) {
    const std::size_t d = head.K.cols;
    std::size_t write = row_begin;
    auto move_row = [&](std::size_t src) {
        if (src != write) {
            std::memmove(head.K.row(write), head.K.row(src), d * sizeof(double));
            std::memmove(head.V.row(write), head.V.row(src), d * sizeof(double));
            head.positions[write] = head.positions[src];
        }
        ++write;
    };
    for (std::size_t j : kept_local) {
        move_row(row_begin + j);
    }
    for (std::size_t src = row_end; src < head.positions.size(); ++src) {
        move_row(src);
    }
    head.positions.resize(write);
    head.K.rows = write;
    head.V.rows = write;
    head.K.data.resize(write * d);
    head.V.data.resize(write * d);
}

ScoreVector score_partition_chunk(Strategy strategy, const ChunkPair& chunk,
                                  const ChunkPair& ref, double eps) {
    switch (strategy) {
        case Strategy::Lag: return lag_score(chunk, ref, eps);
        case Strategy::Local: return local_score(chunk, eps);
        case Strategy::L2Norm: return l2_score(chunk.K);
        case Strategy::WindowOnly: return recency_score(chunk.K.rows);
    }
    throw std::logic_error("unreachable strategy");
}

void assert_full_prefill_cache(const LayerCache& layer) {
    for (const HeadCache& head : layer.heads) {
        if (!head.positions.empty() &&
            (head.positions.front() != 0 ||
             head.positions.back() != head.positions.size() - 1)) {
            throw std::invalid_argument(
                "prefill compression requires a full cache with contiguous positions");
        }
    }
}

}  // namespace

std::vector<std::uint32_t> compress_partition(HeadCache& head, TokenRange part,
                                              TokenRange ref,
                                              const CompressorConfig& cfg,
                                              ScoreStats* stats) {
    const auto [part_begin, part_end] = resident_rows(head.positions, part);
    const auto [ref_begin, ref_end] = resident_rows(head.positions, ref);

    ChunkPair chunk{extract_rows(head.K, part_begin, part_end),
                    extract_rows(head.V, part_begin, part_end)};
    ChunkPair reference{extract_rows(head.K, ref_begin, ref_end),
                        extract_rows(head.V, ref_begin, ref_end)};

    const ScoreVector sv =
        score_partition_chunk(cfg.strategy, chunk, reference, cfg.eps);
    if (stats) {
        stats->absorb(sv.scores);
    }

    const std::size_t k = kept_per_partition(cfg.retain_ratio, cfg.lag_size);
    const std::vector<std::size_t> kept_local = top_k_indices(sv.scores, k);

    std::vector<std::uint32_t> kept;
    kept.reserve(kept_local.size());
    for (std::size_t j : kept_local) {
        kept.push_back(head.positions[part_begin + j]);
    }
    commit_partition(head, part_begin, part_end, kept_local);
    return kept;
}

namespace {

CompressionEvent run_partition_event(LayerCache& layer, TokenRange part,
                                     TokenRange ref, const CompressorConfig& cfg,
                                     ScoreStats* stats) {
    CompressionEvent ev;
    ev.layer = layer.layer_index;
    ev.partition_range = part;
    ev.kept_positions.resize(layer.heads.size());
    std::vector<ScoreStats> head_stats(layer.heads.size());
    const auto n_heads = static_cast<std::ptrdiff_t>(layer.heads.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t h = 0; h < n_heads; ++h) {
        ev.kept_positions[h] =
            compress_partition(layer.heads[h], part, ref, cfg, &head_stats[h]);
    }
    if (stats) {
        for (const ScoreStats& hs : head_stats) {
            stats->merge(hs);
        }
    }
    return ev;
}

}  // namespace

std::vector<CompressionEvent> compress_prefill(LayerCache& layer,
                                               const CompressorConfig& cfg,
                                               ScoreStats* stats) {
    cfg.validate();
    if (layer.heads.empty() || cfg.skip_layers.count(layer.layer_index)) {
        return {};
    }
    assert_full_prefill_cache(layer);
    const PartitionLayout layout =
        partition_layout(layer.seq_len(), cfg.sink_size, cfg.lag_size);
    std::vector<CompressionEvent> events;
    events.reserve(layout.partitions.size());
    for (const TokenRange& part : layout.partitions) {
        // References are raw by construction: eviction in a partition only
        // removes rows of that partition, and we sweep left to right.
        const TokenRange ref{part.end, part.end + cfg.lag_size};
        events.push_back(run_partition_event(layer, part, ref, cfg, stats));
    }
    return events;
}

CompressionState state_after_prefill(std::size_t raw_total,
                                     const CompressorConfig& cfg) {
    const PartitionLayout layout =
        partition_layout(raw_total, cfg.sink_size, cfg.lag_size);
    return CompressionState{
        cfg.sink_size + layout.partitions.size() * cfg.lag_size, raw_total};
}

std::optional<CompressionEvent> step_decode(CompressionState& state,
                                            LayerCache& layer,
                                            const std::vector<RealVector>& new_k,
                                            const std::vector<RealVector>& new_v,
                                            const CompressorConfig& cfg,
                                            ScoreStats* stats) {
    if (new_k.size() != layer.heads.size() || new_v.size() != layer.heads.size()) {
        throw std::invalid_argument("per-head row count mismatch");
    }
    const auto pos = static_cast<std::uint32_t>(state.raw_total);
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
        layer.heads[h].append(new_k[h].data(), new_v[h].data(), pos);
    }
    ++state.raw_total;

    if (cfg.skip_layers.count(layer.layer_index)) {
        return std::nullopt;
    }
    const std::size_t lookahead = 2 * cfg.lag_size;
    // Sequences no longer than S + 2L are kept whole, matching the one-shot
    // zero-compression regime at every prefix length.
    if (state.raw_total < state.raw_consumed + lookahead ||
        state.raw_total <= cfg.sink_size + lookahead) {
        return std::nullopt;
    }
    const TokenRange part{state.raw_consumed, state.raw_consumed + cfg.lag_size};
    const TokenRange ref{part.end, part.end + cfg.lag_size};
    CompressionEvent ev = run_partition_event(layer, part, ref, cfg, stats);
    state.raw_consumed += cfg.lag_size;
    return ev;
}

namespace {

std::vector<CompressionEvent> replay_incremental(LayerCache& layer,
                                                 const CompressorConfig& cfg,
                                                 ScoreStats* stats) {
    if (layer.heads.empty() || cfg.skip_layers.count(layer.layer_index)) {
        return {};
    }
    assert_full_prefill_cache(layer);
    const std::size_t n = layer.seq_len();
    const std::size_t prefix =
        std::min(n, cfg.sink_size + 2 * cfg.lag_size - 1);

    LayerCache replay;
    replay.layer_index = layer.layer_index;
    replay.heads.resize(layer.heads.size());
    const std::size_t d = layer.head_dim();
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
        replay.heads[h].K = extract_rows(layer.heads[h].K, 0, prefix);
        replay.heads[h].V = extract_rows(layer.heads[h].V, 0, prefix);
        replay.heads[h].positions.assign(layer.heads[h].positions.begin(),
                                         layer.heads[h].positions.begin() +
                                             static_cast<std::ptrdiff_t>(prefix));
    }

    CompressionState state = state_after_prefill(prefix, cfg);
    std::vector<CompressionEvent> events;
    std::vector<RealVector> k_rows(layer.heads.size(), RealVector(d));
    std::vector<RealVector> v_rows(layer.heads.size(), RealVector(d));
    for (std::size_t t = prefix; t < n; ++t) {
        for (std::size_t h = 0; h < layer.heads.size(); ++h) {
            const double* ks = layer.heads[h].K.row(t);
            const double* vs = layer.heads[h].V.row(t);
            std::copy(ks, ks + d, k_rows[h].begin());
            std::copy(vs, vs + d, v_rows[h].begin());
        }
        auto ev = step_decode(state, replay, k_rows, v_rows, cfg, stats);
        if (ev) {
            events.push_back(std::move(*ev));
        }
    }
    layer = std::move(replay);
    return events;
}

}  // namespace

std::pair<std::vector<LayerCache>, MetricsReport> run_compression(
    std::vector<LayerCache> caches, const CompressorConfig& cfg,
    CompressionMode mode) {
    cfg.validate();
    MetricsReport report;
    report.layers.resize(caches.size());
    const auto n_layers = static_cast<std::ptrdiff_t>(caches.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n_layers; ++i) {
        LayerCache& layer = caches[i];
        LayerMetrics& lm = report.layers[i];
        lm.layer = layer.layer_index;
        lm.raw_len = layer.seq_len();
        lm.strategy = std::string(to_string(cfg.strategy));
        std::vector<CompressionEvent> events =
            mode == CompressionMode::OneShot
                ? compress_prefill(layer, cfg, &lm.scores)
                : replay_incremental(layer, cfg, &lm.scores);
        lm.events = events.size();
        lm.retained_len = layer.seq_len();
        lm.achieved_ratio =
            lm.raw_len == 0
                ? 0.0
                : 1.0 - static_cast<double>(lm.retained_len) /
                            static_cast<double>(lm.raw_len);
    }
    return {std::move(caches), std::move(report)};
}

}  // namespace lagkv
