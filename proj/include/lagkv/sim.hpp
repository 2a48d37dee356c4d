// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "lagkv/cache.hpp"
#include "lagkv/compressor.hpp"
#include "lagkv/matrix.hpp"

namespace lagkv {

struct OutlierSpec {
    std::size_t position = 0;
    double magnitude = 1.0;  // multiplier on the noise term at this position
};

/// Synthetic KV stream: per head and per tensor an AR(1) gaussian process
/// row[t+1] = rho*row[t] + sqrt(1-rho^2)*noise, scaled per channel. Nearby
/// rows are similar for rho near 1, which is the regime lag-referenced
/// scoring assumes.
struct StreamSpec {
    std::uint64_t seed = 1;
    std::size_t n_tokens = 4096;
    std::size_t d_h = 64;
    std::size_t h_kv = 2;
    double rho = 0.9;                     // token-locality correlation, [0, 1)
    RealVector channel_scales;            // empty = all ones; must be > 0
    std::vector<OutlierSpec> outliers;
};

struct FidelityReport {
    RealVector cosines;     // one entry per (query, head)
    RealVector deviations;  // max-abs deviation per (query, head)
    double cosine_mean = 1.0;
    double cosine_min = 1.0;
    double max_abs_deviation = 0.0;
    double retained_fraction = 1.0;
};

/// Deterministic standard normals from a fixed 64-bit seed (mt19937_64 +
/// Box-Muller, no implementation-defined distributions).
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}
    double operator()();

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives independent sub-seeds (head index, tensor tag, query index...).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// Generates one layer (layer_index 0) of per-head K/V matrices with
/// positions 0..n_tokens-1. Bit-identical for identical specs.
LayerCache gen_stream(const StreamSpec& spec);

/// softmax(q . K^T / sqrt(d_h)) . V over the retained rows. Throws
/// std::invalid_argument("empty cache") when the cache has no rows.
RealVector toy_attention(const HeadCache& cache, const RealVector& query);

/// Compresses a generated stream one-shot and compares attention outputs of
/// the full vs. compressed cache over seeded random queries.
FidelityReport fidelity_eval(const StreamSpec& spec, const CompressorConfig& cfg,
                             std::size_t n_queries);

/// Fraction of injected outlier (position, head) pairs still present in the
/// compressed cache.
double outlier_retention_rate(const StreamSpec& spec, const CompressorConfig& cfg);

}  // namespace lagkv
