// SPDX-License-Identifier: Apache-2.0

#include "lagkv/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "lagkv/kernels.hpp"

namespace lagkv {

double GaussianSource::operator()() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Uniforms built directly from the engine's 64-bit output keep the stream
    // independent of library distribution internals.
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0,1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

Matrix gen_ar1(std::uint64_t seed, const StreamSpec& spec,
               const std::unordered_map<std::size_t, double>& outlier_at) {
    GaussianSource noise(seed);
    Matrix m(spec.n_tokens, spec.d_h);
    RealVector state(spec.d_h, 0.0);
    const double carry = std::sqrt(1.0 - spec.rho * spec.rho);
    for (std::size_t t = 0; t < spec.n_tokens; ++t) {
        const auto hit = outlier_at.find(t);
        const double mag = hit == outlier_at.end() ? 1.0 : hit->second;
        for (std::size_t c = 0; c < spec.d_h; ++c) {
            const double eps = mag * noise();
            state[c] = t == 0 ? eps : spec.rho * state[c] + carry * eps;
            const double scale =
                spec.channel_scales.empty() ? 1.0 : spec.channel_scales[c];
            m.at(t, c) = state[c] * scale;
        }
    }
    return m;
}

}  // namespace

LayerCache gen_stream(const StreamSpec& spec) {
    if (spec.rho < 0.0 || spec.rho >= 1.0) {
        throw std::invalid_argument("rho must be in [0, 1)");
    }
    if (spec.d_h == 0 || spec.h_kv == 0) {
        throw std::invalid_argument("d_h and h_kv must be positive");
    }
    if (!spec.channel_scales.empty()) {
        if (spec.channel_scales.size() != spec.d_h) {
            throw std::invalid_argument("channel_scales length must equal d_h");
        }
        for (double s : spec.channel_scales) {
            if (!(s > 0.0)) {
                throw std::invalid_argument("channel_scales must be positive");
            }
        }
    }
    std::unordered_map<std::size_t, double> outlier_at;
    for (const OutlierSpec& o : spec.outliers) {
        outlier_at[o.position] = o.magnitude;
    }

    LayerCache layer;
    layer.layer_index = 0;
    layer.heads.resize(spec.h_kv);
    const auto n_heads = static_cast<std::ptrdiff_t>(spec.h_kv);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t h = 0; h < n_heads; ++h) {
        HeadCache& head = layer.heads[h];
        head.K = gen_ar1(mix_seed(spec.seed, 2 * static_cast<std::uint64_t>(h)),
                         spec, outlier_at);
        head.V = gen_ar1(mix_seed(spec.seed, 2 * static_cast<std::uint64_t>(h) + 1),
                         spec, outlier_at);
        head.positions.resize(spec.n_tokens);
        std::iota(head.positions.begin(), head.positions.end(), std::uint32_t{0});
    }
    return layer;
}

RealVector toy_attention(const HeadCache& cache, const RealVector& query) {
    if (cache.size() == 0) {
        throw std::invalid_argument("empty cache");
    }
    if (query.size() != cache.head_dim()) {
        throw std::invalid_argument("query length must equal d_h");
    }
    const std::size_t d = cache.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    RealVector logits(cache.size());
    for (std::size_t i = 0; i < cache.size(); ++i) {
        const double* row = cache.K.row(i);
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            dot += query[c] * row[c];
        }
        logits[i] = dot * scale;
    }
    const RealVector w = softmax(logits);
    RealVector out(d, 0.0);
    for (std::size_t i = 0; i < cache.size(); ++i) {
        const double* row = cache.V.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            out[c] += w[i] * row[c];
        }
    }
    return out;
}

namespace {

double cosine(const RealVector& a, const RealVector& b) {
    double dot = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    const double denom = std::sqrt(aa * bb);
    if (denom == 0.0) {
        return aa == bb ? 1.0 : 0.0;
    }
    return dot / denom;
}

double max_abs_diff(const RealVector& a, const RealVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

constexpr std::uint64_t kQuerySalt = 0x71u;

}  // namespace

FidelityReport fidelity_eval(const StreamSpec& spec, const CompressorConfig& cfg,
                             std::size_t n_queries) {
    const LayerCache full = gen_stream(spec);
    auto [compressed, metrics] =
        run_compression({full}, cfg, CompressionMode::OneShot);
    const LayerCache& comp = compressed.front();

    FidelityReport report;
    report.retained_fraction =
        static_cast<double>(comp.seq_len()) / static_cast<double>(full.seq_len());
    report.cosines.resize(n_queries * full.num_heads());
    report.deviations.resize(n_queries * full.num_heads());

    const auto nq = static_cast<std::ptrdiff_t>(n_queries);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t q = 0; q < nq; ++q) {
        GaussianSource qsrc(mix_seed(spec.seed, kQuerySalt + static_cast<std::uint64_t>(q)));
        RealVector query(spec.d_h);
        for (double& x : query) {
            x = qsrc();
        }
        for (std::size_t h = 0; h < full.num_heads(); ++h) {
            const RealVector a = toy_attention(full.heads[h], query);
            const RealVector b = toy_attention(comp.heads[h], query);
            const std::size_t slot = static_cast<std::size_t>(q) * full.num_heads() + h;
            report.cosines[slot] = cosine(a, b);
            report.deviations[slot] = max_abs_diff(a, b);
        }
    }

    report.cosine_mean = report.cosines.empty()
                             ? 1.0
                             : std::accumulate(report.cosines.begin(),
                                               report.cosines.end(), 0.0) /
                                   static_cast<double>(report.cosines.size());
    report.cosine_min = report.cosines.empty()
                            ? 1.0
                            : *std::min_element(report.cosines.begin(),
                                                report.cosines.end());
    report.max_abs_deviation = report.deviations.empty()
                                   ? 0.0
                                   : *std::max_element(report.deviations.begin(),
                                                       report.deviations.end());
    return report;
}

double outlier_retention_rate(const StreamSpec& spec, const CompressorConfig& cfg) {
    if (spec.outliers.empty()) {
        throw std::invalid_argument("no outliers to track");
    }
    auto [compressed, metrics] =
        run_compression({gen_stream(spec)}, cfg, CompressionMode::OneShot);
    const LayerCache& comp = compressed.front();

    std::size_t hits = 0;
    for (const OutlierSpec& o : spec.outliers) {
        for (const HeadCache& head : comp.heads) {
            hits += std::binary_search(head.positions.begin(), head.positions.end(),
                                       static_cast<std::uint32_t>(o.position))
                        ? 1
                        : 0;
        }
    }
    return static_cast<double>(hits) /
           static_cast<double>(spec.outliers.size() * comp.num_heads());
}

}  // namespace lagkv
