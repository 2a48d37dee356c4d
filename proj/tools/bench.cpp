// SPDX-License-Identifier: Apache-2.0
//
// Compares the OpenMP compression path against the serial reference loops.
// Usage: lagkv-bench [layers heads tokens d_h L reps]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lagkv/compressor.hpp"
#include "lagkv/reference.hpp"
#include "lagkv/sim.hpp"

using namespace lagkv;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(
               clock::now().time_since_epoch())
        .count();
}

template <typename Fn>
double time_ms(std::size_t reps, Fn&& fn) {
    const double t0 = now_ms();
    for (std::size_t i = 0; i < reps; ++i) {
        fn();
    }
    return (now_ms() - t0) / static_cast<double>(reps);
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t layers = 8;
    std::size_t heads = 4;
    std::size_t tokens = 16384;
    std::size_t d_h = 64;
    std::size_t lag = 1024;
    std::size_t reps = 3;
    if (argc > 1) layers = std::strtoull(argv[1], nullptr, 10);
    if (argc > 2) heads = std::strtoull(argv[2], nullptr, 10);
    if (argc > 3) tokens = std::strtoull(argv[3], nullptr, 10);
    if (argc > 4) d_h = std::strtoull(argv[4], nullptr, 10);
    if (argc > 5) lag = std::strtoull(argv[5], nullptr, 10);
    if (argc > 6) reps = std::strtoull(argv[6], nullptr, 10);

    const int threads = max_threads();
    std::printf("threads available: %d\n", threads);
    std::printf("%-34s %12s %12s %9s\n", "benchmark", "serial (ms)",
                "parallel(ms)", "speedup");

    // 1. scoring kernel on one partition-sized chunk
    {
        StreamSpec spec;
        spec.seed = 5;
        spec.n_tokens = 2 * lag;
        spec.d_h = 128;
        spec.h_kv = 1;
        const LayerCache stream = gen_stream(spec);
        const auto& head = stream.heads[0];
        auto slice = [&](const Matrix& m, std::size_t begin, std::size_t end) {
            Matrix out(end - begin, m.cols);
            std::copy(m.row(begin), m.row(begin) + out.rows * m.cols,
                      out.data.begin());
            return out;
        };
        const ChunkPair chunk{slice(head.K, 0, lag), slice(head.V, 0, lag)};
        const ChunkPair ref{slice(head.K, lag, 2 * lag),
                            slice(head.V, lag, 2 * lag)};

        RealVector serial_scores;
        const double serial_ms = time_ms(reps * 10, [&] {
            serial_scores = reference::lag_score(chunk, ref, 1e-6);
        });
        ScoreVector parallel_scores;
        const double parallel_ms = time_ms(reps * 10, [&] {
            parallel_scores = lag_score(chunk, ref, 1e-6);
        });
        double max_diff = 0.0;
        for (std::size_t t = 0; t < serial_scores.size(); ++t) {
            max_diff = std::max(max_diff, std::abs(serial_scores[t] -
                                                   parallel_scores.scores[t]));
        }
        if (max_diff > 1e-9) {
            std::fprintf(stderr, "score mismatch: %g\n", max_diff);
            return 1;
        }
        char label[64];
        std::snprintf(label, sizeof(label), "lag_score %zux128", lag);
        std::printf("%-34s %12.3f %12.3f %8.2fx\n", label, serial_ms,
                    parallel_ms, serial_ms / parallel_ms);
    }

    // 2. whole-cache one-shot compression, 1 thread vs all
    {
        StreamSpec spec;
        spec.n_tokens = tokens;
        spec.d_h = d_h;
        spec.h_kv = heads;
        std::vector<LayerCache> caches;
        for (std::size_t li = 0; li < layers; ++li) {
            spec.seed = 100 + li;
            caches.push_back(gen_stream(spec));
            caches.back().layer_index = li;
        }
        CompressorConfig cfg;
        cfg.sink_size = 16;
        cfg.lag_size = lag;
        cfg.retain_ratio = 0.25;

        set_threads(1);
        std::vector<LayerCache> serial_result;
        const double serial_ms = time_ms(reps, [&] {
            serial_result =
                run_compression(caches, cfg, CompressionMode::OneShot).first;
        });
        set_threads(threads);
        std::vector<LayerCache> parallel_result;
        const double parallel_ms = time_ms(reps, [&] {
            parallel_result =
                run_compression(caches, cfg, CompressionMode::OneShot).first;
        });
        if (!(serial_result == parallel_result)) {
            std::fprintf(stderr, "thread-count dependent result\n");
            return 1;
        }
        char label[64];
        std::snprintf(label, sizeof(label), "compress %zuL x %zuh x %zutok",
                      layers, heads, tokens);
        std::printf("%-34s %12.3f %12.3f %8.2fx\n", label, serial_ms,
                    parallel_ms, serial_ms / parallel_ms);
    }

    return 0;
}
