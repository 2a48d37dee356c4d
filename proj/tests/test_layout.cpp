// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <stdexcept>

#include "doctest.h"

#include "lagkv/layout.hpp"

using namespace lagkv;

TEST_CASE("partition_layout of the 4112-token fixture") {
    const PartitionLayout layout = partition_layout(4112, 16, 1024);
    CHECK(layout.sink == TokenRange{0, 16});
    REQUIRE(layout.partitions.size() == 3);
    CHECK(layout.partitions[0] == TokenRange{16, 1040});
    CHECK(layout.partitions[1] == TokenRange{1040, 2064});
    CHECK(layout.partitions[2] == TokenRange{2064, 3088});
    CHECK(layout.window_tail == TokenRange{3088, 4112});
}

TEST_CASE("partition_layout keeps everything at the S+2L boundary") {
    const PartitionLayout layout = partition_layout(2064, 16, 1024);
    CHECK(layout.partitions.empty());
    CHECK(layout.sink == TokenRange{0, 16});
    CHECK(layout.window_tail == TokenRange{16, 2064});
}

TEST_CASE("partition_layout with a prompt shorter than the sink") {
    const PartitionLayout layout = partition_layout(10, 16, 1024);
    CHECK(layout.sink == TokenRange{0, 10});
    CHECK(layout.partitions.empty());
    CHECK(layout.window_tail.empty());
}

TEST_CASE("partition_layout ranges are exhaustive and disjoint") {
    std::mt19937 rng(99);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t S = rng() % 64;
        const std::size_t L = 1 + rng() % 300;
        const std::size_t n = rng() % 5000;
        const PartitionLayout layout = partition_layout(n, S, L);

        std::size_t cursor = 0;
        CHECK(layout.sink.begin == 0);
        cursor = layout.sink.end;
        for (const TokenRange& part : layout.partitions) {
            CHECK(part.begin == cursor);
            CHECK(part.width() == L);
            cursor = part.end;
        }
        CHECK(layout.window_tail.begin == cursor);
        CHECK(layout.window_tail.end == n);

        if (n > S + 2 * L) {
            CHECK(layout.window_tail.width() == L + (n - S) % L);
            CHECK(layout.partitions.size() == (n - S) / L - 1);
        } else {
            CHECK(layout.partitions.empty());
        }
    }
}

TEST_CASE("retained_length fixtures") {
    CHECK(retained_length(4112, 16, 1024, 0.25) == 1808);
    CHECK(retained_length(2064, 16, 1024, 0.25) == 2064);
    // 100 compressible partitions: 16 + 128*100 + 1024 + 0
    CHECK(retained_length(16 + 1024 * 101, 16, 1024, 0.125) == 13840);
}

TEST_CASE("retained_length with r=1 keeps the whole sequence") {
    std::mt19937 rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t S = rng() % 64;
        const std::size_t L = 1 + rng() % 400;
        const std::size_t n = rng() % 9000;
        CHECK(retained_length(n, S, L, 1.0) == n);
        CHECK(retained_length(n, S, L, 0.25) <= n);
    }
}

TEST_CASE("compression_ratio fixtures") {
    CHECK(compression_ratio(4112, 16, 1024, 0.25) ==
          doctest::Approx(1.0 - 1808.0 / 4112.0).epsilon(1e-12));
    CHECK(compression_ratio(2064, 16, 1024, 0.5) == 0.0);
    CHECK(compression_ratio(2064, 16, 1024, 0.125) == 0.0);
    CHECK(compression_ratio(100, 16, 1024, 0.5) == 0.0);
    CHECK(compression_ratio(16 + 1024 * 101, 16, 1024, 0.125) ==
          doctest::Approx(1.0 - 13840.0 / 103440.0).epsilon(1e-12));
    CHECK_THROWS_WITH_AS(compression_ratio(0, 16, 1024, 0.5), "empty sequence",
                         std::invalid_argument);
}

TEST_CASE("compression_ratio is monotone in r and seq_len") {
    const double ratios[] = {0.125, 0.167, 0.25, 0.5, 1.0};
    double prev = 1.0;
    for (double r : ratios) {
        const double c = compression_ratio(4112, 16, 1024, r);
        CHECK(c <= prev);
        prev = c;
    }
    // same remainder class: adding whole partitions never lowers the ratio
    double prev_c = 0.0;
    for (std::size_t full = 3; full < 40; ++full) {
        const double c = compression_ratio(16 + full * 1024, 16, 1024, 0.25);
        CHECK(c >= prev_c);
        prev_c = c;
    }
}

TEST_CASE("kept_per_partition floors r*L") {
    CHECK(kept_per_partition(0.25, 1024) == 256);
    CHECK(kept_per_partition(0.167, 1024) == 171);
    CHECK(kept_per_partition(0.125, 1024) == 128);
    CHECK(kept_per_partition(0.5, 1024) == 512);
    CHECK(kept_per_partition(1.0, 7) == 7);
    CHECK(kept_per_partition(0.5, 7) == 3);
}
