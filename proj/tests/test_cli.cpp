// SPDX-License-Identifier: Apache-2.0

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "lagkv/kvd_io.hpp"
#include "lagkv/layout.hpp"

using namespace lagkv;

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

std::string scratch_path(const std::string& name) {
    static int counter = 0;
    return (fs::temp_directory_path() /
            ("lagkv_cli_" + std::to_string(++counter) + "_" + name))
        .string();
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
    const std::string out_path = scratch_path("stdout.txt");
    const std::string err_path = scratch_path("stderr.txt");
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" LAGKV_CLI_PATH
                            "\" " + args + " > " + out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return result;
}

// Full prompt cache with binary32-exact values.
std::vector<LayerCache> fixture_cache(std::size_t n_layers, std::size_t h_kv,
                                      std::size_t d_h, std::size_t seq,
                                      std::uint32_t seed) {
    std::vector<LayerCache> layers(n_layers);
    std::uint32_t state = seed;
    auto next = [&state]() {
        state = state * 1664525u + 1013904223u;
        return static_cast<double>(static_cast<float>(state >> 8) * 0x1.0p-24f);
    };
    for (std::size_t li = 0; li < n_layers; ++li) {
        layers[li].layer_index = li;
        layers[li].heads.resize(h_kv);
        for (HeadCache& head : layers[li].heads) {
            head.K = Matrix(seq, d_h);
            head.V = Matrix(seq, d_h);
            for (double& x : head.K.data) x = next();
            for (double& x : head.V.data) x = next();
            head.positions.resize(seq);
            std::iota(head.positions.begin(), head.positions.end(),
                      std::uint32_t{0});
        }
    }
    return layers;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char ch : text) {
        n += ch == '\n' ? 1 : 0;
    }
    return n;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path(scratch_path(name)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("ratio subcommand prints the closed-form values") {
    CliResult r = run_cli("ratio 4112 16 1024 0.25");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "L_R=1808 C=0.5603\n");

    r = run_cli("ratio 2064 16 1024 0.5");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "L_R=2064 C=0.0000\n");

    r = run_cli("ratio 100 16 1024 0.5");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "L_R=100 C=0.0000\n");
}

TEST_CASE("ratio subcommand rejects non-numeric input") {
    const CliResult r = run_cli("ratio banana 16 1024 0.5");
    CHECK(r.exit_code == 2);
    CHECK(!r.err.empty());
}

TEST_CASE("compress with r=1 is byte-identical") {
    TempFile in("r1_in.kvd");
    TempFile out("r1_out.kvd");
    save_kvd(fixture_cache(2, 2, 8, 300, 9), in.path);
    const CliResult r = run_cli("compress --input " + in.path + " --output " +
                                out.path + " --S 16 --L 64 --r 1.0");
    CHECK(r.exit_code == 0);
    CHECK(slurp(in.path) == slurp(out.path));
    CHECK(r.out.find("\"retained_len\":300") != std::string::npos);
}

TEST_CASE("compress reports the fixture retention") {
    TempFile in("fixture_in.kvd");
    TempFile out("fixture_out.kvd");
    save_kvd(fixture_cache(1, 2, 4, 4112, 10), in.path);
    const CliResult r = run_cli("compress --input " + in.path + " --output " +
                                out.path + " --S 16 --L 1024 --r 0.25");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"retained_len\":1808") != std::string::npos);
    CHECK(r.out.find("\"events\":3") != std::string::npos);

    const auto compressed = load_kvd(out.path);
    CHECK(compressed[0].seq_len() == 1808);
}

TEST_CASE("compress error taxonomy") {
    TempFile out("err_out.kvd");

    SUBCASE("missing input file is an I/O failure") {
        const CliResult r = run_cli(
            "compress --input /nonexistent/in.kvd --output " + out.path);
        CHECK(r.exit_code == 1);
        CHECK(!r.err.empty());
    }

    SUBCASE("bad config values fail with exit 2") {
        TempFile in("cfg_in.kvd");
        save_kvd(fixture_cache(1, 1, 2, 64, 11), in.path);
        CliResult r = run_cli("compress --input " + in.path + " --output " +
                              out.path + " --r 1.5");
        CHECK(r.exit_code == 2);
        r = run_cli("compress --input " + in.path + " --output " + out.path +
                    " --strategy entropy");
        CHECK(r.exit_code == 2);
    }

    SUBCASE("unknown config-file keys fail with exit 2") {
        TempFile in("cfgfile_in.kvd");
        save_kvd(fixture_cache(1, 1, 2, 64, 12), in.path);
        TempFile cfg("run.cfg");
        std::ofstream(cfg.path) << "L = 32\nwindow = 7\n";
        const CliResult r = run_cli("compress --config " + cfg.path +
                                    " --input " + in.path + " --output " +
                                    out.path);
        CHECK(r.exit_code == 2);
    }

    SUBCASE("malformed KVD fails with exit 3") {
        TempFile bad("bad.kvd");
        std::ofstream(bad.path, std::ios::binary) << "XXXXnot-a-cache";
        const CliResult r = run_cli("compress --input " + bad.path +
                                    " --output " + out.path);
        CHECK(r.exit_code == 3);
        CHECK(r.err.find("bad magic") != std::string::npos);
    }
}

TEST_CASE("config file supplies defaults, flags override") {
    TempFile in("cfg2_in.kvd");
    TempFile out("cfg2_out.kvd");
    save_kvd(fixture_cache(1, 2, 4, 600, 13), in.path);
    TempFile cfg("run2.cfg");
    std::ofstream(cfg.path) << "S = 16\nL = 128\nr = 0.5\nstrategy = lag\n";

    CliResult r = run_cli("compress --config " + cfg.path + " --input " +
                          in.path + " --output " + out.path);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"retained_len\":" +
                     std::to_string(retained_length(600, 16, 128, 0.5))) !=
          std::string::npos);

    // flag overrides the config value
    r = run_cli("compress --config " + cfg.path + " --r 0.25 --input " +
                in.path + " --output " + out.path);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"retained_len\":" +
                     std::to_string(retained_length(600, 16, 128, 0.25))) !=
          std::string::npos);
}

TEST_CASE("scores subcommand emits per-token parts and kept flags") {
    // partition 0 = rows [0,2), reference = rows [2,4): the hand-worked chunk
    std::vector<LayerCache> layers(1);
    layers[0].heads.resize(1);
    HeadCache& head = layers[0].heads[0];
    head.K = Matrix(6, 2);
    head.V = Matrix(6, 2);
    const double rows[6][2] = {
        {0, 4}, {1, 2},  // chunk
        {0, 0}, {2, 4},  // reference
        {0, 0}, {0, 0},  // rest of the window
    };
    for (std::size_t t = 0; t < 6; ++t) {
        head.K.at(t, 0) = rows[t][0];
        head.K.at(t, 1) = rows[t][1];
    }
    head.V = head.K;
    head.positions = {0, 1, 2, 3, 4, 5};

    TempFile in("scores_in.kvd");
    save_kvd(layers, in.path);

    const CliResult r = run_cli("scores --input " + in.path +
                                " --S 0 --L 2 --r 0.5 --layer 0 --head 0 "
                                "--partition 0");
    CHECK(r.exit_code == 0);
    std::stringstream ss(r.out);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "position,k_score,v_score,total,kept");
    std::size_t position = 99;
    char comma = 0;
    double k_score = 0, v_score = 0, total = 0;
    int kept = -1;
    std::string line;
    std::getline(ss, line);
    std::stringstream row0(line);
    row0 >> position >> comma >> k_score >> comma >> v_score >> comma >> total >>
        comma >> kept;
    CHECK(position == 0);
    CHECK(k_score == doctest::Approx(0.6225).epsilon(1e-3));
    CHECK(v_score == doctest::Approx(0.6225).epsilon(1e-3));
    CHECK(total == doctest::Approx(1.2450).epsilon(1e-3));
    CHECK(kept == 1);
    std::getline(ss, line);
    std::stringstream row1(line);
    row1 >> position >> comma >> k_score >> comma >> v_score >> comma >> total >>
        comma >> kept;
    CHECK(position == 1);
    CHECK(total == doctest::Approx(0.7550).epsilon(1e-3));
    CHECK(kept == 0);
}

TEST_CASE("scores kept-flag count equals floor(r*L) and uniform chunks tie") {
    TempFile in("scores_uniform.kvd");
    // all rows identical -> uniform scores 2/L, kept falls back to tie order
    std::vector<LayerCache> layers(1);
    layers[0].heads.resize(1);
    HeadCache& head = layers[0].heads[0];
    const std::size_t n = 40;
    head.K = Matrix(n, 2);
    head.V = Matrix(n, 2);
    for (std::size_t t = 0; t < n; ++t) {
        head.K.at(t, 0) = 1.0;
        head.K.at(t, 1) = 2.0;
    }
    head.V = head.K;
    head.positions.resize(n);
    std::iota(head.positions.begin(), head.positions.end(), std::uint32_t{0});
    save_kvd(layers, in.path);

    const CliResult r = run_cli("scores --input " + in.path +
                                " --S 4 --L 8 --r 0.25 --layer 0 --head 0 "
                                "--partition 1");
    CHECK(r.exit_code == 0);
    std::stringstream ss(r.out);
    std::string line;
    std::getline(ss, line);  // header
    std::size_t kept_count = 0;
    std::size_t rows = 0;
    while (std::getline(ss, line)) {
        ++rows;
        std::stringstream cells(line);
        std::string cell;
        std::vector<std::string> parts;
        while (std::getline(cells, cell, ',')) {
            parts.push_back(cell);
        }
        REQUIRE(parts.size() == 5);
        // uniform rows score exactly 2/L each
        CHECK(std::stod(parts[3]) == doctest::Approx(2.0 / 8.0).epsilon(1e-9));
        kept_count += parts[4] == "1" ? 1 : 0;
    }
    CHECK(rows == 8);
    CHECK(kept_count == 2);  // floor(0.25 * 8)
}

TEST_CASE("scores rejects out-of-range indices") {
    TempFile in("scores_range.kvd");
    save_kvd(fixture_cache(1, 1, 2, 64, 14), in.path);
    const CliResult r = run_cli("scores --input " + in.path +
                                " --S 4 --L 8 --layer 3 --head 0 --partition 0");
    CHECK(r.exit_code == 2);
}

TEST_CASE("sweep emits the default 12-row grid deterministically") {
    TempFile in("sweep_in.kvd");
    save_kvd(fixture_cache(1, 2, 8, 1200, 15), in.path);
    const std::string args =
        "sweep --input " + in.path + " --n_queries 2 --seeds 7";
    const CliResult first = run_cli(args);
    CHECK(first.exit_code == 0);
    CHECK(count_lines(first.out) == 13);  // header + 3 L * 4 r * 1 strategy * 1 seed
    CHECK(first.out.rfind("L,r,strategy,seed,achieved_ratio,retained,"
                          "cosine_mean,cosine_min,max_abs_dev,outlier_retention",
                          0) == 0);

    const CliResult second = run_cli(args);
    CHECK(second.out == first.out);  // byte-identical reruns

    // spot-check one row's ratio against the formula
    std::stringstream ss(first.out);
    std::string line;
    std::getline(ss, line);
    while (std::getline(ss, line)) {
        std::stringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        const std::size_t L = std::stoull(cell);
        std::getline(row, cell, ',');
        const double r = std::stod(cell);
        std::getline(row, cell, ',');  // strategy
        std::getline(row, cell, ',');  // seed
        std::getline(row, cell, ',');
        const double ratio = std::stod(cell);
        std::getline(row, cell, ',');
        const std::size_t retained = std::stoull(cell);
        CHECK(retained == retained_length(1200, 16, L, r));
        CHECK(ratio == doctest::Approx(compression_ratio(1200, 16, L, r))
                           .epsilon(1e-6));
    }
}

TEST_CASE("simulate covers strategy variants and honors LAGKV_SEED") {
    const std::string args =
        "simulate --L 128 --r 0.5,0.25 --strategy lag,window-only "
        "--n_tokens 700 --d_h 8 --h_kv 1 --n_queries 1 --seeds 3";
    const CliResult base = run_cli(args);
    CHECK(base.exit_code == 0);
    CHECK(count_lines(base.out) == 5);  // header + 1*2*2*1
    CHECK(base.out.find(",window-only,") != std::string::npos);
    CHECK(base.out.find(",lag,") != std::string::npos);
    CHECK(base.out.find(",3,") != std::string::npos);

    const CliResult overridden = run_cli(args, "LAGKV_SEED=11,12");
    CHECK(overridden.exit_code == 0);
    CHECK(count_lines(overridden.out) == 9);  // two seeds now
    CHECK(overridden.out.find(",11,") != std::string::npos);
    CHECK(overridden.out.find(",12,") != std::string::npos);
    CHECK(overridden.out.find(",3,") == std::string::npos);
}
