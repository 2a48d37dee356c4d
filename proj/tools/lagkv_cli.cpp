// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lagkv/compressor.hpp"
#include "lagkv/kernels.hpp"
#include "lagkv/kvd_io.hpp"
#include "lagkv/layout.hpp"
#include "lagkv/sim.hpp"

namespace {

using namespace lagkv;

struct CliOptions {
    // compressor knobs (scalar form)
    std::size_t S = 16;
    std::size_t L = 1024;
    double r = 0.25;
    std::string strategy = "lag";
    double eps = 1e-6;
    std::vector<std::size_t> skip_layers;
    std::string mode = "oneshot";
    std::string input;
    std::string output;
    // grid knobs (sweep/simulate)
    std::vector<std::size_t> L_list{128, 512, 1024};
    std::vector<double> r_list{0.5, 0.25, 0.167, 0.125};
    std::vector<std::string> strategy_list{"lag"};
    std::vector<std::uint64_t> seeds{1};
    // synthetic stream knobs
    std::size_t n_tokens = 4112;
    std::size_t d_h = 64;
    std::size_t h_kv = 2;
    double rho = 0.9;
    std::size_t outlier_count = 8;
    double outlier_magnitude = 10.0;
    std::size_t n_queries = 8;
    // scores lookup
    std::size_t layer = 0;
    std::size_t head = 0;
    std::size_t partition = 0;

    bool skip_layers_set = false;
};

// ---------------------------------------------------------------------------
// flat "key = value" config files; command-line flags take precedence

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(trim(item));
    }
    return out;
}

std::size_t to_size(const std::string& v) {
    std::size_t pos = 0;
    const unsigned long long parsed = std::stoull(v, &pos);
    if (pos != v.size()) {
        throw std::invalid_argument("not an integer: " + v);
    }
    return static_cast<std::size_t>(parsed);
}

std::uint64_t to_u64(const std::string& v) {
    return static_cast<std::uint64_t>(to_size(v));
}

double to_double(const std::string& v) {
    std::size_t pos = 0;
    const double parsed = std::stod(v, &pos);
    if (pos != v.size()) {
        throw std::invalid_argument("not a number: " + v);
    }
    return parsed;
}

/// Applies config-file entries to the options a subcommand actually exposes.
/// A key is skipped when the matching flag was given on the command line.
class ConfigBinder {
public:
    void bind(const std::string& key, const CLI::Option* flag,
              std::function<void(const std::string&)> apply) {
        entries_[key] = {flag, std::move(apply)};
    }

    void apply_file(const std::string& path) const {
        std::ifstream is(path);
        if (!is) {
            throw IoError("cannot open config: " + path);
        }
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto comment = line.find('#');
            if (comment != std::string::npos) {
                line = line.substr(0, comment);
            }
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw std::invalid_argument("config line " +
                                            std::to_string(lineno) +
                                            " is not key = value");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            const auto hit = entries_.find(key);
            if (hit == entries_.end()) {
                throw std::invalid_argument("unknown config key: " + key);
            }
            if (hit->second.flag != nullptr && hit->second.flag->count() > 0) {
                continue;  // explicit flag wins
            }
            hit->second.apply(value);
        }
    }

private:
    struct Entry {
        const CLI::Option* flag = nullptr;
        std::function<void(const std::string&)> apply;
    };
    std::map<std::string, Entry> entries_;
};

CompressorConfig make_config(const CliOptions& opt, const std::string& strategy,
                             std::size_t lag, double ratio) {
    CompressorConfig cfg;
    cfg.sink_size = opt.S;
    cfg.lag_size = lag;
    cfg.retain_ratio = ratio;
    cfg.strategy = strategy_from_string(strategy);
    cfg.eps = opt.eps;
    if (opt.skip_layers_set) {
        cfg.skip_layers.insert(opt.skip_layers.begin(), opt.skip_layers.end());
    } else if (cfg.strategy == Strategy::L2Norm) {
        cfg.skip_layers = {0, 1};
    }
    cfg.validate();
    return cfg;
}

CompressionMode parse_mode(const std::string& mode) {
    if (mode == "oneshot") return CompressionMode::OneShot;
    if (mode == "incremental") return CompressionMode::Incremental;
    throw std::invalid_argument("mode must be oneshot or incremental");
}

// Compression expects a full prompt cache; anything else has already been
// evicted and cannot be partitioned by original position.
void require_contiguous_positions(const std::vector<LayerCache>& caches) {
    for (const LayerCache& layer : caches) {
        for (const HeadCache& head : layer.heads) {
            if (!head.positions.empty() &&
                (head.positions.front() != 0 ||
                 head.positions.back() != head.positions.size() - 1)) {
                throw KvdError(KvdErrorKind::DimMismatch,
                               "cache positions are not contiguous from zero");
            }
        }
    }
}

void apply_seed_env(std::vector<std::uint64_t>& seeds) {
    const char* env = std::getenv("LAGKV_SEED");
    if (env == nullptr || *env == '\0') {
        return;
    }
    std::vector<std::uint64_t> parsed;
    for (const std::string& item : split_list(env)) {
        parsed.push_back(to_u64(item));
    }
    if (parsed.empty()) {
        throw std::invalid_argument("LAGKV_SEED is set but holds no seeds");
    }
    seeds = std::move(parsed);
}

int cmd_compress(const CliOptions& opt) {
    const CompressorConfig cfg = make_config(opt, opt.strategy, opt.L, opt.r);
    const CompressionMode mode = parse_mode(opt.mode);
    std::vector<LayerCache> caches = load_kvd(opt.input);
    require_contiguous_positions(caches);
    auto [compressed, report] = run_compression(std::move(caches), cfg, mode);
    report.write_jsonl(std::cout);
    save_kvd(compressed, opt.output);
    return 0;
}

int cmd_ratio(std::size_t seq_len, std::size_t sink, std::size_t lag, double r) {
    if (!(r > 0.0) || r > 1.0) {
        throw std::invalid_argument("retain ratio must be in (0, 1]");
    }
    if (lag < 1) {
        throw std::invalid_argument("lag size must be >= 1");
    }
    const std::size_t retained = retained_length(seq_len, sink, lag, r);
    const double ratio = compression_ratio(seq_len, sink, lag, r);
    std::printf("L_R=%zu C=%.4f\n", retained, ratio);
    return 0;
}

int cmd_scores(const CliOptions& opt) {
    const CompressorConfig cfg = make_config(opt, opt.strategy, opt.L, opt.r);
    const std::vector<LayerCache> caches = load_kvd(opt.input);
    require_contiguous_positions(caches);
    if (opt.layer >= caches.size()) {
        throw std::out_of_range("layer index out of range");
    }
    const LayerCache& layer = caches[opt.layer];
    if (opt.head >= layer.num_heads()) {
        throw std::out_of_range("head index out of range");
    }
    const PartitionLayout layout =
        partition_layout(layer.seq_len(), cfg.sink_size, cfg.lag_size);
    if (opt.partition >= layout.partitions.size()) {
        throw std::out_of_range("partition index out of range");
    }
    const TokenRange part = layout.partitions[opt.partition];
    const TokenRange ref{part.end, part.end + cfg.lag_size};
    const HeadCache& head = layer.heads[opt.head];

    auto slice = [&](const Matrix& m, TokenRange range) {
        Matrix out(range.width(), m.cols);
        std::copy(m.row(range.begin), m.row(range.begin) + out.rows * m.cols,
                  out.data.begin());
        return out;
    };
    const ChunkPair chunk{slice(head.K, part), slice(head.V, part)};
    const ChunkPair reference{slice(head.K, ref), slice(head.V, ref)};

    ScoreParts parts;
    RealVector totals(part.width());
    switch (cfg.strategy) {
        case Strategy::Lag:
            parts = lag_score_parts(chunk, reference, cfg.eps);
            break;
        case Strategy::Local:
            parts = lag_score_parts(chunk, chunk, cfg.eps);
            break;
        case Strategy::L2Norm:
            parts.k_part = l2_score(chunk.K).scores;
            parts.v_part.assign(part.width(), 0.0);
            break;
        case Strategy::WindowOnly:
            parts.k_part.assign(part.width(), 0.0);
            parts.v_part.assign(part.width(), 0.0);
            break;
    }
    if (cfg.strategy == Strategy::WindowOnly) {
        totals = recency_score(part.width()).scores;
    } else {
        for (std::size_t t = 0; t < totals.size(); ++t) {
            totals[t] = parts.k_part[t] + parts.v_part[t];
        }
    }

    const std::size_t k = kept_per_partition(cfg.retain_ratio, cfg.lag_size);
    const std::vector<std::size_t> kept = top_k_indices(totals, k);
    std::vector<char> kept_flag(part.width(), 0);
    for (std::size_t i : kept) {
        kept_flag[i] = 1;
    }

    std::printf("position,k_score,v_score,total,kept\n");
    for (std::size_t t = 0; t < part.width(); ++t) {
        std::printf("%zu,%.9g,%.9g,%.9g,%d\n", part.begin + t, parts.k_part[t],
                    parts.v_part[t], totals[t], kept_flag[t] ? 1 : 0);
    }
    return 0;
}

struct SweepOutcome {
    double achieved_ratio = 0.0;
    std::size_t retained = 0;
    double cosine_mean = 1.0;
    double cosine_min = 1.0;
    double max_abs_dev = 0.0;
    double outlier_retention = std::nan("");
};

std::vector<OutlierSpec> place_outliers(std::size_t n_tokens, std::size_t sink,
                                        std::size_t lag, std::size_t count,
                                        double magnitude) {
    const PartitionLayout layout = partition_layout(n_tokens, sink, lag);
    std::vector<OutlierSpec> out;
    if (layout.partitions.empty() || count == 0) {
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const TokenRange part = layout.partitions[i % layout.partitions.size()];
        // spread offsets evenly across the partition width
        const std::size_t offset = ((2 * i + 1) * lag) / (2 * count);
        out.push_back({part.begin + offset % lag, magnitude});
    }
    return out;
}

SweepOutcome eval_generated(const CliOptions& opt, const CompressorConfig& cfg,
                            std::uint64_t seed) {
    StreamSpec spec;
    spec.seed = seed;
    spec.n_tokens = opt.n_tokens;
    spec.d_h = opt.d_h;
    spec.h_kv = opt.h_kv;
    spec.rho = opt.rho;
    spec.outliers = place_outliers(opt.n_tokens, cfg.sink_size, cfg.lag_size,
                                   opt.outlier_count, opt.outlier_magnitude);

    SweepOutcome row;
    const FidelityReport fidelity = fidelity_eval(spec, cfg, opt.n_queries);
    row.achieved_ratio = 1.0 - fidelity.retained_fraction;
    row.retained = static_cast<std::size_t>(std::llround(
        fidelity.retained_fraction * static_cast<double>(opt.n_tokens)));
    row.cosine_mean = fidelity.cosine_mean;
    row.cosine_min = fidelity.cosine_min;
    row.max_abs_dev = fidelity.max_abs_deviation;
    if (!spec.outliers.empty()) {
        row.outlier_retention = outlier_retention_rate(spec, cfg);
    }
    return row;
}

SweepOutcome eval_file(const std::vector<LayerCache>& originals,
                       const CliOptions& opt, const CompressorConfig& cfg,
                       std::uint64_t seed) {
    auto [compressed, report] =
        run_compression(originals, cfg, CompressionMode::OneShot);

    SweepOutcome row;
    std::size_t raw = 0;
    for (const LayerMetrics& lm : report.layers) {
        raw += lm.raw_len;
        row.retained += lm.retained_len;
    }
    row.achieved_ratio =
        raw == 0 ? 0.0
                 : 1.0 - static_cast<double>(row.retained) /
                             static_cast<double>(raw);

    double cos_sum = 0.0;
    std::size_t cos_n = 0;
    row.cosine_min = 1.0;
    for (std::size_t q = 0; q < opt.n_queries; ++q) {
        GaussianSource qsrc(mix_seed(seed, 0x51F + q));
        for (std::size_t li = 0; li < originals.size(); ++li) {
            if (originals[li].seq_len() == 0) {
                continue;
            }
            RealVector query(originals[li].head_dim());
            for (double& x : query) {
                x = qsrc();
            }
            for (std::size_t h = 0; h < originals[li].num_heads(); ++h) {
                const RealVector a = toy_attention(originals[li].heads[h], query);
                const RealVector b = toy_attention(compressed[li].heads[h], query);
                double dot = 0.0, aa = 0.0, bb = 0.0, dev = 0.0;
                for (std::size_t c = 0; c < a.size(); ++c) {
                    dot += a[c] * b[c];
                    aa += a[c] * a[c];
                    bb += b[c] * b[c];
                    dev = std::max(dev, std::abs(a[c] - b[c]));
                }
                const double denom = std::sqrt(aa * bb);
                const double cosine = denom == 0.0 ? 1.0 : dot / denom;
                cos_sum += cosine;
                ++cos_n;
                row.cosine_min = std::min(row.cosine_min, cosine);
                row.max_abs_dev = std::max(row.max_abs_dev, dev);
            }
        }
    }
    row.cosine_mean = cos_n == 0 ? 1.0 : cos_sum / static_cast<double>(cos_n);
    return row;
}

int cmd_sweep(const CliOptions& opt, bool generated) {
    std::vector<LayerCache> originals;
    if (generated) {
        // validated up front so the parallel grid loop cannot throw
        if (opt.rho < 0.0 || opt.rho >= 1.0) {
            throw std::invalid_argument("rho must be in [0, 1)");
        }
        if (opt.n_tokens == 0 || opt.d_h == 0 || opt.h_kv == 0) {
            throw std::invalid_argument(
                "n_tokens, d_h and h_kv must be positive");
        }
    } else {
        originals = load_kvd(opt.input);
        require_contiguous_positions(originals);
    }

    struct Combo {
        std::size_t L;
        double r;
        std::string strategy;
        std::uint64_t seed;
    };
    std::vector<Combo> combos;
    for (std::size_t L : opt.L_list) {
        for (double r : opt.r_list) {
            for (const std::string& strategy : opt.strategy_list) {
                for (std::uint64_t seed : opt.seeds) {
                    combos.push_back({L, r, strategy, seed});
                }
            }
        }
    }
    // validate the whole grid before doing any work
    for (const Combo& combo : combos) {
        make_config(opt, combo.strategy, combo.L, combo.r);
    }

    std::vector<std::string> rows(combos.size());
    const auto n_combos = static_cast<std::ptrdiff_t>(combos.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n_combos; ++i) {
        const Combo& combo = combos[i];
        const CompressorConfig cfg =
            make_config(opt, combo.strategy, combo.L, combo.r);
        const SweepOutcome row =
            generated ? eval_generated(opt, cfg, combo.seed)
                      : eval_file(originals, opt, cfg, combo.seed);
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "%zu,%g,%s,%llu,%.6f,%zu,%.6f,%.6f,%.6e,%.4f",
                      combo.L, combo.r, combo.strategy.c_str(),
                      static_cast<unsigned long long>(combo.seed),
                      row.achieved_ratio, row.retained, row.cosine_mean,
                      row.cosine_min, row.max_abs_dev, row.outlier_retention);
        rows[i] = buf;
    }

    std::printf(
        "L,r,strategy,seed,achieved_ratio,retained,cosine_mean,cosine_min,"
        "max_abs_dev,outlier_retention\n");
    for (const std::string& row : rows) {
        std::printf("%s\n", row.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KV cache compression by lag-referenced token scoring"};
    app.require_subcommand(1);

    CliOptions opt;
    std::map<const CLI::App*, ConfigBinder> binders;
    std::map<const CLI::App*, std::pair<CLI::Option*, std::string>> config_opts;

    auto add_compressor_options = [&](CLI::App* sub, bool lists) {
        ConfigBinder& binder = binders[sub];
        auto& config_path = config_opts[sub].second;
        config_opts[sub].first =
            sub->add_option("--config", config_path,
                            "flat key = value config file; flags override it");

        binder.bind("S",
                    sub->add_option("--S", opt.S, "attention sink size (tokens)"),
                    [&](const std::string& v) { opt.S = to_size(v); });
        if (lists) {
            binder.bind("L",
                        sub->add_option("--L", opt.L_list, "lag sizes")
                            ->delimiter(','),
                        [&](const std::string& v) {
                            opt.L_list.clear();
                            for (const auto& item : split_list(v)) {
                                opt.L_list.push_back(to_size(item));
                            }
                        });
            binder.bind("r",
                        sub->add_option("--r", opt.r_list, "retain ratios")
                            ->delimiter(','),
                        [&](const std::string& v) {
                            opt.r_list.clear();
                            for (const auto& item : split_list(v)) {
                                opt.r_list.push_back(to_double(item));
                            }
                        });
            binder.bind("strategy",
                        sub->add_option("--strategy", opt.strategy_list,
                                        "strategies: lag|local|l2norm|window-only")
                            ->delimiter(','),
                        [&](const std::string& v) {
                            opt.strategy_list = split_list(v);
                        });
        } else {
            binder.bind("L",
                        sub->add_option("--L", opt.L, "lag size (partition width)"),
                        [&](const std::string& v) { opt.L = to_size(v); });
            binder.bind("r", sub->add_option("--r", opt.r, "retain ratio in (0,1]"),
                        [&](const std::string& v) { opt.r = to_double(v); });
            binder.bind("strategy",
                        sub->add_option("--strategy", opt.strategy,
                                        "lag|local|l2norm|window-only"),
                        [&](const std::string& v) { opt.strategy = v; });
        }
        binder.bind("eps",
                    sub->add_option("--eps", opt.eps,
                                    "denominator guard for zero ranges"),
                    [&](const std::string& v) { opt.eps = to_double(v); });
        auto* skip_flag = sub->add_option("--skip_layers", opt.skip_layers,
                                          "layer indices exempt from compression "
                                          "(default 0,1 for l2norm)")
                              ->delimiter(',');
        binder.bind("skip_layers", skip_flag, [&](const std::string& v) {
            opt.skip_layers.clear();
            for (const auto& item : split_list(v)) {
                opt.skip_layers.push_back(to_size(item));
            }
            opt.skip_layers_set = true;
        });
        return skip_flag;
    };

    auto bind_io = [&](CLI::App* sub, bool with_output) {
        ConfigBinder& binder = binders[sub];
        binder.bind("input",
                    sub->add_option("--input", opt.input, "input .kvd path"),
                    [&](const std::string& v) { opt.input = v; });
        if (with_output) {
            binder.bind("output",
                        sub->add_option("--output", opt.output, "output .kvd path"),
                        [&](const std::string& v) { opt.output = v; });
        }
    };

    auto bind_seeds = [&](CLI::App* sub, const char* help) {
        binders[sub].bind("seeds",
                          sub->add_option("--seeds", opt.seeds, help)
                              ->delimiter(','),
                          [&](const std::string& v) {
                              opt.seeds.clear();
                              for (const auto& item : split_list(v)) {
                                  opt.seeds.push_back(to_u64(item));
                              }
                          });
    };

    auto bind_queries = [&](CLI::App* sub) {
        binders[sub].bind("n_queries",
                          sub->add_option("--n_queries", opt.n_queries,
                                          "probe queries per combination"),
                          [&](const std::string& v) { opt.n_queries = to_size(v); });
    };

    CLI::App* compress =
        app.add_subcommand("compress", "compress a KVD cache dump");
    auto* compress_skip = add_compressor_options(compress, false);
    (void)compress_skip;
    bind_io(compress, true);
    binders[compress].bind("mode",
                           compress->add_option("--mode", opt.mode,
                                                "oneshot|incremental"),
                           [&](const std::string& v) { opt.mode = v; });

    CLI::App* sweep = app.add_subcommand(
        "sweep", "grid-run compression over a KVD dump, CSV on stdout");
    add_compressor_options(sweep, true);
    bind_io(sweep, false);
    bind_seeds(sweep, "query seeds");
    bind_queries(sweep);

    CLI::App* simulate = app.add_subcommand(
        "simulate", "sweep over generated synthetic streams, CSV on stdout");
    add_compressor_options(simulate, true);
    bind_seeds(simulate, "stream seeds");
    bind_queries(simulate);
    {
        ConfigBinder& binder = binders[simulate];
        binder.bind("n_tokens",
                    simulate->add_option("--n_tokens", opt.n_tokens,
                                         "stream length"),
                    [&](const std::string& v) { opt.n_tokens = to_size(v); });
        binder.bind("d_h",
                    simulate->add_option("--d_h", opt.d_h, "head dimension"),
                    [&](const std::string& v) { opt.d_h = to_size(v); });
        binder.bind("h_kv", simulate->add_option("--h_kv", opt.h_kv, "KV heads"),
                    [&](const std::string& v) { opt.h_kv = to_size(v); });
        binder.bind("rho",
                    simulate->add_option("--rho", opt.rho,
                                         "token-locality correlation [0,1)"),
                    [&](const std::string& v) { opt.rho = to_double(v); });
        binder.bind("outlier_count",
                    simulate->add_option("--outlier_count", opt.outlier_count,
                                         "outliers injected into compressible "
                                         "partitions"),
                    [&](const std::string& v) { opt.outlier_count = to_size(v); });
        binder.bind(
            "outlier_magnitude",
            simulate->add_option("--outlier_magnitude", opt.outlier_magnitude,
                                 "noise multiplier at outlier positions"),
            [&](const std::string& v) { opt.outlier_magnitude = to_double(v); });
    }

    CLI::App* scores = app.add_subcommand(
        "scores", "per-token scores of one partition, CSV on stdout");
    add_compressor_options(scores, false);
    bind_io(scores, false);
    {
        ConfigBinder& binder = binders[scores];
        binder.bind("layer", scores->add_option("--layer", opt.layer, "layer index"),
                    [&](const std::string& v) { opt.layer = to_size(v); });
        binder.bind("head", scores->add_option("--head", opt.head, "KV head index"),
                    [&](const std::string& v) { opt.head = to_size(v); });
        binder.bind("partition",
                    scores->add_option("--partition", opt.partition,
                                       "compressible partition index"),
                    [&](const std::string& v) { opt.partition = to_size(v); });
    }

    CLI::App* ratio = app.add_subcommand(
        "ratio", "closed-form retained length and compression ratio");
    std::size_t ratio_seq = 0;
    std::size_t ratio_sink = 0;
    std::size_t ratio_lag = 0;
    double ratio_r = 0.0;
    ratio->add_option("seq_len", ratio_seq, "sequence length")->required();
    ratio->add_option("S", ratio_sink, "sink size")->required();
    ratio->add_option("L", ratio_lag, "lag size")->required();
    ratio->add_option("r", ratio_r, "retain ratio")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* active = nullptr;
        for (CLI::App* sub : {compress, sweep, simulate, scores}) {
            if (sub->parsed()) {
                active = sub;
            }
        }
        if (active != nullptr) {
            opt.skip_layers_set =
                active->count("--skip_layers") > 0;
            const auto& [config_opt, config_path] = config_opts[active];
            if (config_opt->count() > 0) {
                binders[active].apply_file(config_path);
            }
            // required inputs, checked after the config file had its chance
            if (active != simulate && opt.input.empty()) {
                throw std::invalid_argument("--input is required");
            }
            if (active == compress && opt.output.empty()) {
                throw std::invalid_argument("--output is required");
            }
        }
        apply_seed_env(opt.seeds);

        if (compress->parsed()) {
            return cmd_compress(opt);
        }
        if (sweep->parsed()) {
            return cmd_sweep(opt, /*generated=*/false);
        }
        if (simulate->parsed()) {
            return cmd_sweep(opt, /*generated=*/true);
        }
        if (scores->parsed()) {
            return cmd_scores(opt);
        }
        if (ratio->parsed()) {
            return cmd_ratio(ratio_seq, ratio_sink, ratio_lag, ratio_r);
        }
    } catch (const KvdError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
