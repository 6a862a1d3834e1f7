#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hdts/blocksize.hpp"
#include "hdts/dgp.hpp"
#include "hdts/gausslab.hpp"
#include "hdts/inference.hpp"
#include "hdts/io.hpp"
#include "hdts/linstat.hpp"
#include "hdts/parallel.hpp"

#ifndef HDTS_GIT_HASH
#define HDTS_GIT_HASH "unknown"
#endif

namespace hdts {

enum class Experiment { Table1, Table2, Table3, Fig1, Custom };

struct ExperimentConfig {
    Experiment experiment = Experiment::Custom;
    std::string label;

    // DGP cell
    DgpModel model = DgpModel::Var1;
    ErrorCase error_case = ErrorCase::CommonFactor;
    std::size_t n = 120;
    std::size_t p = 500;
    double rho = 0.2;
    double beta0 = 0.0;
    std::size_t burn_in = 200;

    // procedure parameters
    std::string test = "band";  // band | white_noise | bandedness (Custom only)
    std::vector<std::size_t> block_sizes{10};
    std::size_t num_lags = 1;  // L
    std::size_t iota = 1;
    std::vector<double> alphas{0.10, 0.05};

    // Monte Carlo scale
    std::size_t mc_reps = 500;
    std::size_t b_reps = 199;
    std::uint64_t seed = 20240801;
    std::size_t workers = 0;  // 0 = auto

    // block-size selector (Table2)
    std::size_t b_int = 6;
    std::size_t b_outer = 500;
    std::vector<std::size_t> candidates{4, 6, 8, 10, 12, 15, 20};

    // Gaussian-approximation lab (Fig1)
    std::size_t grid_size = 99;

    // one-shot run on a stored panel (Custom)
    std::string data_csv;

    void validate() const {
        if (mc_reps < 1) throw ConfigError("mc_reps must be >= 1");
        if (b_reps < 1) throw ConfigError("b_reps must be >= 1");
        if (alphas.empty()) throw ConfigError("alphas must be non-empty");
        for (const double a : alphas)
            if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha must lie in (0,1)");
        if (block_sizes.empty()) throw ConfigError("block_sizes must be non-empty");
        for (const std::size_t b : block_sizes)
            if (b < 1 || b > n) throw ConfigError("block size out of range for n");
        DgpConfig dgp{model, n, p, rho, error_case, beta0, burn_in};
        dgp.validate();
    }

    DgpConfig dgp() const { return {model, n, p, rho, error_case, beta0, burn_in}; }

    std::string canonical() const;
};

struct ResultRow {
    std::string cell;
    std::size_t b_n = 0;
    double alpha = 0.0;
    std::string metric;
    double value = 0.0;
    double se = 0.0;
};

struct ResultTable {
    std::vector<ResultRow> rows;
    std::uint64_t seed = 0;
    std::string config_hash;
    double wall_seconds = 0.0;
    std::size_t mc_reps = 0;
};

struct ExperimentOutput {
    ResultTable table;
    std::vector<std::pair<std::string, PPCurve>> curves;  // Fig1 only
};

// ---- enum <-> string ----

inline std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::Table1: return "table1";
        case Experiment::Table2: return "table2";
        case Experiment::Table3: return "table3";
        case Experiment::Fig1: return "fig1";
        case Experiment::Custom: return "custom";
    }
    return "custom";
}

inline Experiment experiment_from_string(const std::string& s) {
    if (s == "table1") return Experiment::Table1;
    if (s == "table2") return Experiment::Table2;
    if (s == "table3") return Experiment::Table3;
    if (s == "fig1") return Experiment::Fig1;
    if (s == "custom") return Experiment::Custom;
    throw ConfigError("unknown experiment: " + s);
}

inline std::string to_string(DgpModel m) {
    switch (m) {
        case DgpModel::Var1: return "var1";
        case DgpModel::MArch: return "march";
        case DgpModel::ArchFig1: return "arch_fig1";
        case DgpModel::IidMaCov: return "iid_ma_cov";
    }
    return "var1";
}

inline DgpModel model_from_string(const std::string& s) {
    if (s == "var1") return DgpModel::Var1;
    if (s == "march") return DgpModel::MArch;
    if (s == "arch_fig1") return DgpModel::ArchFig1;
    if (s == "iid_ma_cov") return DgpModel::IidMaCov;
    throw ConfigError("unknown model: " + s);
}

inline std::string to_string(ErrorCase c) {
    switch (c) {
        case ErrorCase::CommonFactor: return "common_factor";
        case ErrorCase::MaUnif: return "ma_unif";
        case ErrorCase::MaGamma: return "ma_gamma";
    }
    return "common_factor";
}

inline ErrorCase error_case_from_string(const std::string& s) {
    if (s == "common_factor") return ErrorCase::CommonFactor;
    if (s == "ma_unif") return ErrorCase::MaUnif;
    if (s == "ma_gamma") return ErrorCase::MaGamma;
    throw ConfigError("unknown error_case: " + s);
}

inline std::string ExperimentConfig::canonical() const {
    std::ostringstream out;
    out << "experiment=" << to_string(experiment) << ";label=" << label
        << ";model=" << to_string(model) << ";error_case=" << to_string(error_case)
        << ";n=" << n << ";p=" << p << ";rho=" << format_full(rho)
        << ";beta0=" << format_full(beta0) << ";burn_in=" << burn_in << ";test=" << test
        << ";block_sizes=";
    for (const auto b : block_sizes) out << b << ',';
    out << ";L=" << num_lags << ";iota=" << iota << ";alphas=";
    for (const auto a : alphas) out << format_full(a) << ',';
    out << ";mc_reps=" << mc_reps << ";b_reps=" << b_reps << ";seed=" << seed
        << ";b_int=" << b_int << ";b_outer=" << b_outer << ";candidates=";
    for (const auto c : candidates) out << c << ',';
    out << ";grid_size=" << grid_size << ";data_csv=" << data_csv;
    return out.str();
}

// ---- per-experiment drivers ----

namespace detail {

// Stream layout inside one Monte Carlo rep (base = seed block at r * 2^32):
// offset 0 generates the data, bootstrap draws sit at 1 + b, and the
// selector's final band uses the upper half of the block.
constexpr std::uint64_t kDataOffset = 0;
constexpr std::uint64_t kBootOffset = 1;
constexpr std::uint64_t kFinalBandOffset = std::uint64_t{1} << 31;

inline RngStream rep_stream(std::uint64_t seed, std::size_t rep) {
    return RngStream(seed).at(static_cast<std::uint64_t>(rep) << 32);
}

inline double pct_se(double phat, std::size_t reps) {
    return 100.0 * std::sqrt(phat * (1.0 - phat) / static_cast<double>(reps));
}

// Coverage of the zero mean vector by the uniform confidence band, evaluated
// for every (block size, alpha) pair. The bootstrap draws are shared across
// block sizes and alpha levels within a rep.
inline void run_mean_band(const ExperimentConfig& config, ResultTable& table) {
    const std::size_t nb = config.block_sizes.size();
    const std::size_t na = config.alphas.size();
    std::vector<std::uint8_t> covered(config.mc_reps * nb * na);

    parallel_for(config.mc_reps, config.workers, [&](std::size_t r) {
        RngStream base = rep_stream(config.seed, r);
        const Matrix x = generate(config.dgp(), base.at(kDataOffset));
        const double scale = std::sqrt(static_cast<double>(x.rows()));
        const std::vector<double> mean = x.col_means();
        double dev = 0.0;
        for (const double m : mean) dev = std::max(dev, std::abs(m));
        const double stat = scale * dev;

        for (std::size_t c = 0; c < nb; ++c) {
            const SingleScheme scheme = make_scheme_single(x.rows(), config.block_sizes[c]);
            const BlockSums sums = block_sums_centered(x, scheme);
            const BootstrapDistribution dist = multiplier_bootstrap(
                sums, scale, config.b_reps, StatKind::Absolute, base.at(kBootOffset));
            for (std::size_t a = 0; a < na; ++a) {
                const bool cover = stat <= dist.critical_value(config.alphas[a]);
                covered[(r * nb + c) * na + a] = cover ? 1 : 0;
            }
        }
    });

    for (std::size_t c = 0; c < nb; ++c)
        for (std::size_t a = 0; a < na; ++a) {
            double hits = 0.0;
            for (std::size_t r = 0; r < config.mc_reps; ++r)
                hits += covered[(r * nb + c) * na + a];
            const double phat = hits / static_cast<double>(config.mc_reps);
            table.rows.push_back({config.label, config.block_sizes[c], config.alphas[a],
                                  "coverage_pct", 100.0 * phat, pct_se(phat, config.mc_reps)});
        }
}

// Rejection rate of the white noise test (lags 1..L), bootstrap reused
// across block sizes and alphas.
inline void run_white_noise(const ExperimentConfig& config, ResultTable& table) {
    if (config.num_lags < 1 || config.num_lags >= config.n)
        throw ConfigError("white noise: need 1 <= L < n");
    const std::size_t nb = config.block_sizes.size();
    const std::size_t na = config.alphas.size();
    std::vector<std::uint8_t> rejected(config.mc_reps * nb * na);

    std::vector<std::size_t> lags(config.num_lags);
    for (std::size_t l = 1; l <= config.num_lags; ++l) lags[l - 1] = l;

    parallel_for(config.mc_reps, config.workers, [&](std::size_t r) {
        RngStream base = rep_stream(config.seed, r);
        const Matrix x = generate(config.dgp(), base.at(kDataOffset));
        const double scale = std::sqrt(static_cast<double>(x.rows()));

        double dev = 0.0;
        for (const std::size_t lag : lags) {
            const Matrix gamma = sample_autocov(x, lag);
            for (const double g : gamma.data()) dev = std::max(dev, std::abs(g));
        }
        const double stat = scale * dev;

        const Matrix panel = lag_product_panel(x, lags);
        for (std::size_t c = 0; c < nb; ++c) {
            const SingleScheme scheme = make_scheme_single(panel.rows(), config.block_sizes[c]);
            const BlockSums sums = block_sums_centered(panel, scheme);
            const BootstrapDistribution dist = multiplier_bootstrap(
                sums, scale, config.b_reps, StatKind::Absolute, base.at(kBootOffset));
            for (std::size_t a = 0; a < na; ++a) {
                const bool reject = stat > dist.critical_value(config.alphas[a]);
                rejected[(r * nb + c) * na + a] = reject ? 1 : 0;
            }
        }
    });

    for (std::size_t c = 0; c < nb; ++c)
        for (std::size_t a = 0; a < na; ++a) {
            double hits = 0.0;
            for (std::size_t r = 0; r < config.mc_reps; ++r)
                hits += rejected[(r * nb + c) * na + a];
            const double phat = hits / static_cast<double>(config.mc_reps);
            table.rows.push_back({config.label, config.block_sizes[c], config.alphas[a],
                                  "rejection_pct", 100.0 * phat, pct_se(phat, config.mc_reps)});
        }
}

// Rejection rate of the bandedness test.
inline void run_bandedness(const ExperimentConfig& config, ResultTable& table) {
    const std::size_t nb = config.block_sizes.size();
    const std::size_t na = config.alphas.size();
    std::vector<std::uint8_t> rejected(config.mc_reps * nb * na);

    parallel_for(config.mc_reps, config.workers, [&](std::size_t r) {
        RngStream base = rep_stream(config.seed, r);
        const Matrix x = generate(config.dgp(), base.at(kDataOffset));
        for (std::size_t c = 0; c < nb; ++c)
            for (std::size_t a = 0; a < na; ++a) {
                const TestResult res =
                    bandedness_test(x, config.iota, config.block_sizes[c], config.b_reps,
                                    config.alphas[a], base.at(kBootOffset));
                rejected[(r * nb + c) * na + a] = res.reject ? 1 : 0;
            }
    });

    for (std::size_t c = 0; c < nb; ++c)
        for (std::size_t a = 0; a < na; ++a) {
            double hits = 0.0;
            for (std::size_t r = 0; r < config.mc_reps; ++r)
                hits += rejected[(r * nb + c) * na + a];
            const double phat = hits / static_cast<double>(config.mc_reps);
            table.rows.push_back({config.label, config.block_sizes[c], config.alphas[a],
                                  "rejection_pct", 100.0 * phat, pct_se(phat, config.mc_reps)});
        }
}

// Selector study: per rep, pick the block size on the data, then check band
// coverage at the chosen size.
inline void run_selector(const ExperimentConfig& config, ResultTable& table) {
    const std::size_t na = config.alphas.size();
    std::vector<std::uint8_t> covered(config.mc_reps * na);
    std::vector<double> chosen(config.mc_reps * na);

    parallel_for(config.mc_reps, config.workers, [&](std::size_t r) {
        RngStream base = rep_stream(config.seed, r);
        const Matrix x = generate(config.dgp(), base.at(kDataOffset));
        const double scale = std::sqrt(static_cast<double>(x.rows()));
        const std::vector<double> mean = x.col_means();
        double dev = 0.0;
        for (const double m : mean) dev = std::max(dev, std::abs(m));
        const double stat = scale * dev;

        for (std::size_t a = 0; a < na; ++a) {
            const BlockSizeReport report =
                select_block_size(x, config.b_int, config.candidates, config.b_outer,
                                  config.b_reps, config.alphas[a], base.at(kBootOffset));
            const ConfidenceBand band =
                uniform_confidence_band(x, report.chosen, config.b_reps, config.alphas[a],
                                        base.at(kFinalBandOffset));
            covered[r * na + a] = stat <= band.critical_value ? 1 : 0;
            chosen[r * na + a] = static_cast<double>(report.chosen);
        }
    });

    for (std::size_t a = 0; a < na; ++a) {
        double hits = 0.0, mean_choice = 0.0;
        for (std::size_t r = 0; r < config.mc_reps; ++r) {
            hits += covered[r * na + a];
            mean_choice += chosen[r * na + a];
        }
        const double phat = hits / static_cast<double>(config.mc_reps);
        table.rows.push_back({config.label, 0, config.alphas[a], "coverage_pct", 100.0 * phat,
                              pct_se(phat, config.mc_reps)});
        table.rows.push_back({config.label, 0, config.alphas[a], "mean_selected_block",
                              mean_choice / static_cast<double>(config.mc_reps), 0.0});
    }
}

// Gaussian-approximation cell: sample the data-side and Gaussian-side max
// statistics on disjoint stream blocks and compare their distributions.
inline void run_fig1(const ExperimentConfig& config, ExperimentOutput& out) {
    const LowerTriangular factor = cholesky(equicorrelated_cov(config.p));
    const double beta0 = config.beta0;

    const DgpSampler arch = [&factor, beta0](std::size_t n, std::size_t p, RngStream stream) {
        return gen_arch_fig1(n, p, beta0, factor, stream);
    };
    const DgpSampler gauss = [&factor](std::size_t n, std::size_t p, RngStream stream) {
        return gen_gaussian_analog(n, p, factor, stream);
    };

    RngStream root(config.seed);
    const std::uint64_t gauss_base = static_cast<std::uint64_t>(config.mc_reps) << 32;
    const MaxStatSample sx = sample_max_stat(arch, config.n, config.p, config.mc_reps,
                                             StatKind::Signed, root, config.workers, "data");
    const MaxStatSample sy =
        sample_max_stat(gauss, config.n, config.p, config.mc_reps, StatKind::Signed,
                        root.at(gauss_base), config.workers, "gaussian");

    const PPCurve curve = pp_curve(sx, sy, config.grid_size);
    out.table.rows.push_back(
        {config.label, 0, 0.0, "pp_max_dev", curve.max_abs_deviation(), 0.0});
    out.table.rows.push_back(
        {config.label, 0, 0.0, "ks_distance", estimate_kolmogorov_distance(sx, sy), 0.0});
    out.curves.emplace_back(config.label, curve);
}

// One-shot evaluation of a stored panel (no Monte Carlo loop).
inline void run_oneshot(const ExperimentConfig& config, ResultTable& table) {
    const Matrix x = read_csv_matrix(config.data_csv);
    RngStream base = rep_stream(config.seed, 0);
    for (const std::size_t b_n : config.block_sizes)
        for (const double alpha : config.alphas) {
            if (config.test == "band") {
                const ConfidenceBand band =
                    uniform_confidence_band(x, b_n, config.b_reps, alpha, base.at(kBootOffset));
                table.rows.push_back(
                    {config.label, b_n, alpha, "band_half_width", band.half_width, 0.0});
            } else {
                const TestResult res =
                    config.test == "white_noise"
                        ? white_noise_test(x, config.num_lags, b_n, config.b_reps, alpha,
                                           base.at(kBootOffset))
                        : bandedness_test(x, config.iota, b_n, config.b_reps, alpha,
                                          base.at(kBootOffset));
                table.rows.push_back({config.label, b_n, alpha, "statistic", res.statistic, 0.0});
                table.rows.push_back(
                    {config.label, b_n, alpha, "critical_value", res.critical_value, 0.0});
                table.rows.push_back({config.label, b_n, alpha, "p_value", res.p_value, 0.0});
                table.rows.push_back(
                    {config.label, b_n, alpha, "reject", res.reject ? 1.0 : 0.0, 0.0});
            }
        }
}

}  // namespace detail

inline ExperimentOutput run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    ExperimentOutput out;
    out.table.seed = config.seed;
    out.table.mc_reps = config.mc_reps;
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(config.canonical())));
        out.table.config_hash = buf;
    }

    switch (config.experiment) {
        case Experiment::Table1:
            detail::run_mean_band(config, out.table);
            break;
        case Experiment::Table2:
            detail::run_selector(config, out.table);
            break;
        case Experiment::Table3:
            detail::run_white_noise(config, out.table);
            break;
        case Experiment::Fig1:
            detail::run_fig1(config, out);
            break;
        case Experiment::Custom:
            if (!config.data_csv.empty()) {
                detail::run_oneshot(config, out.table);
            } else if (config.test == "band") {
                detail::run_mean_band(config, out.table);
            } else if (config.test == "white_noise") {
                detail::run_white_noise(config, out.table);
            } else if (config.test == "bandedness") {
                detail::run_bandedness(config, out.table);
            } else {
                throw ConfigError("custom: test must be band, white_noise or bandedness");
            }
            break;
    }

    out.table.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// ---- output files ----

inline void emit_csv(const ResultTable& table, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"cell", "b_n", "alpha", "metric", "value", "se"});
    for (const ResultRow& r : table.rows) {
        const bool pct = r.metric.ends_with("_pct");
        rows.push_back({r.cell, std::to_string(r.b_n), format_full(r.alpha), r.metric,
                        pct ? format_fixed(r.value, 1) : format_full(r.value),
                        format_full(r.se)});
    }
    write_csv(path, rows);
}

inline void emit_ppcurves_csv(const std::vector<std::pair<std::string, PPCurve>>& curves,
                              const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"cell", "grid_prob", "x_cdf_at_y_quantile"});
    for (const auto& [label, curve] : curves)
        for (std::size_t g = 0; g < curve.grid.size(); ++g)
            rows.push_back({label, format_full(curve.grid[g]), format_full(curve.values[g])});
    write_csv(path, rows);
}

inline void write_meta_json(const ResultTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "{\n"
        << "  \"seed\": " << table.seed << ",\n"
        << "  \"config_hash\": \"" << table.config_hash << "\",\n"
        << "  \"git_hash\": \"" << HDTS_GIT_HASH << "\",\n"
        << "  \"wall_time_sec\": " << format_full(table.wall_seconds) << ",\n"
        << "  \"mc_reps\": " << table.mc_reps << "\n"
        << "}\n";
    if (!out) throw IoError("write failed: " + path.string());
}

// ---- config files ----

namespace detail {

struct ConfigValue {
    enum class Kind { Number, String, NumberList } kind = Kind::Number;
    double number = 0.0;
    std::string text;
    std::vector<double> list;
};

inline void apply_config_key(ExperimentConfig& config, const std::string& key,
                             const ConfigValue& value) {
    auto need_number = [&]() -> double {
        if (value.kind != ConfigValue::Kind::Number)
            throw ConfigError("config: key '" + key + "' expects a number");
        return value.number;
    };
    auto need_string = [&]() -> const std::string& {
        if (value.kind != ConfigValue::Kind::String)
            throw ConfigError("config: key '" + key + "' expects a string");
        return value.text;
    };
    auto need_count = [&](const char* what) -> std::size_t {
        const double v = need_number();
        if (v < 0 || v != std::floor(v))
            throw ConfigError(std::string("config: ") + what + " must be a whole number");
        return static_cast<std::size_t>(v);
    };
    auto need_size_list = [&]() {
        if (value.kind == ConfigValue::Kind::Number)
            return std::vector<std::size_t>{static_cast<std::size_t>(value.number)};
        if (value.kind != ConfigValue::Kind::NumberList)
            throw ConfigError("config: key '" + key + "' expects a list of integers");
        std::vector<std::size_t> out;
        for (const double v : value.list) {
            if (v < 1 || v != std::floor(v))
                throw ConfigError("config: key '" + key + "' expects positive integers");
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    };

    if (key == "experiment") config.experiment = experiment_from_string(need_string());
    else if (key == "label") config.label = need_string();
    else if (key == "model") config.model = model_from_string(need_string());
    else if (key == "error_case") config.error_case = error_case_from_string(need_string());
    else if (key == "n") config.n = need_count("n");
    else if (key == "p") config.p = need_count("p");
    else if (key == "rho") config.rho = need_number();
    else if (key == "beta0") config.beta0 = need_number();
    else if (key == "burn_in") config.burn_in = need_count("burn_in");
    else if (key == "test") config.test = need_string();
    else if (key == "block_sizes") config.block_sizes = need_size_list();
    else if (key == "L") config.num_lags = need_count("L");
    else if (key == "iota") config.iota = need_count("iota");
    else if (key == "alphas") {
        if (value.kind == ConfigValue::Kind::Number) config.alphas = {value.number};
        else if (value.kind == ConfigValue::Kind::NumberList) config.alphas = value.list;
        else throw ConfigError("config: alphas expects numbers");
    }
    else if (key == "mc_reps") config.mc_reps = need_count("mc_reps");
    else if (key == "b_reps") config.b_reps = need_count("b_reps");
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(need_number());
    else if (key == "workers") config.workers = need_count("workers");
    else if (key == "b_int") config.b_int = need_count("b_int");
    else if (key == "b_outer") config.b_outer = need_count("b_outer");
    else if (key == "candidates") config.candidates = need_size_list();
    else if (key == "grid_size") config.grid_size = need_count("grid_size");
    else if (key == "data_csv") config.data_csv = need_string();
    else throw ConfigError("config: unknown key '" + key + "'");
}

inline ConfigValue parse_toml_value(std::string raw, const std::string& key) {
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    raw = trim(raw);
    if (raw.empty()) throw ConfigError("config: empty value for key '" + key + "'");

    ConfigValue value;
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"')
            throw ConfigError("config: unterminated string for key '" + key + "'");
        value.kind = ConfigValue::Kind::String;
        value.text = raw.substr(1, raw.size() - 2);
        return value;
    }
    if (raw.front() == '[') {
        if (raw.back() != ']') throw ConfigError("config: unterminated list for key '" + key + "'");
        value.kind = ConfigValue::Kind::NumberList;
        std::stringstream body(raw.substr(1, raw.size() - 2));
        std::string item;
        while (std::getline(body, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                value.list.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("config: bad number '" + item + "' for key '" + key + "'");
            }
        }
        return value;
    }
    try {
        std::size_t used = 0;
        value.number = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
    } catch (const std::exception&) {
        throw ConfigError("config: bad value '" + raw + "' for key '" + key + "'");
    }
    return value;
}

}  // namespace detail

// Flat key = value config (TOML subset: numbers, "strings", [lists]).
inline ExperimentConfig parse_config_toml(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    ExperimentConfig config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        std::string key = line.substr(0, eq);
        const auto kb = key.find_first_not_of(" \t");
        const auto ke = key.find_last_not_of(" \t");
        key = key.substr(kb, ke - kb + 1);
        detail::apply_config_key(config, key, detail::parse_toml_value(line.substr(eq + 1), key));
    }
    return config;
}

inline ExperimentConfig parse_config_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: bad json: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");

    ExperimentConfig config;
    for (const auto& [key, val] : doc.items()) {
        detail::ConfigValue value;
        if (val.is_string()) {
            value.kind = detail::ConfigValue::Kind::String;
            value.text = val.get<std::string>();
        } else if (val.is_number()) {
            value.kind = detail::ConfigValue::Kind::Number;
            value.number = val.get<double>();
        } else if (val.is_array()) {
            value.kind = detail::ConfigValue::Kind::NumberList;
            for (const auto& item : val) {
                if (!item.is_number())
                    throw ConfigError("config: key '" + key + "' expects numbers");
                value.list.push_back(item.get<double>());
            }
        } else {
            throw ConfigError("config: unsupported value type for key '" + key + "'");
        }
        detail::apply_config_key(config, key, value);
    }
    return config;
}

inline ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    return path.extension() == ".json" ? parse_config_json(path) : parse_config_toml(path);
}

// Worker override: CLI flag beats HDTS_WORKERS, which beats the config value.
inline std::size_t effective_workers(std::size_t config_workers,
                                     std::optional<std::size_t> cli_workers) {
    if (cli_workers) return *cli_workers;
    if (const char* env = std::getenv("HDTS_WORKERS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0') return static_cast<std::size_t>(v);
        throw ConfigError("HDTS_WORKERS must be an integer");
    }
    return config_workers;
}

// ---- presets ----

struct Preset {
    std::string name;
    std::string description;
    std::vector<ExperimentConfig> cells;
};

namespace detail {

inline ExperimentConfig table1_cell(double rho, ErrorCase ec, std::size_t p,
                                    std::size_t mc_reps, std::size_t b_reps,
                                    std::vector<std::size_t> block_sizes) {
    ExperimentConfig c;
    c.experiment = Experiment::Table1;
    c.model = DgpModel::Var1;
    c.error_case = ec;
    c.n = 120;
    c.p = p;
    c.rho = rho;
    c.block_sizes = std::move(block_sizes);
    c.alphas = {0.10, 0.05};
    c.mc_reps = mc_reps;
    c.b_reps = b_reps;
    std::ostringstream label;
    label << "rho=" << format_fixed(rho, 1) << ",case=" << to_string(ec) << ",p=" << p;
    c.label = label.str();
    return c;
}

inline ExperimentConfig table3_cell(int dgp_case, std::size_t p, std::size_t num_lags,
                                    std::size_t mc_reps, std::size_t b_reps) {
    ExperimentConfig c;
    c.experiment = Experiment::Table3;
    c.n = 60;
    c.p = p;
    c.num_lags = num_lags;
    c.block_sizes = {1, 2, 3, 4, 5, 6};
    c.alphas = {0.10, 0.05};
    c.mc_reps = mc_reps;
    c.b_reps = b_reps;
    switch (dgp_case) {
        case 1:
            c.model = DgpModel::IidMaCov;
            c.error_case = ErrorCase::MaUnif;
            break;
        case 2:
            c.model = DgpModel::MArch;
            break;
        case 3:
            c.model = DgpModel::Var1;
            c.error_case = ErrorCase::MaUnif;
            c.rho = 0.3;
            break;
        default:
            throw ConfigError("table3 case must be 1..3");
    }
    std::ostringstream label;
    label << "case=" << dgp_case << ",p=" << p << ",L=" << num_lags;
    c.label = label.str();
    return c;
}

inline ExperimentConfig table2_cell(double rho, ErrorCase ec, std::size_t mc_reps,
                                    std::size_t b_reps) {
    ExperimentConfig c;
    c.experiment = Experiment::Table2;
    c.model = DgpModel::Var1;
    c.error_case = ec;
    c.n = 120;
    c.p = 500;
    c.rho = rho;
    c.alphas = {0.05};
    c.mc_reps = mc_reps;
    c.b_reps = b_reps;
    c.b_int = 6;
    c.b_outer = 500;
    c.candidates = {4, 6, 8, 10, 12, 15, 20};
    std::ostringstream label;
    label << "rho=" << format_fixed(rho, 1) << ",case=" << to_string(ec) << ",p=500";
    c.label = label.str();
    return c;
}

inline ExperimentConfig fig1_cell(std::size_t p, double beta0, std::size_t reps) {
    ExperimentConfig c;
    c.experiment = Experiment::Fig1;
    c.model = DgpModel::ArchFig1;
    c.n = 60;
    c.p = p;
    c.beta0 = beta0;
    c.mc_reps = reps;
    c.grid_size = 99;
    std::ostringstream label;
    label << "p=" << p << ",beta0=" << format_fixed(beta0, 1);
    c.label = label.str();
    return c;
}

}  // namespace detail

inline std::vector<Preset> all_presets() {
    std::vector<Preset> presets;
    const std::vector<std::size_t> full_blocks{4, 6, 8, 10, 12, 15, 20};

    Preset table1{"table1", "mean band coverage, paper scale (5000 reps, 499 resamples)", {}};
    Preset table1_mini{"table1-mini", "mean band coverage, desk scale (500 reps, 199 resamples)", {}};
    for (const double rho : {0.2, 0.5}) {
        for (const ErrorCase ec :
             {ErrorCase::CommonFactor, ErrorCase::MaUnif, ErrorCase::MaGamma}) {
            for (const std::size_t p : {std::size_t{500}, std::size_t{1000}})
                table1.cells.push_back(detail::table1_cell(rho, ec, p, 5000, 499, full_blocks));
        }
        table1_mini.cells.push_back(
            detail::table1_cell(rho, ErrorCase::CommonFactor, 500, 500, 199, {4, 10, 15}));
    }

    Preset table2{"table2", "block-size selector coverage, paper scale (200 reps)", {}};
    for (const double rho : {0.2, 0.5})
        for (const ErrorCase ec :
             {ErrorCase::CommonFactor, ErrorCase::MaUnif, ErrorCase::MaGamma})
            table2.cells.push_back(detail::table2_cell(rho, ec, 200, 499));
    Preset table2_mini{"table2-mini", "block-size selector coverage, desk scale", {}};
    table2_mini.cells.push_back(detail::table2_cell(0.2, ErrorCase::CommonFactor, 200, 199));

    Preset table3{"table3", "white noise size/power, paper scale (5000 reps)", {}};
    Preset table3_mini{"table3-mini", "white noise size/power, desk scale (1000 reps)", {}};
    for (const int dgp_case : {1, 2, 3})
        for (const std::size_t p : {std::size_t{30}, std::size_t{50}})
            for (const std::size_t num_lags : {std::size_t{1}, std::size_t{3}})
                table3.cells.push_back(detail::table3_cell(dgp_case, p, num_lags, 5000, 499));
    for (const int dgp_case : {1, 3}) {
        ExperimentConfig c = detail::table3_cell(dgp_case, 30, 1, 1000, 199);
        c.block_sizes = {1};
        table3_mini.cells.push_back(c);
    }

    Preset fig1{"fig1", "Gaussian approximation P-P study, 5000 reps per cell", {}};
    for (const std::size_t p : {std::size_t{100}, std::size_t{300}, std::size_t{500}})
        for (const double beta0 : {0.0, 0.2, 0.5})
            fig1.cells.push_back(detail::fig1_cell(p, beta0, 5000));
    Preset fig1_mini{"fig1-mini", "Gaussian approximation P-P study, desk scale", {}};
    fig1_mini.cells.push_back(detail::fig1_cell(100, 0.0, 2000));
    fig1_mini.cells.push_back(detail::fig1_cell(500, 0.5, 2000));

    presets.push_back(std::move(table1));
    presets.push_back(std::move(table1_mini));
    presets.push_back(std::move(table2));
    presets.push_back(std::move(table2_mini));
    presets.push_back(std::move(table3));
    presets.push_back(std::move(table3_mini));
    presets.push_back(std::move(fig1));
    presets.push_back(std::move(fig1_mini));
    return presets;
}

inline const Preset& find_preset(const std::string& name) {
    static const std::vector<Preset> presets = all_presets();
    for (const Preset& preset : presets)
        if (preset.name == name) return preset;
    throw ConfigError("unknown preset: " + name);
}

}  // namespace hdts
