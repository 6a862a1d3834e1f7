// Command-line front end: experiment runner, block-size selector and the
// Gaussian-approximation lab.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hdts/harness.hpp"

namespace fs = std::filesystem;

namespace {

int run_command(const std::string& preset_name, const std::string& config_path,
                const std::string& out_dir, std::optional<std::uint64_t> seed,
                std::optional<std::size_t> workers, std::optional<std::size_t> mc_reps,
                std::optional<std::size_t> b_reps) {
    std::vector<hdts::ExperimentConfig> cells;
    if (!preset_name.empty() && !config_path.empty())
        throw hdts::ConfigError("pass either --preset or --config, not both");
    if (!preset_name.empty()) {
        cells = hdts::find_preset(preset_name).cells;
    } else if (!config_path.empty()) {
        cells.push_back(hdts::parse_config_file(config_path));
    } else {
        throw hdts::ConfigError("run needs --preset or --config");
    }

    for (auto& cell : cells) {
        if (seed) cell.seed = *seed;
        if (mc_reps) cell.mc_reps = *mc_reps;
        if (b_reps) cell.b_reps = *b_reps;
        cell.workers = hdts::effective_workers(cell.workers, workers);
    }

    fs::create_directories(out_dir);
    hdts::ResultTable merged;
    std::vector<std::pair<std::string, hdts::PPCurve>> curves;
    std::string canonical_all;
    for (const auto& cell : cells) canonical_all += cell.canonical() + "\n";
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(hdts::fnv1a64(canonical_all)));
        merged.config_hash = buf;
    }
    merged.seed = cells.front().seed;
    merged.mc_reps = cells.front().mc_reps;

    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::cerr << "[hdts] cell " << (i + 1) << "/" << cells.size() << ": "
                  << cells[i].label << "\n";
        hdts::ExperimentOutput out = hdts::run_experiment(cells[i]);
        merged.wall_seconds += out.table.wall_seconds;
        merged.rows.insert(merged.rows.end(), out.table.rows.begin(), out.table.rows.end());
        curves.insert(curves.end(), out.curves.begin(), out.curves.end());
    }

    hdts::emit_csv(merged, fs::path(out_dir) / "results.csv");
    hdts::write_meta_json(merged, fs::path(out_dir) / "meta.json");
    if (!curves.empty()) hdts::emit_ppcurves_csv(curves, fs::path(out_dir) / "ppcurve.csv");

    std::cout << "wrote " << (fs::path(out_dir) / "results.csv").string() << " ("
              << merged.rows.size() << " rows, " << hdts::format_fixed(merged.wall_seconds, 1)
              << " s)\n";
    return 0;
}

int select_command(const std::string& data_path, std::size_t b_int,
                   std::vector<std::size_t> candidates, std::size_t b_outer, std::size_t b_reps,
                   double alpha, std::uint64_t seed, std::size_t iterations,
                   std::optional<std::size_t> workers, const std::string& out_dir) {
    const hdts::Matrix x = hdts::read_csv_matrix(data_path);
    const std::size_t effective = hdts::effective_workers(0, workers);
    const hdts::BlockSizeReport report =
        hdts::select_block_size(x, b_int, std::move(candidates), b_outer, b_reps, alpha,
                                hdts::RngStream(seed), iterations, effective);

    std::cout << "n=" << x.rows() << " p=" << x.cols() << " b_int=" << report.b_int
              << " b_outer=" << report.b_outer << " alpha=" << alpha << "\n";
    std::cout << "candidate  coverage\n";
    for (std::size_t c = 0; c < report.candidates.size(); ++c)
        std::cout << hdts::format_fixed(report.candidates[c], 0) << "  "
                  << hdts::format_fixed(100.0 * report.empirical_coverage[c], 1) << "%\n";
    std::cout << "chosen block size: " << report.chosen << "\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"candidate", "coverage", "chosen"});
        for (std::size_t c = 0; c < report.candidates.size(); ++c)
            rows.push_back({std::to_string(report.candidates[c]),
                            hdts::format_full(report.empirical_coverage[c]),
                            report.candidates[c] == report.chosen ? "1" : "0"});
        hdts::write_csv(fs::path(out_dir) / "block_size.csv", rows);
    }
    return 0;
}

int gauss_lab_command(std::size_t n, std::size_t p, double beta0, std::size_t reps,
                      std::size_t grid, std::uint64_t seed, std::optional<std::size_t> workers,
                      const std::string& out_dir) {
    hdts::ExperimentConfig cell;
    cell.experiment = hdts::Experiment::Fig1;
    cell.model = hdts::DgpModel::ArchFig1;
    cell.n = n;
    cell.p = p;
    cell.beta0 = beta0;
    cell.mc_reps = reps;
    cell.grid_size = grid;
    cell.seed = seed;
    cell.workers = hdts::effective_workers(0, workers);
    {
        std::ostringstream label;
        label << "p=" << p << ",beta0=" << hdts::format_fixed(beta0, 1);
        cell.label = label.str();
    }

    fs::create_directories(out_dir);
    const hdts::ExperimentOutput out = hdts::run_experiment(cell);
    hdts::emit_csv(out.table, fs::path(out_dir) / "results.csv");
    hdts::write_meta_json(out.table, fs::path(out_dir) / "meta.json");
    hdts::emit_ppcurves_csv(out.curves, fs::path(out_dir) / "ppcurve.csv");

    for (const auto& row : out.table.rows)
        std::cout << row.metric << " = " << hdts::format_full(row.value) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bootstrap inference for high-dimensional weakly dependent time series"};
    app.require_subcommand(1);

    // run
    std::string preset_name, config_path, out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> workers_override, mc_override, breps_override;
    auto* run = app.add_subcommand("run", "Run an experiment preset or config file");
    run->add_option("--preset", preset_name, "Preset name (see list-presets)");
    run->add_option("--config", config_path, "Config file (.toml flat keys or .json)");
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--seed", seed_override, "Override the seed");
    run->add_option("--workers", workers_override, "Worker threads (0 = auto)");
    run->add_option("--mc-reps", mc_override, "Override Monte Carlo replications");
    run->add_option("--b-reps", breps_override, "Override bootstrap resamples");

    // select-block-size
    std::string data_path, select_out;
    std::size_t b_int = 6, b_outer = 500, sel_b_reps = 499, iterations = 1;
    double sel_alpha = 0.05;
    std::uint64_t sel_seed = 20240801;
    std::vector<std::size_t> candidates{4, 6, 8, 10, 12, 15, 20};
    auto* select = app.add_subcommand("select-block-size",
                                      "Data-driven block size selection on a CSV panel");
    select->add_option("--data", data_path, "CSV matrix, one time point per row")->required();
    select->add_option("--b-int", b_int, "Initial block size")->capture_default_str();
    select->add_option("--candidates", candidates, "Candidate block sizes")
        ->delimiter(',')
        ->capture_default_str();
    select->add_option("--b-outer", b_outer, "Pseudo-series count")->capture_default_str();
    select->add_option("--b-reps", sel_b_reps, "Bootstrap resamples per band")
        ->capture_default_str();
    select->add_option("--alpha", sel_alpha, "Nominal level")->capture_default_str();
    select->add_option("--seed", sel_seed, "Seed")->capture_default_str();
    select->add_option("--iterations", iterations, "Selector iterations")->capture_default_str();
    std::optional<std::size_t> sel_workers;
    select->add_option("--workers", sel_workers, "Worker threads (0 = auto)");
    select->add_option("--out", select_out, "Optional output directory");

    // gauss-lab
    std::size_t gl_n = 60, gl_p = 100, gl_reps = 5000, gl_grid = 99;
    double gl_beta0 = 0.0;
    std::uint64_t gl_seed = 20240801;
    std::string gl_out = "out";
    std::optional<std::size_t> gl_workers;
    auto* gauss = app.add_subcommand(
        "gauss-lab", "Gaussian-approximation diagnostics (P-P curve, Kolmogorov distance)");
    gauss->add_option("--n", gl_n, "Time points")->capture_default_str();
    gauss->add_option("--p", gl_p, "Dimension")->capture_default_str();
    gauss->add_option("--beta0", gl_beta0, "ARCH dependence strength")->capture_default_str();
    gauss->add_option("--reps", gl_reps, "Monte Carlo draws per side")->capture_default_str();
    gauss->add_option("--grid", gl_grid, "P-P grid size")->capture_default_str();
    gauss->add_option("--seed", gl_seed, "Seed")->capture_default_str();
    gauss->add_option("--workers", gl_workers, "Worker threads (0 = auto)");
    gauss->add_option("--out", gl_out, "Output directory")->capture_default_str();

    auto* list = app.add_subcommand("list-presets", "List the built-in experiment presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(preset_name, config_path, out_dir, seed_override,
                               workers_override, mc_override, breps_override);
        if (select->parsed())
            return select_command(data_path, b_int, candidates, b_outer, sel_b_reps, sel_alpha,
                                  sel_seed, iterations, sel_workers, select_out);
        if (gauss->parsed())
            return gauss_lab_command(gl_n, gl_p, gl_beta0, gl_reps, gl_grid, gl_seed, gl_workers,
                                     gl_out);
        if (list->parsed()) {
            for (const auto& preset : hdts::all_presets())
                std::cout << preset.name << "  (" << preset.cells.size() << " cells)  "
                          << preset.description << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
