#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hdts/harness.hpp"

using namespace hdts;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_band_config() {
    ExperimentConfig c;
    c.experiment = Experiment::Table1;
    c.label = "small";
    c.model = DgpModel::Var1;
    c.error_case = ErrorCase::CommonFactor;
    c.n = 24;
    c.p = 3;
    c.rho = 0.2;
    c.burn_in = 20;
    c.block_sizes = {2, 4};
    c.alphas = {0.10, 0.05};
    c.mc_reps = 40;
    c.b_reps = 49;
    c.seed = 99;
    return c;
}

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "hdts_test_out";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("a single replication reports 0 or 100 percent") {
    ExperimentConfig c = small_band_config();
    c.mc_reps = 1;
    const ExperimentOutput out = run_experiment(c);
    for (const ResultRow& row : out.table.rows) {
        const bool degenerate = row.value == 0.0 || row.value == 100.0;
        CHECK(degenerate);
        CHECK(row.se == 0.0);
    }
}

TEST_CASE("results do not depend on the worker count") {
    ExperimentConfig serial = small_band_config();
    serial.workers = 1;
    ExperimentConfig threaded = small_band_config();
    threaded.workers = 4;

    const auto a = run_experiment(serial);
    const auto b = run_experiment(threaded);
    REQUIRE(a.table.rows.size() == b.table.rows.size());
    for (std::size_t i = 0; i < a.table.rows.size(); ++i) {
        CHECK(a.table.rows[i].value == b.table.rows[i].value);
        CHECK(a.table.rows[i].se == b.table.rows[i].se);
    }

    ExperimentConfig wn = small_band_config();
    wn.experiment = Experiment::Table3;
    wn.num_lags = 2;
    wn.workers = 1;
    ExperimentConfig wn4 = wn;
    wn4.workers = 4;
    const auto c = run_experiment(wn);
    const auto d = run_experiment(wn4);
    for (std::size_t i = 0; i < c.table.rows.size(); ++i)
        CHECK(c.table.rows[i].value == d.table.rows[i].value);
}

TEST_CASE("row count is the block-size by alpha grid") {
    const ExperimentOutput out = run_experiment(small_band_config());
    CHECK(out.table.rows.size() == 2 * 2);
    for (const ResultRow& row : out.table.rows) {
        CHECK(row.metric == "coverage_pct");
        CHECK(row.value >= 0.0);
        CHECK(row.value <= 100.0);
    }
}

TEST_CASE("reported standard errors follow the binomial formula") {
    const ExperimentOutput out = run_experiment(small_band_config());
    for (const ResultRow& row : out.table.rows) {
        const double phat = row.value / 100.0;
        CHECK(row.se == 100.0 * std::sqrt(phat * (1.0 - phat) / 40.0));
    }
}

TEST_CASE("csv emission round-trips and prints percentages at one decimal") {
    const fs::path dir = temp_dir();
    const fs::path path = dir / "results.csv";

    ResultTable empty;
    emit_csv(empty, path);
    auto rows = read_csv(path);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == std::vector<std::string>{"cell", "b_n", "alpha", "metric", "value", "se"});

    const ExperimentOutput out = run_experiment(small_band_config());
    emit_csv(out.table, path);
    rows = read_csv(path);
    REQUIRE(rows.size() == out.table.rows.size() + 1);
    for (std::size_t i = 0; i < out.table.rows.size(); ++i) {
        const double value = std::stod(rows[i + 1][4]);
        const double rounded = std::round(out.table.rows[i].value * 10.0) / 10.0;
        CHECK(value == rounded);
        CHECK(std::stod(rows[i + 1][5]) == out.table.rows[i].se);
    }
}

TEST_CASE("meta json carries the run provenance") {
    const fs::path dir = temp_dir();
    ExperimentConfig c = small_band_config();
    const ExperimentOutput out = run_experiment(c);
    write_meta_json(out.table, dir / "meta.json");

    std::ifstream in(dir / "meta.json");
    nlohmann::json doc;
    in >> doc;
    CHECK(doc["seed"].get<std::uint64_t>() == 99);
    CHECK(doc["mc_reps"].get<std::size_t>() == 40);
    CHECK(doc["config_hash"].get<std::string>().size() == 16);
    CHECK(doc.contains("git_hash"));
    CHECK(doc.contains("wall_time_sec"));
}

TEST_CASE("config hash distinguishes configs") {
    ExperimentConfig a = small_band_config();
    ExperimentConfig b = a;
    CHECK(a.canonical() == b.canonical());
    b.seed = 100;
    CHECK(a.canonical() != b.canonical());
}

TEST_CASE("toml config parsing") {
    const fs::path dir = temp_dir();
    const fs::path path = dir / "config.toml";
    {
        std::ofstream out(path);
        out << "# comment line\n"
            << "experiment = \"table3\"\n"
            << "model = \"march\"\n"
            << "n = 60\n"
            << "p = 30\n"
            << "L = 3\n"
            << "block_sizes = [1, 2, 3]\n"
            << "alphas = [0.10, 0.05]\n"
            << "mc_reps = 200   # trailing comment\n"
            << "b_reps = 99\n"
            << "seed = 12345\n"
            << "label = \"march cell\"\n";
    }
    const ExperimentConfig c = parse_config_file(path);
    CHECK(c.experiment == Experiment::Table3);
    CHECK(c.model == DgpModel::MArch);
    CHECK(c.n == 60);
    CHECK(c.num_lags == 3);
    CHECK(c.block_sizes == std::vector<std::size_t>{1, 2, 3});
    CHECK(c.alphas == std::vector<double>{0.10, 0.05});
    CHECK(c.mc_reps == 200);
    CHECK(c.seed == 12345);
    CHECK(c.label == "march cell");
}

TEST_CASE("json config parsing") {
    const fs::path dir = temp_dir();
    const fs::path path = dir / "config.json";
    {
        std::ofstream out(path);
        out << R"({"experiment": "table1", "model": "var1", "error_case": "ma_gamma",
                   "n": 120, "p": 500, "rho": 0.5, "block_sizes": [4, 10],
                   "alphas": [0.05], "mc_reps": 10, "b_reps": 19, "seed": 7})";
    }
    const ExperimentConfig c = parse_config_file(path);
    CHECK(c.experiment == Experiment::Table1);
    CHECK(c.error_case == ErrorCase::MaGamma);
    CHECK(c.rho == 0.5);
    CHECK(c.block_sizes == std::vector<std::size_t>{4, 10});
}

TEST_CASE("unknown config keys are hard errors") {
    const fs::path dir = temp_dir();
    const fs::path toml = dir / "bad.toml";
    {
        std::ofstream out(toml);
        out << "mc_repz = 100\n";
    }
    CHECK_THROWS_AS(parse_config_file(toml), ConfigError);

    const fs::path json = dir / "bad.json";
    {
        std::ofstream out(json);
        out << R"({"block_size": [4]})";
    }
    CHECK_THROWS_AS(parse_config_file(json), ConfigError);

    const fs::path types = dir / "types.toml";
    {
        std::ofstream out(types);
        out << "n = \"sixty\"\n";
    }
    CHECK_THROWS_AS(parse_config_file(types), ConfigError);
}

TEST_CASE("config validation rejects bad grids") {
    ExperimentConfig c = small_band_config();
    c.block_sizes = {30};  // bigger than n = 24
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    c = small_band_config();
    c.alphas = {1.5};
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    c = small_band_config();
    c.mc_reps = 0;
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    c = small_band_config();
    c.experiment = Experiment::Custom;
    c.test = "banded";  // unknown procedure
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

TEST_CASE("worker override order: flag beats environment beats config") {
    unsetenv("HDTS_WORKERS");
    CHECK(effective_workers(3, std::nullopt) == 3);
    setenv("HDTS_WORKERS", "5", 1);
    CHECK(effective_workers(3, std::nullopt) == 5);
    CHECK(effective_workers(3, std::size_t{7}) == 7);
    setenv("HDTS_WORKERS", "abc", 1);
    CHECK_THROWS_AS(effective_workers(3, std::nullopt), ConfigError);
    unsetenv("HDTS_WORKERS");
}

TEST_CASE("presets cover the study grid") {
    CHECK(find_preset("table1").cells.size() == 12);
    CHECK(find_preset("table3").cells.size() == 12);
    CHECK(find_preset("fig1").cells.size() == 9);
    CHECK(find_preset("table2").cells.size() == 6);
    CHECK_THROWS_AS(find_preset("table9"), ConfigError);

    for (const auto& preset : all_presets())
        for (const auto& cell : preset.cells) CHECK_NOTHROW(cell.validate());
}

TEST_CASE("custom one-shot run on a stored panel") {
    const fs::path dir = temp_dir();
    const fs::path csv = dir / "panel.csv";
    {
        std::ofstream out(csv);
        RngStream s(17);
        for (int i = 0; i < 40; ++i)
            out << s.next_normal() << "," << s.next_normal() << "," << s.next_normal() << "\n";
    }
    ExperimentConfig c;
    c.experiment = Experiment::Custom;
    c.test = "white_noise";
    c.data_csv = csv.string();
    c.label = "oneshot";
    c.n = 40;
    c.p = 3;
    c.num_lags = 1;
    c.block_sizes = {2};
    c.alphas = {0.10};
    c.b_reps = 99;
    const ExperimentOutput out = run_experiment(c);
    REQUIRE(out.table.rows.size() == 4);
    CHECK(out.table.rows[0].metric == "statistic");
    CHECK(out.table.rows[2].metric == "p_value");
}

TEST_CASE("fig1 experiment produces curves and summary rows") {
    ExperimentConfig c;
    c.experiment = Experiment::Fig1;
    c.model = DgpModel::ArchFig1;
    c.label = "tiny";
    c.n = 20;
    c.p = 5;
    c.beta0 = 0.2;
    c.mc_reps = 200;
    c.grid_size = 19;
    c.seed = 31;
    const ExperimentOutput out = run_experiment(c);
    REQUIRE(out.curves.size() == 1);
    CHECK(out.curves[0].second.grid.size() == 19);
    REQUIRE(out.table.rows.size() == 2);
    CHECK(out.table.rows[0].metric == "pp_max_dev");
    CHECK(out.table.rows[1].metric == "ks_distance");

    const fs::path dir = temp_dir();
    emit_ppcurves_csv(out.curves, dir / "ppcurve.csv");
    const auto rows = read_csv(dir / "ppcurve.csv");
    CHECK(rows.size() == 1 + 19);
}
