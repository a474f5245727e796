// The command layer: size/flag parsing, report structure, and the
// generate / interpolate / bench / raster commands driven through files.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aidw/cli.hpp"

using namespace aidw;
using namespace aidw::cli;

namespace {

std::filesystem::path scratch_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "aidw_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Generate a data/query file pair and return a config pointing at them.
RunConfig seeded_config(std::size_t m, std::size_t n, const std::string& tag) {
    const BoundingBox box{0.0, 0.0, 1.0, 1.0};
    const auto data_path = scratch_file(tag + "_data.csv");
    const auto query_path = scratch_file(tag + "_queries.csv");
    cmd_generate(m, box, 100, ValueRule::uniform, GenerateKind::data, data_path.string());
    cmd_generate(n, box, 101, ValueRule::uniform, GenerateKind::queries, query_path.string());
    RunConfig cfg;
    cfg.data_path = data_path.string();
    cfg.queries_path = query_path.string();
    return cfg;
}

}  // namespace

TEST_CASE("size specs use the 1024 convention") {
    REQUIRE(parse_size_spec("10K") == 10240);
    REQUIRE(parse_size_spec("50k") == 51200);
    REQUIRE(parse_size_spec("100K") == 102400);
    REQUIRE(parse_size_spec("7") == 7);
    REQUIRE_THROWS_AS(parse_size_spec(""), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_size_spec("K"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_size_spec("0"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_size_spec("12Q"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_size_spec("1.5K"), std::invalid_argument);

    REQUIRE(parse_size_ladder("10K,50K,100K") ==
            std::vector<std::size_t>{10240, 51200, 102400});
    REQUIRE(parse_size_ladder("3") == std::vector<std::size_t>{3});
    REQUIRE_THROWS_AS(parse_size_ladder("10K,,50K"), std::invalid_argument);
}

TEST_CASE("alpha level lists need exactly five entries") {
    REQUIRE(parse_alpha_levels("1,2,3,4,5") == std::array<double, 5>{1, 2, 3, 4, 5});
    REQUIRE(parse_alpha_levels("0.5,1.0,2.0,3.0,4.0") ==
            std::array<double, 5>{0.5, 1.0, 2.0, 3.0, 4.0});
    REQUIRE_THROWS_AS(parse_alpha_levels("1,2,3,4"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_alpha_levels("1,2,3,4,5,6"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_alpha_levels("1,2,x,4,5"), std::invalid_argument);
}

TEST_CASE("mode, engine, and variant names round-trip") {
    REQUIRE(parse_mode("idw") == Mode::idw);
    REQUIRE(parse_mode("aidw") == Mode::aidw);
    REQUIRE_THROWS_AS(parse_mode("magic"), std::invalid_argument);
    REQUIRE(parse_engine("grid") == KnnEngine::grid);
    REQUIRE(parse_engine("brute") == KnnEngine::brute);
    REQUIRE_THROWS_AS(parse_engine("octree"), std::invalid_argument);
    REQUIRE(parse_variant("naive") == Variant::naive);
    REQUIRE(parse_variant("blocked") == Variant::blocked);
    REQUIRE_THROWS_AS(parse_variant("tiled"), std::invalid_argument);
    REQUIRE(std::string(mode_name(Mode::aidw)) == "aidw");
    REQUIRE(std::string(engine_name(KnnEngine::brute)) == "brute");
    REQUIRE(std::string(variant_name(Variant::naive)) == "naive");
}

TEST_CASE("workload percentages sum to exactly 100") {
    StageTimings timings;
    timings.build_millis = 13.0;
    timings.knn_millis = 29.0;
    timings.interp_millis = 171.0;
    const WorkloadPercent shares = workload_percent(timings);
    REQUIRE(shares.build + shares.knn + shares.interp == 100.0);
    REQUIRE(shares.interp > shares.knn);

    const WorkloadPercent zero = workload_percent(StageTimings{});
    REQUIRE(zero.build == 0.0);
    REQUIRE(zero.knn == 0.0);
    REQUIRE(zero.interp == 0.0);
}

TEST_CASE("cmd_generate writes deterministic files") {
    const BoundingBox box{0.0, 0.0, 1.0, 1.0};
    const auto path_a = scratch_file("gen_a.csv");
    const auto path_b = scratch_file("gen_b.csv");

    cmd_generate(100, box, 7, ValueRule::planar, GenerateKind::data, path_a.string());
    cmd_generate(100, box, 7, ValueRule::planar, GenerateKind::data, path_b.string());
    REQUIRE(slurp(path_a) == slurp(path_b));

    SECTION("count = 1 data file is header plus one row") {
        const auto tiny = scratch_file("gen_tiny.csv");
        cmd_generate(1, box, 7, ValueRule::uniform, GenerateKind::data, tiny.string());
        std::istringstream lines(slurp(tiny));
        std::string line;
        int count = 0;
        while (std::getline(lines, line)) {
            ++count;
        }
        REQUIRE(count == 2);
    }

    SECTION("query files carry two columns") {
        const auto queries = scratch_file("gen_q.csv");
        cmd_generate(10, box, 7, ValueRule::uniform, GenerateKind::queries, queries.string());
        const PointSet loaded = read_query_csv(queries.string());
        REQUIRE(loaded.count() == 10);
        REQUIRE_FALSE(loaded.has_values());
    }
}

TEST_CASE("cmd_interpolate runs the pipeline and writes reports") {
    RunConfig cfg = seeded_config(600, 40, "interp");
    cfg.out_path = scratch_file("interp_out.csv").string();
    cfg.report_path = scratch_file("interp_report.json").string();
    cfg.params.k = 10;

    const InterpolateOutcome outcome = cmd_interpolate(cfg);
    REQUIRE(outcome.pipeline.result.predicted.size() == 40);
    REQUIRE(outcome.pipeline.k_effective == 10);

    SECTION("the result CSV re-parses with matching row count") {
        std::istringstream lines(slurp(cfg.out_path));
        std::string line;
        std::getline(lines, line);
        REQUIRE(line == "x,y,alpha,z_pred");
        int rows = 0;
        while (std::getline(lines, line)) {
            ++rows;
        }
        REQUIRE(rows == 40);
    }

    SECTION("the report embeds version, config echo, and stage times") {
        const nlohmann::json report = nlohmann::json::parse(slurp(cfg.report_path));
        REQUIRE(report["version"] == kVersion);
        REQUIRE(report["config"]["k"] == 10);
        REQUIRE(report["config"]["mode"] == "aidw");
        REQUIRE(report["run"]["sizes"]["m"] == 600);
        REQUIRE(report["run"]["sizes"]["n"] == 40);
        REQUIRE(report["run"]["timings_ms"].contains("knn"));
        REQUIRE(report["run"]["timings_ms"].contains("interp"));
        REQUIRE(report["run"]["timings_ms"].contains("total"));
        const auto& shares = report["run"]["workload_percent"];
        const double sum = shares["build"].get<double>() + shares["knn"].get<double>() +
                           shares["interp"].get<double>();
        REQUIRE(std::abs(sum - 100.0) <= 0.1);
    }
}

TEST_CASE("cmd_interpolate equivalences") {
    SECTION("equal alpha levels reproduce constant IDW exactly") {
        RunConfig adaptive = seeded_config(500, 30, "collapse");
        adaptive.mode = Mode::aidw;
        adaptive.params.alpha_levels = {2.0, 2.0, 2.0, 2.0, 2.0};
        RunConfig constant = adaptive;
        constant.mode = Mode::idw;
        constant.alpha = 2.0;

        const auto a = cmd_interpolate(adaptive);
        const auto b = cmd_interpolate(constant);
        REQUIRE(a.pipeline.result.predicted == b.pipeline.result.predicted);
        REQUIRE(b.pipeline.timings.knn_millis == 0.0);
        REQUIRE(b.pipeline.timings.build_millis == 0.0);
    }

    SECTION("grid and brute engines give identical predictions") {
        RunConfig grid_cfg = seeded_config(500, 30, "engines");
        grid_cfg.knn_engine = KnnEngine::grid;
        RunConfig brute_cfg = grid_cfg;
        brute_cfg.knn_engine = KnnEngine::brute;

        const auto g = cmd_interpolate(grid_cfg);
        const auto b = cmd_interpolate(brute_cfg);
        for (std::size_t i = 0; i < 30; ++i) {
            REQUIRE(g.pipeline.result.predicted[i] ==
                    Catch::Approx(b.pipeline.result.predicted[i]).epsilon(1.0e-9));
        }
    }

    SECTION("k beyond the data size clamps") {
        RunConfig cfg = seeded_config(8, 5, "clamp");
        cfg.params.k = 64;
        const auto outcome = cmd_interpolate(cfg);
        REQUIRE(outcome.pipeline.k_effective == 8);
        REQUIRE(outcome.pipeline.result.predicted.size() == 5);
    }

    SECTION("missing paths are rejected") {
        RunConfig cfg;
        REQUIRE_THROWS_AS(cmd_interpolate(cfg), std::invalid_argument);
    }
}

TEST_CASE("cmd_bench times every engine and variant per rung") {
    RunConfig cfg;
    cfg.params.k = 10;
    cfg.seed = 11;
    const auto rows = cmd_bench(cfg, {300, 600});
    REQUIRE(rows.size() == 2);
    for (const BenchRow& row : rows) {
        REQUIRE_FALSE(row.failed);
        REQUIRE(row.m == row.n);
        REQUIRE(row.k == 10);
        REQUIRE(row.build_ms >= 0.0);
        REQUIRE(row.knn_grid_ms > 0.0);
        REQUIRE(row.knn_brute_ms > 0.0);
        REQUIRE(row.interp_naive_ms > 0.0);
        REQUIRE(row.interp_blocked_ms > 0.0);
        REQUIRE(std::abs(row.build_share_pct + row.knn_share_pct + row.interp_share_pct -
                         100.0) <= 0.1);
        REQUIRE(row.e2e_grid_ms == row.build_ms + row.knn_grid_ms + row.interp_blocked_ms);
        REQUIRE(row.e2e_brute_ms == row.knn_brute_ms + row.interp_blocked_ms);
    }

    SECTION("bench CSV and JSON report") {
        const auto csv_path = scratch_file("bench.csv");
        write_bench_csv(csv_path.string(), rows);
        std::istringstream lines(slurp(csv_path));
        std::string line;
        std::getline(lines, line);
        REQUIRE(line.find("knn_ratio") != std::string::npos);
        int count = 0;
        while (std::getline(lines, line)) {
            ++count;
        }
        REQUIRE(count == 2);

        const nlohmann::json report = bench_to_json(cfg, rows);
        REQUIRE(report["version"] == kVersion);
        REQUIRE(report["rows"].size() == 2);
        REQUIRE(report["config"].contains("cell_factor"));
    }

    SECTION("a failing rung does not stop later rungs") {
        RunConfig failing = cfg;
        failing.cell_factor = -1.0;  // breaks grid construction at every size
        const auto bad_rows = cmd_bench(failing, {100, 200});
        REQUIRE(bad_rows.size() == 2);
        REQUIRE(bad_rows[0].failed);
        REQUIRE(bad_rows[1].failed);
        REQUIRE_FALSE(bad_rows[0].error.empty());
    }
}

TEST_CASE("cmd_raster interpolates a lattice over the data bbox") {
    SECTION("1x1 raster over a single data point returns its value") {
        const auto data_path = scratch_file("raster_one.csv");
        PointSet one;
        one.add(2.0, 3.0, 7.5);
        write_data_csv(data_path.string(), one);

        RunConfig cfg;
        cfg.mode = Mode::idw;  // adaptive alpha is undefined for a zero-area region
        cfg.data_path = data_path.string();
        cfg.out_path = scratch_file("raster_one.asc").string();
        const RasterOutcome outcome = cmd_raster(cfg, 1, 1);
        REQUIRE(outcome.raster.values == std::vector<double>{7.5});

        const Raster loaded = parse_raster_asc(cfg.out_path);
        REQUIRE(loaded.ncols == 1);
        REQUIRE(loaded.nrows == 1);
        REQUIRE(loaded.values == outcome.raster.values);
    }

    SECTION("planar raster recovers the plane in the interior") {
        const auto data_path = scratch_file("raster_planar.csv");
        write_data_csv(data_path.string(),
                       generate_random_points(4096, BoundingBox{0.0, 0.0, 1.0, 1.0}, 5,
                                              ValueRule::planar));
        RunConfig cfg;
        cfg.data_path = data_path.string();
        const RasterOutcome outcome = cmd_raster(cfg, 16, 16);
        REQUIRE(outcome.raster.ncols == 16);
        REQUIRE(outcome.raster.nrows == 16);
        REQUIRE(outcome.raster.values.size() == 256);

        // Interior cells only (two-cell margin); the raster is written
        // north-first, so row r sits at y = (nrows - 1 - r + 0.5) * cellsize.
        for (std::size_t r = 2; r < 14; ++r) {
            for (std::size_t c = 2; c < 14; ++c) {
                const double x = (static_cast<double>(c) + 0.5) / 16.0;
                const double y = (static_cast<double>(16 - 1 - r) + 0.5) / 16.0;
                const double truth = planar_field(x, y);
                const double got = outcome.raster.values[r * 16 + c];
                REQUIRE(std::abs(got - truth) <= 0.05 * std::abs(truth));
            }
        }
    }

    SECTION("argument validation") {
        RunConfig cfg;
        REQUIRE_THROWS_AS(cmd_raster(cfg, 0, 4), std::invalid_argument);
        cfg.data_path = "does_not_exist.csv";
        REQUIRE_THROWS_AS(cmd_raster(cfg, 4, 4), std::runtime_error);
    }
}
