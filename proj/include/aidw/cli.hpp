#pragma once

// Pipeline orchestration behind the command-line tool: run configuration,
// the generate/interpolate/bench/raster commands, and machine-readable
// reports. Argument parsing itself lives in the tool; everything here takes
// parsed values so the commands stay directly testable.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aidw/aidw.hpp"

namespace aidw::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Which interpolation pipeline runs.
enum class Mode { idw, aidw };

/// Every tunable of one pipeline run. Fully serializable; echoed into every
/// report so a run can be reproduced from its report alone.
struct RunConfig {
    Mode mode = Mode::aidw;
    KnnEngine knn_engine = KnnEngine::grid;
    Variant variant = Variant::blocked;
    AidwParams params;           ///< k, rMin, rMax, alpha levels, area
    double alpha = 2.0;          ///< constant exponent for idw mode
    double cell_factor = 4.0;    ///< cellWidth = factor * expected NN distance
    int workers = 1;             ///< 0 = all hardware threads
    std::uint64_t seed = 42;
    std::string data_path;
    std::string queries_path;
    std::string out_path;
    std::string report_path;
};

// ---------------------------------------------------------------------------
// Enum and size-spec parsing
// ---------------------------------------------------------------------------

inline Mode parse_mode(const std::string& text) {
    if (text == "idw") return Mode::idw;
    if (text == "aidw") return Mode::aidw;
    throw std::invalid_argument("unknown mode '" + text + "' (expected idw|aidw)");
}

inline KnnEngine parse_engine(const std::string& text) {
    if (text == "grid") return KnnEngine::grid;
    if (text == "brute") return KnnEngine::brute;
    throw std::invalid_argument("unknown knn engine '" + text + "' (expected grid|brute)");
}

inline Variant parse_variant(const std::string& text) {
    if (text == "naive") return Variant::naive;
    if (text == "blocked") return Variant::blocked;
    throw std::invalid_argument("unknown variant '" + text + "' (expected naive|blocked)");
}

inline const char* mode_name(Mode mode) { return mode == Mode::idw ? "idw" : "aidw"; }
inline const char* engine_name(KnnEngine engine) {
    return engine == KnnEngine::grid ? "grid" : "brute";
}
inline const char* variant_name(Variant variant) {
    return variant == Variant::naive ? "naive" : "blocked";
}

/// Point-count spec: a plain integer, or one with a K suffix meaning
/// exactly 1024 (so "10K" is 10240 points).
inline std::size_t parse_size_spec(const std::string& text) {
    if (text.empty()) {
        throw std::invalid_argument("empty size spec");
    }
    std::string digits = text;
    std::size_t scale = 1;
    if (digits.back() == 'K' || digits.back() == 'k') {
        digits.pop_back();
        scale = 1024;
    }
    std::size_t consumed = 0;
    unsigned long long value = 0;
    try {
        value = std::stoull(digits, &consumed);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad size spec '" + text + "'");
    }
    if (consumed != digits.size() || value == 0) {
        throw std::invalid_argument("bad size spec '" + text + "'");
    }
    return static_cast<std::size_t>(value) * scale;
}

/// Comma-separated size ladder, e.g. "10K,50K,100K".
inline std::vector<std::size_t> parse_size_ladder(const std::string& text) {
    std::vector<std::size_t> sizes;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t comma = text.find(',', begin);
        const std::size_t end = comma == std::string::npos ? text.size() : comma;
        sizes.push_back(parse_size_spec(text.substr(begin, end - begin)));
        if (comma == std::string::npos) {
            break;
        }
        begin = comma + 1;
    }
    if (sizes.empty()) {
        throw std::invalid_argument("empty size ladder");
    }
    return sizes;
}

/// Five comma-separated alpha levels.
inline std::array<double, 5> parse_alpha_levels(const std::string& text) {
    std::array<double, 5> levels{};
    std::size_t begin = 0;
    for (std::size_t slot = 0; slot < 5; ++slot) {
        const std::size_t comma = text.find(',', begin);
        const bool last = slot == 4;
        if (last != (comma == std::string::npos)) {
            throw std::invalid_argument("alpha levels need exactly 5 comma-separated values");
        }
        const std::size_t end = comma == std::string::npos ? text.size() : comma;
        try {
            levels[slot] = std::stod(text.substr(begin, end - begin));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad alpha level in '" + text + "'");
        }
        begin = end + 1;
    }
    return levels;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    return nlohmann::json{
        {"mode", mode_name(cfg.mode)},
        {"knn", engine_name(cfg.knn_engine)},
        {"variant", variant_name(cfg.variant)},
        {"k", cfg.params.k},
        {"alpha_levels", cfg.params.alpha_levels},
        {"alpha", cfg.alpha},
        {"rmin", cfg.params.r_min},
        {"rmax", cfg.params.r_max},
        {"area", cfg.params.area},
        {"cell_factor", cfg.cell_factor},
        {"workers", cfg.workers},
        {"seed", cfg.seed},
        {"data", cfg.data_path},
        {"queries", cfg.queries_path},
        {"out", cfg.out_path},
        {"report", cfg.report_path},
    };
}

/// Stage workload shares in percent, summing to exactly 100 over the three
/// reported stages (build, knn, interp). All zeros when nothing was timed.
struct WorkloadPercent {
    double build = 0.0;
    double knn = 0.0;
    double interp = 0.0;
};

inline WorkloadPercent workload_percent(const StageTimings& timings) {
    const double sum = timings.build_millis + timings.knn_millis + timings.interp_millis;
    if (!(sum > 0.0)) {
        return {};
    }
    WorkloadPercent shares;
    shares.build = 100.0 * timings.build_millis / sum;
    shares.knn = 100.0 * timings.knn_millis / sum;
    shares.interp = 100.0 - shares.build - shares.knn;
    return shares;
}

inline nlohmann::json timings_to_json(const StageTimings& timings, double parse_millis) {
    const WorkloadPercent shares = workload_percent(timings);
    return nlohmann::json{
        {"sizes", {{"m", timings.m}, {"n", timings.n}, {"k", timings.k}}},
        {"workers", timings.worker_count},
        {"timings_ms",
         {{"parse", parse_millis},
          {"build", timings.build_millis},
          {"knn", timings.knn_millis},
          {"interp", timings.interp_millis},
          {"total", timings.total_millis},
          {"slack", timings.slack_millis()}}},
        {"workload_percent",
         {{"build", shares.build}, {"knn", shares.knn}, {"interp", shares.interp}}},
    };
}

// ---------------------------------------------------------------------------
// Pipeline core (shared by interpolate, raster, bench)
// ---------------------------------------------------------------------------

/// Result of one pipeline run over in-memory point sets.
struct PipelineOutcome {
    InterpolationResult result;
    StageTimings timings;
    int k_effective = 0;  ///< k after clamping to the data-set size
};

/// Run the configured pipeline: (grid build ->) kNN stage -> weighted
/// interpolation. The idw mode has no kNN stage at all — the constant
/// exponent needs no neighbor statistics — so build and knn report 0 ms.
/// A k larger than the data set is clamped to it.
inline PipelineOutcome run_pipeline(const PointSet& data, const PointSet& queries,
                                    const RunConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    const int workers = resolve_workers(cfg.workers);

    PipelineOutcome outcome;
    outcome.timings.m = data.count();
    outcome.timings.n = queries.count();
    outcome.timings.worker_count = workers;

    if (cfg.mode == Mode::idw) {
        outcome.k_effective = 0;
        outcome.timings.k = 0;
        auto interp = time_stage("interp", [&] {
            return idw_predict_all(queries, data, cfg.alpha, cfg.variant, workers);
        });
        outcome.timings.interp_millis = interp.millis;
        outcome.result = std::move(interp.value);
    } else {
        AidwParams params = cfg.params;
        params.k = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(params.k), data.count()));
        outcome.k_effective = params.k;
        outcome.timings.k = params.k;

        GridIndex index;
        if (cfg.knn_engine == KnnEngine::grid) {
            const BoundingBox bbox = compute_bbox(data, queries);
            const double width = choose_cell_width(data, bbox, cfg.cell_factor);
            auto built = time_stage("build", [&] {
                return build_index(data, make_grid_config(bbox, width));
            });
            outcome.timings.build_millis = built.millis;
            index = std::move(built.value);
        }
        auto knn = time_stage("knn", [&] {
            return knn_stage(queries, cfg.knn_engine == KnnEngine::grid ? &index : nullptr, data,
                             params.k, cfg.knn_engine, workers);
        });
        outcome.timings.knn_millis = knn.millis;
        auto interp = time_stage("interp", [&] {
            return aidw_predict_all(queries, data, knn.value, params, cfg.variant, workers);
        });
        outcome.timings.interp_millis = interp.millis;
        outcome.result = std::move(interp.value);
    }

    const auto t_stop = std::chrono::steady_clock::now();
    outcome.timings.total_millis =
        std::chrono::duration<double, std::milli>(t_stop - t_start).count();
    return outcome;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Which point-file layout cmd_generate writes.
enum class GenerateKind { data, queries };

/// Deterministically generate a point file.
inline PointSet cmd_generate(std::size_t count, const BoundingBox& bbox, std::uint64_t seed,
                             ValueRule rule, GenerateKind kind, const std::string& out_path) {
    PointSet set = kind == GenerateKind::data ? generate_random_points(count, bbox, seed, rule)
                                              : generate_random_queries(count, bbox, seed);
    if (!out_path.empty()) {
        if (kind == GenerateKind::data) {
            write_data_csv(out_path, set);
        } else {
            write_query_csv(out_path, set);
        }
    }
    return set;
}

/// Outcome of cmd_interpolate: pipeline results plus the report document.
struct InterpolateOutcome {
    PipelineOutcome pipeline;
    double parse_millis = 0.0;
    nlohmann::json report;
};

/// Full file-to-file run: ingest CSVs, run the pipeline, write the result
/// CSV and the JSON report (paths optional; empty means skip).
inline InterpolateOutcome cmd_interpolate(const RunConfig& cfg) {
    if (cfg.data_path.empty() || cfg.queries_path.empty()) {
        throw std::invalid_argument("cmd_interpolate: data and queries paths are required");
    }
    auto parsed = time_stage("parse", [&] {
        PointSet data = read_data_csv(cfg.data_path);
        PointSet queries = read_query_csv(cfg.queries_path);
        return std::pair{std::move(data), std::move(queries)};
    });
    const auto& [data, queries] = parsed.value;

    InterpolateOutcome outcome;
    outcome.pipeline = run_pipeline(data, queries, cfg);
    outcome.parse_millis = parsed.millis;
    outcome.report = nlohmann::json{{"version", kVersion},
                                    {"config", config_to_json(cfg)},
                                    {"k_effective", outcome.pipeline.k_effective},
                                    {"run", timings_to_json(outcome.pipeline.timings,
                                                            outcome.parse_millis)}};
    if (!cfg.out_path.empty()) {
        write_result_csv(cfg.out_path, queries, outcome.pipeline.result);
    }
    if (!cfg.report_path.empty()) {
        auto out = detail::open_for_write(cfg.report_path);
        out << outcome.report.dump(2) << '\n';
    }
    return outcome;
}

/// One rung of the benchmark ladder. Times both kNN engines and both
/// interpolation variants on the same m = n instance; shares and ratios
/// refer to the grid-engine / blocked-variant pipeline.
struct BenchRow {
    std::size_t m = 0;
    std::size_t n = 0;
    int k = 0;
    bool failed = false;
    std::string error;
    double build_ms = 0.0;
    double knn_grid_ms = 0.0;
    double knn_brute_ms = 0.0;
    double interp_naive_ms = 0.0;
    double interp_blocked_ms = 0.0;
    double build_share_pct = 0.0;
    double knn_share_pct = 0.0;
    double interp_share_pct = 0.0;
    double knn_ratio = 0.0;      ///< grid kNN stage time / brute kNN stage time
    double e2e_grid_ms = 0.0;    ///< build + grid kNN + blocked interp
    double e2e_brute_ms = 0.0;   ///< brute kNN + blocked interp
    double e2e_speedup = 0.0;    ///< brute pipeline / grid pipeline
};

/// Run the benchmark ladder on synthetic m = n instances. Data generation is
/// excluded from every timing. A failing rung records its error and the
/// remaining rungs still run.
inline std::vector<BenchRow> cmd_bench(const RunConfig& cfg, const std::vector<std::size_t>& sizes) {
    if (sizes.empty()) {
        throw std::invalid_argument("cmd_bench: size ladder is empty");
    }
    const BoundingBox square{0.0, 0.0, 1.0, 1.0};
    const int workers = resolve_workers(cfg.workers);
    std::vector<BenchRow> rows;
    rows.reserve(sizes.size());
    for (const std::size_t size : sizes) {
        BenchRow row;
        row.m = size;
        row.n = size;
        try {
            const PointSet data = generate_random_points(size, square, cfg.seed, ValueRule::uniform);
            const PointSet queries = generate_random_queries(size, square, cfg.seed + 1);
            AidwParams params = cfg.params;
            params.k = static_cast<int>(
                std::min<std::size_t>(static_cast<std::size_t>(params.k), data.count()));
            row.k = params.k;

            const BoundingBox bbox = compute_bbox(data, queries);
            const double width = choose_cell_width(data, bbox, cfg.cell_factor);
            auto built = time_stage("build", [&] {
                return build_index(data, make_grid_config(bbox, width));
            });
            row.build_ms = built.millis;

            auto knn_grid = time_stage("knn-grid", [&] {
                return knn_stage(queries, &built.value, data, params.k, KnnEngine::grid, workers);
            });
            row.knn_grid_ms = knn_grid.millis;
            auto knn_brute = time_stage("knn-brute", [&] {
                return knn_stage(queries, nullptr, data, params.k, KnnEngine::brute, workers);
            });
            row.knn_brute_ms = knn_brute.millis;

            auto naive = time_stage("interp-naive", [&] {
                return aidw_predict_all(queries, data, knn_grid.value, params, Variant::naive,
                                        workers);
            });
            row.interp_naive_ms = naive.millis;
            auto blocked = time_stage("interp-blocked", [&] {
                return aidw_predict_all(queries, data, knn_grid.value, params, Variant::blocked,
                                        workers);
            });
            row.interp_blocked_ms = blocked.millis;

            StageTimings grid_run;
            grid_run.build_millis = row.build_ms;
            grid_run.knn_millis = row.knn_grid_ms;
            grid_run.interp_millis = row.interp_blocked_ms;
            const WorkloadPercent shares = workload_percent(grid_run);
            row.build_share_pct = shares.build;
            row.knn_share_pct = shares.knn;
            row.interp_share_pct = shares.interp;
            row.knn_ratio = row.knn_brute_ms > 0.0 ? row.knn_grid_ms / row.knn_brute_ms : 0.0;
            row.e2e_grid_ms = row.build_ms + row.knn_grid_ms + row.interp_blocked_ms;
            row.e2e_brute_ms = row.knn_brute_ms + row.interp_blocked_ms;
            row.e2e_speedup = row.e2e_grid_ms > 0.0 ? row.e2e_brute_ms / row.e2e_grid_ms : 0.0;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json bench_to_json(const RunConfig& cfg, const std::vector<BenchRow>& rows) {
    nlohmann::json out{{"version", kVersion}, {"config", config_to_json(cfg)}};
    auto& json_rows = out["rows"] = nlohmann::json::array();
    for (const BenchRow& row : rows) {
        json_rows.push_back(nlohmann::json{
            {"m", row.m},
            {"n", row.n},
            {"k", row.k},
            {"failed", row.failed},
            {"error", row.error},
            {"build_ms", row.build_ms},
            {"knn_grid_ms", row.knn_grid_ms},
            {"knn_brute_ms", row.knn_brute_ms},
            {"interp_naive_ms", row.interp_naive_ms},
            {"interp_blocked_ms", row.interp_blocked_ms},
            {"build_share_pct", row.build_share_pct},
            {"knn_share_pct", row.knn_share_pct},
            {"interp_share_pct", row.interp_share_pct},
            {"knn_ratio", row.knn_ratio},
            {"e2e_grid_ms", row.e2e_grid_ms},
            {"e2e_brute_ms", row.e2e_brute_ms},
            {"e2e_speedup", row.e2e_speedup},
        });
    }
    return out;
}

/// Write the bench table as CSV.
inline void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    auto out = detail::open_for_write(path);
    out << "m,n,k,failed,build_ms,knn_grid_ms,knn_brute_ms,interp_naive_ms,interp_blocked_ms,"
           "build_share_pct,knn_share_pct,interp_share_pct,knn_ratio,e2e_grid_ms,e2e_brute_ms,"
           "e2e_speedup\n";
    for (const BenchRow& row : rows) {
        out << row.m << ',' << row.n << ',' << row.k << ',' << (row.failed ? 1 : 0) << ','
            << detail::format_double(row.build_ms) << ',' << detail::format_double(row.knn_grid_ms)
            << ',' << detail::format_double(row.knn_brute_ms) << ','
            << detail::format_double(row.interp_naive_ms) << ','
            << detail::format_double(row.interp_blocked_ms) << ','
            << detail::format_double(row.build_share_pct) << ','
            << detail::format_double(row.knn_share_pct) << ','
            << detail::format_double(row.interp_share_pct) << ','
            << detail::format_double(row.knn_ratio) << ','
            << detail::format_double(row.e2e_grid_ms) << ','
            << detail::format_double(row.e2e_brute_ms) << ','
            << detail::format_double(row.e2e_speedup) << '\n';
    }
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

/// Outcome of cmd_raster: the raster plus the underlying pipeline run.
struct RasterOutcome {
    Raster raster;
    PipelineOutcome pipeline;
};

/// Interpolate onto a regular nx x ny lattice over the data bbox (cell
/// centers), written as an ASCII grid with the northernmost row first.
inline RasterOutcome cmd_raster(const RunConfig& cfg, std::size_t nx, std::size_t ny) {
    if (nx < 1 || ny < 1) {
        throw std::invalid_argument("cmd_raster: nx and ny must be >= 1");
    }
    if (cfg.data_path.empty()) {
        throw std::invalid_argument("cmd_raster: data path is required");
    }
    const PointSet data = read_data_csv(cfg.data_path);
    if (data.count() == 0) {
        throw std::invalid_argument("cmd_raster: data set is empty");
    }
    const BoundingBox bbox = compute_bbox(data, PointSet{});
    const double sx = bbox.width() / static_cast<double>(nx);
    const double sy = bbox.height() / static_cast<double>(ny);

    PointSet queries;
    queries.xs.reserve(nx * ny);
    queries.ys.reserve(nx * ny);
    for (std::size_t r = 0; r < ny; ++r) {
        const double y = bbox.min_y + (static_cast<double>(ny - 1 - r) + 0.5) * sy;
        for (std::size_t c = 0; c < nx; ++c) {
            queries.add(bbox.min_x + (static_cast<double>(c) + 0.5) * sx, y);
        }
    }

    RasterOutcome outcome;
    outcome.pipeline = run_pipeline(data, queries, cfg);
    outcome.raster = Raster{nx, ny, bbox.min_x, bbox.min_y, sx, outcome.pipeline.result.predicted};
    if (!cfg.out_path.empty()) {
        write_raster_asc(cfg.out_path, outcome.raster);
    }
    if (!cfg.report_path.empty()) {
        const nlohmann::json report{{"version", kVersion},
                                    {"config", config_to_json(cfg)},
                                    {"raster", {{"ncols", nx}, {"nrows", ny}}},
                                    {"run", timings_to_json(outcome.pipeline.timings, 0.0)}};
        auto out = detail::open_for_write(cfg.report_path);
        out << report.dump(2) << '\n';
    }
    return outcome;
}

}  // namespace aidw::cli
