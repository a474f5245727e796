// Command-line front end for the AIDW interpolation engine.
//
//   aidw_cli generate    --count 10K --seed 7 --kind data --rule planar --out pts.csv
//   aidw_cli interpolate --data pts.csv --queries q.csv --mode aidw --knn grid \
//                        --variant blocked --k 15 --out pred.csv --report run.json
//   aidw_cli bench       --sizes 10K,50K,100K --k 15 --report bench.json
//   aidw_cli raster      --data pts.csv --nx 256 --ny 256 --out surface.asc
//
// All argument parsing happens here; the commands themselves live in
// aidw/cli.hpp so tests can drive them without a process boundary.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aidw/cli.hpp"

namespace {

using aidw::cli::RunConfig;

/// Shared pipeline flags for interpolate / bench / raster.
void add_pipeline_flags(CLI::App& cmd, RunConfig& cfg, std::string& mode, std::string& knn,
                        std::string& variant, std::string& alpha_levels) {
    cmd.add_option("--mode", mode, "Pipeline: idw|aidw")->capture_default_str();
    cmd.add_option("--knn", knn, "kNN engine: grid|brute")->capture_default_str();
    cmd.add_option("--variant", variant, "Interpolation variant: naive|blocked")
        ->capture_default_str();
    cmd.add_option("--k", cfg.params.k, "Neighbors per query (aidw mode)")->capture_default_str();
    cmd.add_option("--alpha-levels", alpha_levels,
                   "Five comma-separated adaptive exponent levels a1..a5");
    cmd.add_option("--alpha", cfg.alpha, "Constant exponent (idw mode)")->capture_default_str();
    cmd.add_option("--rmin", cfg.params.r_min, "Lower normalization bound for the kNN statistic")
        ->capture_default_str();
    cmd.add_option("--rmax", cfg.params.r_max, "Upper normalization bound for the kNN statistic")
        ->capture_default_str();
    cmd.add_option("--cell-factor", cfg.cell_factor,
                   "Grid cell width as a multiple of the expected NN distance")
        ->capture_default_str();
    cmd.add_option("--workers", cfg.workers, "Worker threads (0 = all hardware threads)")
        ->capture_default_str();
    cmd.add_option("--seed", cfg.seed, "PRNG seed for synthetic inputs")->capture_default_str();
}

void apply_pipeline_flags(RunConfig& cfg, const std::string& mode, const std::string& knn,
                          const std::string& variant, const std::string& alpha_levels) {
    cfg.mode = aidw::cli::parse_mode(mode);
    cfg.knn_engine = aidw::cli::parse_engine(knn);
    cfg.variant = aidw::cli::parse_variant(variant);
    if (!alpha_levels.empty()) {
        cfg.params.alpha_levels = aidw::cli::parse_alpha_levels(alpha_levels);
    }
    cfg.params.validate();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive inverse-distance-weighting interpolation engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(aidw::cli::kVersion));

    RunConfig cfg;
    std::string mode = "aidw";
    std::string knn = "grid";
    std::string variant = "blocked";
    std::string alpha_levels;

    // generate
    auto* gen = app.add_subcommand("generate", "Write a deterministic random point file");
    std::string gen_count = "10K";
    std::string gen_kind = "data";
    std::string gen_rule = "uniform";
    std::vector<double> gen_bbox{0.0, 0.0, 1.0, 1.0};
    gen->add_option("--count", gen_count, "Point count (K suffix = x1024)")->capture_default_str();
    gen->add_option("--kind", gen_kind, "File layout: data|queries")->capture_default_str();
    gen->add_option("--rule", gen_rule, "Value rule for data files: uniform|planar|radial")
        ->capture_default_str();
    gen->add_option("--bbox", gen_bbox, "Sampling box: minX minY maxX maxY")
        ->expected(4)
        ->capture_default_str();
    gen->add_option("--seed", cfg.seed, "PRNG seed")->capture_default_str();
    gen->add_option("--out", cfg.out_path, "Output CSV path")->required();

    // interpolate
    auto* interp = app.add_subcommand("interpolate", "Interpolate query points from a data file");
    interp->add_option("--data", cfg.data_path, "Data CSV (x,y,z)")->required();
    interp->add_option("--queries", cfg.queries_path, "Query CSV (x,y)")->required();
    interp->add_option("--out", cfg.out_path, "Prediction CSV path");
    interp->add_option("--report", cfg.report_path, "JSON run report path");
    add_pipeline_flags(*interp, cfg, mode, knn, variant, alpha_levels);

    // bench
    auto* bench = app.add_subcommand("bench", "Time both kNN engines and both variants");
    std::string bench_sizes = "10K,50K,100K";
    bench->add_option("--sizes", bench_sizes, "Comma-separated ladder (K suffix = x1024)")
        ->capture_default_str();
    bench->add_option("--out", cfg.out_path, "Bench table CSV path");
    bench->add_option("--report", cfg.report_path, "Bench JSON report path");
    add_pipeline_flags(*bench, cfg, mode, knn, variant, alpha_levels);

    // raster
    auto* raster = app.add_subcommand("raster", "Interpolate onto a regular lattice");
    std::size_t nx = 256;
    std::size_t ny = 256;
    raster->add_option("--data", cfg.data_path, "Data CSV (x,y,z)")->required();
    raster->add_option("--nx", nx, "Lattice columns")->capture_default_str();
    raster->add_option("--ny", ny, "Lattice rows")->capture_default_str();
    raster->add_option("--out", cfg.out_path, "ASCII grid output path");
    raster->add_option("--report", cfg.report_path, "JSON run report path");
    add_pipeline_flags(*raster, cfg, mode, knn, variant, alpha_levels);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const std::size_t count = aidw::cli::parse_size_spec(gen_count);
            const aidw::BoundingBox bbox{gen_bbox[0], gen_bbox[1], gen_bbox[2], gen_bbox[3]};
            aidw::cli::GenerateKind kind;
            if (gen_kind == "data") {
                kind = aidw::cli::GenerateKind::data;
            } else if (gen_kind == "queries") {
                kind = aidw::cli::GenerateKind::queries;
            } else {
                throw std::invalid_argument("unknown kind '" + gen_kind +
                                            "' (expected data|queries)");
            }
            aidw::ValueRule rule;
            if (gen_rule == "uniform") {
                rule = aidw::ValueRule::uniform;
            } else if (gen_rule == "planar") {
                rule = aidw::ValueRule::planar;
            } else if (gen_rule == "radial") {
                rule = aidw::ValueRule::radial;
            } else {
                throw std::invalid_argument("unknown rule '" + gen_rule +
                                            "' (expected uniform|planar|radial)");
            }
            aidw::cli::cmd_generate(count, bbox, cfg.seed, rule, kind, cfg.out_path);
            std::printf("wrote %zu %s points to %s\n", count, gen_kind.c_str(),
                        cfg.out_path.c_str());
            return 0;
        }

        if (interp->parsed()) {
            apply_pipeline_flags(cfg, mode, knn, variant, alpha_levels);
            const auto outcome = aidw::cli::cmd_interpolate(cfg);
            const auto& t = outcome.pipeline.timings;
            std::printf("m=%zu n=%zu k=%d workers=%d\n", t.m, t.n, t.k, t.worker_count);
            std::printf("parse %.2f ms | build %.2f ms | knn %.2f ms | interp %.2f ms | total %.2f ms\n",
                        outcome.parse_millis, t.build_millis, t.knn_millis, t.interp_millis,
                        t.total_millis);
            return 0;
        }

        if (bench->parsed()) {
            apply_pipeline_flags(cfg, mode, knn, variant, alpha_levels);
            const auto sizes = aidw::cli::parse_size_ladder(bench_sizes);
            const auto rows = aidw::cli::cmd_bench(cfg, sizes);
            std::printf("%10s %10s %5s %12s %12s %12s %13s %15s %9s %9s %9s\n", "m", "n", "k",
                        "build_ms", "knn_grid_ms", "knn_brute_ms", "interp_nv_ms", "interp_blk_ms",
                        "knn_pct", "knn_ratio", "e2e_spdup");
            bool any_failed = false;
            for (const auto& row : rows) {
                if (row.failed) {
                    any_failed = true;
                    std::printf("%10zu %10zu %5d FAILED: %s\n", row.m, row.n, row.k,
                                row.error.c_str());
                    continue;
                }
                std::printf("%10zu %10zu %5d %12.2f %12.2f %12.2f %13.2f %15.2f %9.2f %9.4f %9.3f\n",
                            row.m, row.n, row.k, row.build_ms, row.knn_grid_ms, row.knn_brute_ms,
                            row.interp_naive_ms, row.interp_blocked_ms, row.knn_share_pct,
                            row.knn_ratio, row.e2e_speedup);
            }
            if (!cfg.out_path.empty()) {
                aidw::cli::write_bench_csv(cfg.out_path, rows);
            }
            if (!cfg.report_path.empty()) {
                auto out = aidw::detail::open_for_write(cfg.report_path);
                out << aidw::cli::bench_to_json(cfg, rows).dump(2) << '\n';
            }
            return any_failed ? 1 : 0;
        }

        if (raster->parsed()) {
            apply_pipeline_flags(cfg, mode, knn, variant, alpha_levels);
            const auto outcome = aidw::cli::cmd_raster(cfg, nx, ny);
            const auto& t = outcome.pipeline.timings;
            std::printf("raster %zux%zu from m=%zu points in %.2f ms\n", outcome.raster.ncols,
                        outcome.raster.nrows, t.m, t.total_millis);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
