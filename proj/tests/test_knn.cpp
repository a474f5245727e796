// Exact kNN search: brute-force frozen examples and full-sort oracle,
// expansion-level contract, grid-vs-brute multiset equality, and the
// stage-level wrapper.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "aidw/generate.hpp"
#include "aidw/knn.hpp"

using namespace aidw;

namespace {

PointSet square_points(std::size_t count, std::uint64_t seed) {
    return generate_random_points(count, BoundingBox{0.0, 0.0, 1.0, 1.0}, seed,
                                  ValueRule::uniform);
}

/// Full-sort oracle: all squared distances (same expression as the engines),
/// sorted, first k.
std::vector<double> sorted_distances_oracle(const QueryPoint& q, const PointSet& data,
                                            std::size_t k) {
    std::vector<double> all;
    all.reserve(data.count());
    for (std::size_t i = 0; i < data.count(); ++i) {
        all.push_back(dist_sq(q.x, q.y, data.xs[i], data.ys[i]));
    }
    std::sort(all.begin(), all.end());
    all.resize(k);
    return all;
}

}  // namespace

TEST_CASE("dist_sq is the shared squared-distance expression") {
    REQUIRE(dist_sq(0.0, 0.0, 3.0, 4.0) == 25.0);
    REQUIRE(dist_sq(1.0, 1.0, 1.0, 1.0) == 0.0);
    REQUIRE(dist_sq(-1.0, -2.0, 2.0, 2.0) == 25.0);
}

TEST_CASE("brute_force_knn frozen examples") {
    SECTION("query coincident with a data point, k = 1") {
        PointSet data;
        data.add(2.0, 3.0, 9.0);
        data.add(5.0, 5.0, 1.0);
        const KnnResult result = brute_force_knn(QueryPoint{2.0, 3.0}, data, 1);
        REQUIRE(result.distances_sq == std::vector<double>{0.0});
        REQUIRE(result.average_distance == 0.0);
        REQUIRE_FALSE(result.exhausted);
    }

    SECTION("3-4-5 triangle, k = 2") {
        PointSet data;
        data.add(0.0, 0.0, 0.0);
        data.add(3.0, 0.0, 0.0);
        data.add(0.0, 4.0, 0.0);
        const KnnResult result = brute_force_knn(QueryPoint{0.0, 0.0}, data, 2);
        REQUIRE(result.distances_sq == std::vector<double>{0.0, 9.0});
        REQUIRE(result.average_distance == 1.5);
    }
}

TEST_CASE("brute_force_knn equals the full-sort oracle") {
    const PointSet data = square_points(500, 11);
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const QueryPoint q{static_cast<double>(rng() >> 11) * 0x1.0p-53,
                           static_cast<double>(rng() >> 11) * 0x1.0p-53};
        const KnnResult result = brute_force_knn(q, data, 10);
        REQUIRE(result.distances_sq == sorted_distances_oracle(q, data, 10));
        REQUIRE(std::is_sorted(result.distances_sq.begin(), result.distances_sq.end()));

        // averageDistance is the mean of the square roots, computed at the end.
        double sum = 0.0;
        for (double d2 : result.distances_sq) {
            sum += std::sqrt(d2);
        }
        REQUIRE(result.average_distance == sum / 10.0);
    }
}

TEST_CASE("brute_force_knn input validation") {
    const PointSet data = square_points(10, 1);
    REQUIRE_THROWS_AS(brute_force_knn(QueryPoint{0.5, 0.5}, PointSet{}, 1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(brute_force_knn(QueryPoint{0.5, 0.5}, data, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(brute_force_knn(QueryPoint{0.5, 0.5}, data, 11), std::invalid_argument);
}

TEST_CASE("determine_expansion_level adds the mandatory extra ring") {
    const BoundingBox box{0.0, 0.0, 1.0, 1.0};
    const PointSet data = square_points(1000, 5);
    const GridIndex index = build_index(data, make_grid_config(box, 0.1));

    SECTION("k = 1 with a populated own cell returns level 1") {
        // Query directly on a data point: its own cell holds >= 1 point, so
        // the sufficient level is 0 and the mandatory increment gives 1.
        const QueryPoint q{data.xs[0], data.ys[0]};
        const ExpansionLevel level = determine_expansion_level(q, index, 1);
        REQUIRE(level.level == 1);
        REQUIRE_FALSE(level.exhausted);
    }

    SECTION("k beyond the whole grid flags exhaustion with full coverage") {
        const QueryPoint q{0.05, 0.05};
        const ExpansionLevel level = determine_expansion_level(q, index, 2000);
        REQUIRE(level.exhausted);
        const CellCoord cc = locate_cell(q.x, q.y, index.config);
        REQUIRE(cc.col - level.level <= 0);
        REQUIRE(cc.row - level.level <= 0);
        REQUIRE(cc.col + level.level >= index.config.n_col - 1);
        REQUIRE(cc.row + level.level >= index.config.n_row - 1);
    }

    SECTION("cell-count oracle: block(level) >= k and block(level-1) >= k") {
        const PointSet queries = generate_random_queries(200, box, 6);
        for (std::size_t i = 0; i < queries.count(); ++i) {
            const QueryPoint q = queries.query_point(i);
            const ExpansionLevel level = determine_expansion_level(q, index, 15);
            REQUIRE_FALSE(level.exhausted);
            REQUIRE(level.level >= 1);
            const CellCoord cc = locate_cell(q.x, q.y, index.config);
            auto clipped_count = [&](int l) {
                const int col_lo = std::max(0, cc.col - l);
                const int col_hi = std::min(index.config.n_col - 1, cc.col + l);
                const int row_lo = std::max(0, cc.row - l);
                const int row_hi = std::min(index.config.n_row - 1, cc.row + l);
                return index.block_count(col_lo, col_hi, row_lo, row_hi);
            };
            // The level before the mandatory increment was already sufficient.
            REQUIRE(clipped_count(level.level - 1) >= 15);
            REQUIRE(clipped_count(level.level) >= 15);
            // Minimality: two levels down was not sufficient.
            if (level.level >= 2) {
                REQUIRE(clipped_count(level.level - 2) < 15);
            }
        }
    }

    REQUIRE_THROWS_AS(determine_expansion_level(QueryPoint{0.5, 0.5}, index, 0),
                      std::invalid_argument);
}

TEST_CASE("grid_knn on a single-cell grid degenerates to brute force") {
    PointSet data;
    data.add(0.1, 0.1, 0.0);
    data.add(0.9, 0.9, 0.0);
    data.add(0.5, 0.2, 0.0);
    GridConfig config;
    config.cell_width = 1.0;
    config.n_col = 1;
    config.n_row = 1;
    const GridIndex index = build_index(data, config);

    const QueryPoint q{0.4, 0.4};
    const KnnResult grid = grid_knn(q, index, 2);
    const KnnResult brute = brute_force_knn(q, data, 2);
    REQUIRE(grid.distances_sq == brute.distances_sq);
    REQUIRE(grid.average_distance == brute.average_distance);
}

TEST_CASE("grid_knn finds a near neighbor just outside the sufficient block") {
    // The classic failure mode of stopping at the sufficient level: the
    // query sits near the left edge of the center cell of a 5x5 grid, the
    // center cell holds k points hugging its far (right) edge, and a much
    // nearer point lies just across the boundary in the adjacent cell. The
    // sufficient level is 0; only the mandatory extra ring reaches the
    // adjacent cell.
    PointSet data;
    data.add(2.95, 2.50, 0.0);  // center cell (2,2), far side
    data.add(2.95, 2.60, 0.0);
    data.add(2.95, 2.40, 0.0);
    data.add(1.98, 2.50, 0.0);  // adjacent cell (1,2), nearest of all
    // Background points in remote cells so the grid is not trivial.
    data.add(0.5, 0.5, 0.0);
    data.add(4.5, 4.5, 0.0);
    data.add(0.5, 4.5, 0.0);
    data.add(4.5, 0.5, 0.0);

    GridConfig config;
    config.cell_width = 1.0;
    config.n_col = 5;
    config.n_row = 5;
    const GridIndex index = build_index(data, config);

    const QueryPoint q{2.05, 2.50};
    REQUIRE(locate_cell(q.x, q.y, config) == CellCoord{2, 2});
    REQUIRE(determine_expansion_level(q, index, 3).level == 1);

    const KnnResult result = grid_knn(q, index, 3);
    const double outside_d2 = dist_sq(q.x, q.y, 1.98, 2.50);
    REQUIRE(std::count(result.distances_sq.begin(), result.distances_sq.end(), outside_d2) == 1);
    REQUIRE(result.distances_sq.front() == outside_d2);
    REQUIRE(result.distances_sq == brute_force_knn(q, data, 3).distances_sq);
}

TEST_CASE("grid_knn equals brute force on random instances") {
    const BoundingBox box{0.0, 0.0, 1.0, 1.0};
    const PointSet data = square_points(2000, 3);
    const PointSet queries = generate_random_queries(200, box, 4);
    const double width = choose_cell_width(data, box, 4.0);
    const GridIndex index = build_index(data, make_grid_config(box, width));

    for (int k : {1, 5, 15}) {
        for (std::size_t i = 0; i < queries.count(); ++i) {
            const QueryPoint q = queries.query_point(i);
            const KnnResult grid = grid_knn(q, index, k);
            const KnnResult brute = brute_force_knn(q, data, k);
            REQUIRE(grid.distances_sq == brute.distances_sq);
            REQUIRE(grid.average_distance == brute.average_distance);
        }
    }
}

TEST_CASE("grid_knn remains exact with deliberately tiny cells") {
    // A small cell factor forces deep expansion levels, exercising the ring
    // widening loop rather than the common one-block case.
    const BoundingBox box{0.0, 0.0, 1.0, 1.0};
    const PointSet data = square_points(300, 8);
    const PointSet queries = generate_random_queries(50, box, 9);
    const GridIndex index =
        build_index(data, make_grid_config(box, choose_cell_width(data, box, 1.0)));

    for (int k : {1, 7, 64}) {
        for (std::size_t i = 0; i < queries.count(); ++i) {
            const QueryPoint q = queries.query_point(i);
            REQUIRE(grid_knn(q, index, k).distances_sq ==
                    brute_force_knn(q, data, k).distances_sq);
        }
    }
}

TEST_CASE("grid_knn clamps k beyond the point count and flags exhaustion") {
    const BoundingBox box{0.0, 0.0, 1.0, 1.0};
    const PointSet data = square_points(5, 2);
    const GridIndex index = build_index(data, make_grid_config(box, 0.25));

    const KnnResult result = grid_knn(QueryPoint{0.5, 0.5}, index, 64);
    REQUIRE(result.exhausted);
    REQUIRE(result.size() == 5);
    REQUIRE(result.distances_sq == sorted_distances_oracle(QueryPoint{0.5, 0.5}, data, 5));
}

TEST_CASE("knn_stage maps queries to results in input order") {
    const BoundingBox box{0.0, 0.0, 1.0, 1.0};
    const PointSet data = square_points(800, 31);
    const PointSet queries = generate_random_queries(120, box, 32);
    const GridIndex index =
        build_index(data, make_grid_config(box, choose_cell_width(data, box, 4.0)));

    SECTION("empty query set yields an empty sequence") {
        REQUIRE(knn_stage(PointSet{}, &index, data, 5, KnnEngine::grid).empty());
    }

    SECTION("grid and brute engines agree element-wise") {
        const auto grid = knn_stage(queries, &index, data, 15, KnnEngine::grid);
        const auto brute = knn_stage(queries, nullptr, data, 15, KnnEngine::brute);
        REQUIRE(grid.size() == queries.count());
        REQUIRE(brute.size() == queries.count());
        for (std::size_t i = 0; i < queries.count(); ++i) {
            REQUIRE(grid[i].distances_sq == brute[i].distances_sq);
            REQUIRE(grid[i].average_distance ==
                    Catch::Approx(brute[i].average_distance).epsilon(1.0e-12));
        }
    }

    SECTION("output is invariant under the worker count") {
        const auto one = knn_stage(queries, &index, data, 15, KnnEngine::grid, 1);
        const auto eight = knn_stage(queries, &index, data, 15, KnnEngine::grid, 8, 7);
        for (std::size_t i = 0; i < queries.count(); ++i) {
            REQUIRE(one[i].distances_sq == eight[i].distances_sq);
            REQUIRE(one[i].average_distance == eight[i].average_distance);
        }
    }

    SECTION("grid engine requires an index") {
        REQUIRE_THROWS_AS(knn_stage(queries, nullptr, data, 5, KnnEngine::grid),
                          std::invalid_argument);
    }

    SECTION("per-query failures carry the query index") {
        PointSet bad = queries;
        bad.xs[17] = 50.0;  // far outside the covered region
        try {
            knn_stage(bad, &index, data, 5, KnnEngine::grid);
            FAIL("expected knn_stage to throw");
        } catch (const std::runtime_error& e) {
            REQUIRE(std::string(e.what()).find("query 17") != std::string::npos);
        }
    }
}
