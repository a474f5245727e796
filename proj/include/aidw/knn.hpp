#pragma once

// Exact k-nearest-neighbor search: the brute-force global scan (oracle and
// baseline engine) and the grid-accelerated local search. Both engines share
// one distance expression and one k-slot insert-and-swap buffer, so their
// sorted squared-distance lists are identical, not merely close.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "aidw/executor.hpp"
#include "aidw/grid.hpp"
#include "aidw/types.hpp"

namespace aidw {

/// Squared Euclidean distance, spelled (dx*dx) + (dy*dy). Every consumer —
/// both search engines and the test oracles — must call this exact function
/// so results can be compared with zero tolerance.
inline double dist_sq(double qx, double qy, double px, double py) noexcept {
    const double dx = px - qx;
    const double dy = py - qy;
    return dx * dx + dy * dy;
}

/// Result of one kNN query: the k smallest squared distances in ascending
/// order, and their average plain distance. Square roots are taken only
/// here, once, at the very end of the search.
///
/// `exhausted` is set when the engine was asked for more neighbors than the
/// data set holds and clamped to all available points (the adaptive-alpha
/// stage can still average fewer distances).
struct KnnResult {
    std::vector<double> distances_sq;
    double average_distance = 0.0;
    bool exhausted = false;

    [[nodiscard]] std::size_t size() const noexcept { return distances_sq.size(); }
};

/// Which kNN engine a pipeline stage runs.
enum class KnnEngine { grid, brute };

namespace detail {

/// The k-slot ascending buffer of the insert-and-swap search: the first k
/// offers are insertion-sorted; afterwards an offer smaller than the current
/// kth entry replaces it and bubbles toward the front by adjacent swaps.
/// Ties at the kth entry are not inserted, which keeps the resulting value
/// multiset independent of scan order.
class KSlotBuffer {
public:
    explicit KSlotBuffer(std::size_t k) : slots_(k), filled_(0) {}

    void offer(double d2) {
        std::size_t j;
        if (filled_ < slots_.size()) {
            j = filled_++;
        } else if (d2 < slots_.back()) {
            j = slots_.size() - 1;
        } else {
            return;
        }
        slots_[j] = d2;
        while (j > 0 && slots_[j - 1] > slots_[j]) {
            std::swap(slots_[j - 1], slots_[j]);
            --j;
        }
    }

    [[nodiscard]] bool full() const noexcept { return filled_ == slots_.size(); }
    [[nodiscard]] double kth() const noexcept { return slots_.back(); }

    /// Ascending distances plus their average; consumes the buffer.
    [[nodiscard]] KnnResult finalize(bool exhausted) && {
        KnnResult result;
        result.exhausted = exhausted;
        result.distances_sq = std::move(slots_);
        double sum = 0.0;
        for (double d2 : result.distances_sq) {
            sum += std::sqrt(d2);
        }
        result.average_distance =
            result.distances_sq.empty() ? 0.0 : sum / static_cast<double>(result.distances_sq.size());
        return result;
    }

private:
    std::vector<double> slots_;
    std::size_t filled_;
};

}  // namespace detail

/// Global scan over all m data points. Exact by construction; serves as the
/// oracle for the grid engine and as the "original algorithm" baseline.
inline KnnResult brute_force_knn(const QueryPoint& q, const PointSet& data, int k) {
    const std::size_t m = data.count();
    if (m == 0) {
        throw std::invalid_argument("brute_force_knn: data set is empty");
    }
    if (k < 1 || static_cast<std::size_t>(k) > m) {
        throw std::invalid_argument("brute_force_knn: k = " + std::to_string(k) +
                                    " outside [1, " + std::to_string(m) + "]");
    }
    detail::KSlotBuffer buffer(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < m; ++i) {
        buffer.offer(dist_sq(q.x, q.y, data.xs[i], data.ys[i]));
    }
    return std::move(buffer).finalize(false);
}

/// Expansion level for a query: the mandatory one past the smallest level
/// whose clipped cell block holds at least k points.
struct ExpansionLevel {
    int level = 0;
    /// Set when the whole grid holds fewer than k points; `level` then
    /// covers the entire grid from the query's cell.
    bool exhausted = false;
};

/// Smallest L0 such that the clipped (2*L0+1)^2 cell block centered on q's
/// cell contains >= k points, plus one (the extra ring that catches near
/// neighbors just outside the sufficient block). If the grid holds fewer
/// than k points, returns the level covering the whole grid and flags
/// exhaustion.
inline ExpansionLevel determine_expansion_level(const QueryPoint& q, const GridIndex& index,
                                                int k) {
    if (index.point_count() == 0) {
        throw std::invalid_argument("determine_expansion_level: index holds no points");
    }
    if (k < 1) {
        throw std::invalid_argument("determine_expansion_level: k must be >= 1");
    }
    const GridConfig& config = index.config;
    const CellCoord cc = locate_cell(q.x, q.y, config);

    if (index.point_count() < static_cast<std::size_t>(k)) {
        const int cover = std::max(std::max(cc.col, config.n_col - 1 - cc.col),
                                   std::max(cc.row, config.n_row - 1 - cc.row));
        return ExpansionLevel{cover, true};
    }
    for (int level = 0;; ++level) {
        const int col_lo = std::max(0, cc.col - level);
        const int col_hi = std::min(config.n_col - 1, cc.col + level);
        const int row_lo = std::max(0, cc.row - level);
        const int row_hi = std::min(config.n_row - 1, cc.row + level);
        if (index.block_count(col_lo, col_hi, row_lo, row_hi) >=
            static_cast<std::size_t>(k)) {
            return ExpansionLevel{level + 1, false};
        }
    }
}

namespace detail {

/// Offer every point of the clipped block rows [row_lo, row_hi] x columns
/// [col_lo, col_hi]; cells of one row are contiguous in the sorted layout.
inline void scan_block(const GridIndex& index, KSlotBuffer& buffer, const QueryPoint& q,
                       int col_lo, int col_hi, int row_lo, int row_hi) {
    for (int row = row_lo; row <= row_hi; ++row) {
        const auto [begin, end] = index.row_slice(row, col_lo, col_hi);
        for (std::uint32_t s = begin; s < end; ++s) {
            buffer.offer(dist_sq(q.x, q.y, index.sorted_x[s], index.sorted_y[s]));
        }
    }
}

/// Offer the cells added when the block grows from level-1 to level: the two
/// new full rows across the level's column span, plus the two new columns
/// across the previous level's row span. Clipped segments are skipped.
inline void scan_ring(const GridIndex& index, KSlotBuffer& buffer, const QueryPoint& q,
                      const CellCoord& cc, int level) {
    const GridConfig& config = index.config;
    const int col_lo = std::max(0, cc.col - level);
    const int col_hi = std::min(config.n_col - 1, cc.col + level);
    if (cc.row - level >= 0) {
        scan_block(index, buffer, q, col_lo, col_hi, cc.row - level, cc.row - level);
    }
    if (cc.row + level <= config.n_row - 1) {
        scan_block(index, buffer, q, col_lo, col_hi, cc.row + level, cc.row + level);
    }
    const int prev_row_lo = std::max(0, cc.row - (level - 1));
    const int prev_row_hi = std::min(config.n_row - 1, cc.row + (level - 1));
    if (cc.col - level >= 0) {
        scan_block(index, buffer, q, cc.col - level, cc.col - level, prev_row_lo, prev_row_hi);
    }
    if (cc.col + level <= config.n_col - 1) {
        scan_block(index, buffer, q, cc.col + level, cc.col + level, prev_row_lo, prev_row_hi);
    }
}

}  // namespace detail

/// Grid-accelerated exact kNN: locate the query's cell, scan the clipped
/// block at the determined expansion level, then widen ring by ring until no
/// unscanned cell can hold a closer point. The result is identical to
/// brute_force_knn — same distance expression, same buffer discipline.
///
/// The ring check is what makes the search exact rather than approximate:
/// every point outside the level-L block is at least L*cellWidth away, so
/// scanning may stop only once the k-th candidate distance is within that
/// bound (a 1e-9 relative margin absorbs floating-point fuzz in the cell
/// assignment; in the common case the mandatory extra level already
/// satisfies the bound and no additional ring is scanned).
///
/// Asked for more neighbors than the grid holds, the search clamps to all
/// available points and flags exhaustion instead of erroring.
inline KnnResult grid_knn(const QueryPoint& q, const GridIndex& index, int k) {
    const std::size_t m = index.point_count();
    if (m == 0) {
        throw std::invalid_argument("grid_knn: index holds no points");
    }
    if (k < 1) {
        throw std::invalid_argument("grid_knn: k must be >= 1");
    }
    const GridConfig& config = index.config;
    const CellCoord cc = locate_cell(q.x, q.y, config);
    const ExpansionLevel expansion = determine_expansion_level(q, index, k);
    const auto k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), m);

    detail::KSlotBuffer buffer(k_eff);
    int level = expansion.level;
    {
        const int col_lo = std::max(0, cc.col - level);
        const int col_hi = std::min(config.n_col - 1, cc.col + level);
        const int row_lo = std::max(0, cc.row - level);
        const int row_hi = std::min(config.n_row - 1, cc.row + level);
        detail::scan_block(index, buffer, q, col_lo, col_hi, row_lo, row_hi);
    }
    while (true) {
        const bool whole_grid = cc.col - level <= 0 && cc.row - level <= 0 &&
                                cc.col + level >= config.n_col - 1 &&
                                cc.row + level >= config.n_row - 1;
        if (whole_grid) {
            break;
        }
        const double ring_min = static_cast<double>(level) * config.cell_width;
        if (buffer.full() && buffer.kth() <= ring_min * ring_min * (1.0 - 1.0e-9)) {
            break;
        }
        ++level;
        detail::scan_ring(index, buffer, q, cc, level);
    }
    return std::move(buffer).finalize(expansion.exhausted);
}

/// Stage 1 of the pipeline: one KnnResult per query, output order equal to
/// input order for any worker count. `index` may be null for the brute
/// engine (which never touches the grid); per-query failures abort the stage
/// and carry the first failing query's index.
inline std::vector<KnnResult> knn_stage(const PointSet& queries, const GridIndex* index,
                                        const PointSet& data, int k, KnnEngine engine,
                                        int workers = 1, std::size_t chunk = 64) {
    if (engine == KnnEngine::grid && index == nullptr) {
        throw std::invalid_argument("knn_stage: grid engine requires a grid index");
    }
    auto per_query = [&](std::size_t i) -> KnnResult {
        try {
            const QueryPoint q = queries.query_point(i);
            return engine == KnnEngine::grid ? grid_knn(q, *index, k)
                                             : brute_force_knn(q, data, k);
        } catch (const std::exception& e) {
            throw std::runtime_error("knn_stage: query " + std::to_string(i) + ": " + e.what());
        }
    };
    return parallel_map_indexed(queries.count(), per_query, workers, chunk);
}

}  // namespace aidw
