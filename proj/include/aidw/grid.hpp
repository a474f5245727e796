#pragma once

// Even planar grid over the covered region plus the CSR-style cell layout:
// all point indices sorted by cell id, with per-cell count and head offset.
// Cells in one row have consecutive ids, so any rectangular block can be
// scanned as one contiguous range per row.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aidw/types.hpp"

namespace aidw {

/// Geometry of the even grid. The covered region starts at (min_x, min_y)
/// and spans n_col x n_row square cells of side cell_width; by construction
/// (the +cellWidth padding in the column formula) it contains the bbox.
struct GridConfig {
    double cell_width = 1.0;
    int n_col = 1;
    int n_row = 1;
    double min_x = 0.0;
    double min_y = 0.0;

    [[nodiscard]] std::size_t cell_total() const noexcept {
        return static_cast<std::size_t>(n_col) * static_cast<std::size_t>(n_row);
    }
};

/// Grid cell coordinates (column, row).
struct CellCoord {
    int col = 0;
    int row = 0;

    friend bool operator==(const CellCoord&, const CellCoord&) = default;
};

/// Sentinel head offset for empty cells; never dereference when count is 0.
inline constexpr std::uint32_t kEmptyCellHead = std::numeric_limits<std::uint32_t>::max();

/// Cell side length from the expected nearest-neighbor spacing of the data:
/// factor * 1 / (2 * sqrt(m / A)) with A the bbox area. The default factor 4
/// puts a handful of points in each occupied cell on average.
inline double choose_cell_width(const PointSet& data, const BoundingBox& bbox, double factor) {
    if (data.count() == 0) {
        throw std::invalid_argument("choose_cell_width: data set is empty");
    }
    if (!bbox.valid() || bbox.degenerate()) {
        throw std::invalid_argument("choose_cell_width: bbox must have positive area");
    }
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw std::invalid_argument("choose_cell_width: factor must be positive finite");
    }
    // Same expression as expected_nn_distance(m, A); kept inline so this
    // header stays independent of the parameter-pipeline header.
    const double m = static_cast<double>(data.count());
    return factor * (1.0 / (2.0 * std::sqrt(m / bbox.area())));
}

/// Column/row counts per the padded formula nCol = floor((maxX - minX + w) / w).
inline GridConfig make_grid_config(const BoundingBox& bbox, double cell_width) {
    if (!bbox.valid() || bbox.degenerate()) {
        throw std::invalid_argument("make_grid_config: bbox must have positive area");
    }
    if (!(cell_width > 0.0) || !std::isfinite(cell_width)) {
        throw std::invalid_argument("make_grid_config: cellWidth must be positive finite");
    }
    const double cols = std::floor((bbox.max_x - bbox.min_x + cell_width) / cell_width);
    const double rows = std::floor((bbox.max_y - bbox.min_y + cell_width) / cell_width);
    constexpr double kMaxCells = 1.0e9;
    if (cols * rows > kMaxCells) {
        throw std::invalid_argument("make_grid_config: cellWidth " + std::to_string(cell_width) +
                                    " yields more than 1e9 cells");
    }
    GridConfig config;
    config.cell_width = cell_width;
    config.n_col = std::max(1, static_cast<int>(cols));
    config.n_row = std::max(1, static_cast<int>(rows));
    config.min_x = bbox.min_x;
    config.min_y = bbox.min_y;
    return config;
}

/// Cell of a point: floor((p - min) / cellWidth) per axis, clamped so points
/// exactly on the max edge land in the last column/row. Points outside the
/// covered region beyond a small relative tolerance are rejected.
inline CellCoord locate_cell(double x, double y, const GridConfig& config) {
    const double fx = (x - config.min_x) / config.cell_width;
    const double fy = (y - config.min_y) / config.cell_width;
    const double slack_x = 1.0e-9 * (static_cast<double>(config.n_col) + 1.0);
    const double slack_y = 1.0e-9 * (static_cast<double>(config.n_row) + 1.0);
    if (!(fx >= -slack_x && fx <= static_cast<double>(config.n_col) + slack_x) ||
        !(fy >= -slack_y && fy <= static_cast<double>(config.n_row) + slack_y)) {
        throw std::domain_error("locate_cell: point (" + std::to_string(x) + ", " +
                                std::to_string(y) + ") lies outside the covered region");
    }
    const int col = std::clamp(static_cast<int>(std::floor(fx)), 0, config.n_col - 1);
    const int row = std::clamp(static_cast<int>(std::floor(fy)), 0, config.n_row - 1);
    return CellCoord{col, row};
}

/// Row-major global cell id.
inline std::size_t linearize(int col, int row, const GridConfig& config) {
    if (col < 0 || col >= config.n_col || row < 0 || row >= config.n_row) {
        throw std::out_of_range("linearize: cell (" + std::to_string(col) + ", " +
                                std::to_string(row) + ") outside " + std::to_string(config.n_col) +
                                "x" + std::to_string(config.n_row) + " grid");
    }
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(config.n_col) +
           static_cast<std::size_t>(col);
}

/// Inverse of linearize.
inline CellCoord delinearize(std::size_t cell_id, const GridConfig& config) {
    if (cell_id >= config.cell_total()) {
        throw std::out_of_range("delinearize: cell id " + std::to_string(cell_id) +
                                " outside grid");
    }
    const auto n_col = static_cast<std::size_t>(config.n_col);
    return CellCoord{static_cast<int>(cell_id % n_col), static_cast<int>(cell_id / n_col)};
}

/// The spatial index: point ids grouped by cell, plus cell-sorted coordinate
/// copies so block scans stream over contiguous memory.
struct GridIndex {
    GridConfig config;
    /// Permutation of 0..m-1 grouped by ascending cell id, stable within a
    /// cell by original index.
    std::vector<std::uint32_t> sorted_point_ids;
    /// Exclusive prefix sum over per-cell counts, length cell_total()+1;
    /// cell c owns sorted_point_ids[cell_start[c] .. cell_start[c+1]).
    std::vector<std::uint32_t> cell_start;
    /// Coordinates rearranged to match sorted_point_ids.
    std::vector<double> sorted_x;
    std::vector<double> sorted_y;

    [[nodiscard]] std::size_t point_count() const noexcept { return sorted_point_ids.size(); }

    [[nodiscard]] std::uint32_t cell_count(std::size_t cell_id) const {
        return cell_start[cell_id + 1] - cell_start[cell_id];
    }

    /// Head offset into sorted_point_ids; sentinel for empty cells.
    [[nodiscard]] std::uint32_t cell_head(std::size_t cell_id) const {
        return cell_count(cell_id) == 0 ? kEmptyCellHead : cell_start[cell_id];
    }

    /// Offsets [begin, end) covering cells (col_lo..col_hi) of one row.
    [[nodiscard]] std::pair<std::uint32_t, std::uint32_t> row_slice(int row, int col_lo,
                                                                    int col_hi) const {
        const auto first = linearize(col_lo, row, config);
        const auto last = linearize(col_hi, row, config);
        return {cell_start[first], cell_start[last + 1]};
    }

    /// Number of points in the clipped rectangular cell block.
    [[nodiscard]] std::size_t block_count(int col_lo, int col_hi, int row_lo, int row_hi) const {
        std::size_t total = 0;
        for (int row = row_lo; row <= row_hi; ++row) {
            const auto [begin, end] = row_slice(row, col_lo, col_hi);
            total += end - begin;
        }
        return total;
    }
};

/// Distribute all data points into cells: counting sort by cell id. The
/// per-cell counts and head offsets fall out of the prefix sum; the
/// within-cell order is the original point order (stable).
inline GridIndex build_index(const PointSet& data, const GridConfig& config) {
    const std::size_t m = data.count();
    if (m == 0) {
        throw std::invalid_argument("build_index: data set is empty");
    }
    if (m > std::numeric_limits<std::uint32_t>::max() - 1) {
        throw std::invalid_argument("build_index: too many points for 32-bit ids");
    }
    const std::size_t cells = config.cell_total();

    std::vector<std::uint32_t> cell_of(m);
    for (std::size_t i = 0; i < m; ++i) {
        const CellCoord cc = locate_cell(data.xs[i], data.ys[i], config);
        cell_of[i] = static_cast<std::uint32_t>(linearize(cc.col, cc.row, config));
    }

    GridIndex index;
    index.config = config;
    index.cell_start.assign(cells + 1, 0);
    for (std::size_t i = 0; i < m; ++i) {
        ++index.cell_start[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) {
        index.cell_start[c + 1] += index.cell_start[c];
    }

    index.sorted_point_ids.resize(m);
    index.sorted_x.resize(m);
    index.sorted_y.resize(m);
    std::vector<std::uint32_t> cursor(index.cell_start.begin(), index.cell_start.end() - 1);
    for (std::size_t i = 0; i < m; ++i) {
        const std::uint32_t pos = cursor[cell_of[i]]++;
        index.sorted_point_ids[pos] = static_cast<std::uint32_t>(i);
        index.sorted_x[pos] = data.xs[i];
        index.sorted_y[pos] = data.ys[i];
    }
    return index;
}

}  // namespace aidw
