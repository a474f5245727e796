#pragma once

// Shared domain types for the interpolation engine: point records, SoA point
// containers, bounding boxes, and the adaptive-IDW parameter bundle.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace aidw {

/// A known sample: planar position plus the scalar value to interpolate.
struct DataPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// A location where a prediction is requested.
struct QueryPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Structure-of-arrays container for data or query points.
///
/// For query sets `zs` stays empty; for data sets `zs.size() == xs.size()`.
/// The SoA layout keeps the hot interpolation and search loops streaming over
/// contiguous coordinate arrays.
struct PointSet {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> zs;

    [[nodiscard]] std::size_t count() const noexcept { return xs.size(); }
    [[nodiscard]] bool has_values() const noexcept { return !zs.empty(); }

    void add(double x, double y) {
        xs.push_back(x);
        ys.push_back(y);
    }

    void add(double x, double y, double z) {
        xs.push_back(x);
        ys.push_back(y);
        zs.push_back(z);
    }

    void reserve(std::size_t n) {
        xs.reserve(n);
        ys.reserve(n);
        zs.reserve(n);
    }

    [[nodiscard]] DataPoint data_point(std::size_t i) const {
        return DataPoint{xs.at(i), ys.at(i), zs.at(i)};
    }

    [[nodiscard]] QueryPoint query_point(std::size_t i) const {
        return QueryPoint{xs.at(i), ys.at(i)};
    }
};

/// Axis-aligned box over the plane; used both as the generation region and as
/// the covered region of the spatial grid.
struct BoundingBox {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    [[nodiscard]] double width() const noexcept { return max_x - min_x; }
    [[nodiscard]] double height() const noexcept { return max_y - min_y; }
    [[nodiscard]] double area() const noexcept { return width() * height(); }
    [[nodiscard]] double diagonal() const noexcept { return std::hypot(width(), height()); }

    [[nodiscard]] bool valid() const noexcept { return min_x <= max_x && min_y <= max_y; }
    [[nodiscard]] bool degenerate() const noexcept { return !(area() > 0.0); }

    [[nodiscard]] bool contains(double x, double y) const noexcept {
        return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
    }
};

/// Every tunable of the adaptive power-parameter pipeline, plus the neighbor
/// count consumed by the kNN stage.
struct AidwParams {
    int k = 15;
    double r_min = 0.0;
    double r_max = 2.0;
    /// Five distance-decay levels; the triangular mapping interpolates
    /// between adjacent levels across the fixed mu breakpoints.
    std::array<double, 5> alpha_levels{0.5, 1.0, 2.0, 3.0, 4.0};
    /// Study-region area. Values <= 0 mean "derive from the bounding box of
    /// all points" at pipeline entry.
    double area = 0.0;

    void validate() const {
        if (k < 1) {
            throw std::invalid_argument("AidwParams: k must be >= 1, got " + std::to_string(k));
        }
        if (!(r_min < r_max)) {
            throw std::invalid_argument("AidwParams: rMin must be < rMax");
        }
        for (double a : alpha_levels) {
            if (!(a > 0.0) || !std::isfinite(a)) {
                throw std::invalid_argument("AidwParams: alpha levels must be positive finite");
            }
        }
    }
};

/// Breakpoints of the triangular membership mapping; the six branch
/// boundaries are 0.0, these five values, and 1.0.
inline constexpr std::array<double, 5> kMuBreakpoints{0.1, 0.3, 0.5, 0.7, 0.9};

/// Tight box over the union of both sets. Either set may be empty, but not
/// both. A single point yields a degenerate (zero-area) box, which is legal
/// here and rejected later by grid construction.
inline BoundingBox compute_bbox(const PointSet& data, const PointSet& queries) {
    if (data.count() == 0 && queries.count() == 0) {
        throw std::invalid_argument("compute_bbox: both point sets are empty");
    }
    double lo_x = std::numeric_limits<double>::infinity();
    double lo_y = std::numeric_limits<double>::infinity();
    double hi_x = -std::numeric_limits<double>::infinity();
    double hi_y = -std::numeric_limits<double>::infinity();
    auto absorb = [&](const PointSet& set) {
        for (std::size_t i = 0; i < set.count(); ++i) {
            lo_x = std::min(lo_x, set.xs[i]);
            lo_y = std::min(lo_y, set.ys[i]);
            hi_x = std::max(hi_x, set.xs[i]);
            hi_y = std::max(hi_y, set.ys[i]);
        }
    };
    absorb(data);
    absorb(queries);
    return BoundingBox{lo_x, lo_y, hi_x, hi_y};
}

/// Ingestion validation: every coordinate (and value, when present) finite.
inline void validate_finite(const PointSet& set, const std::string& label) {
    for (std::size_t i = 0; i < set.count(); ++i) {
        if (!std::isfinite(set.xs[i]) || !std::isfinite(set.ys[i])) {
            throw std::invalid_argument(label + ": non-finite coordinate at point " +
                                        std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < set.zs.size(); ++i) {
        if (!std::isfinite(set.zs[i])) {
            throw std::invalid_argument(label + ": non-finite value at point " +
                                        std::to_string(i));
        }
    }
}

}  // namespace aidw
