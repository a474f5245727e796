#pragma once

// Deterministic synthetic point generation. Positions are uniform in a
// bounding box; values follow one of three explicit rules so accuracy tests
// can compare predictions against an analytic field.

#include <cstdint>
#include <random>
#include <stdexcept>

#include "aidw/types.hpp"

namespace aidw {

/// How the z value of a generated data point is assigned.
enum class ValueRule {
    uniform,  ///< independent noise in [0, 1)
    planar,   ///< z = a*x + b*y + c (an interpolant should recover the plane)
    radial,   ///< z = distance from the bbox center
};

/// Coefficients of the planar value rule, z = a*x + b*y + c.
inline constexpr double kPlanarA = 1.5;
inline constexpr double kPlanarB = -2.5;
inline constexpr double kPlanarC = 4.0;

/// Evaluate the analytic plane used by ValueRule::planar.
inline double planar_field(double x, double y) noexcept {
    return kPlanarA * x + kPlanarB * y + kPlanarC;
}

namespace detail {

/// One double in [0, 1) from the top 53 bits of a 64-bit draw. Spelled out
/// (rather than std::uniform_real_distribution) so the mapping from seed to
/// coordinates is identical on every standard library.
inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// `count` data points uniformly distributed in `bbox`, values per `rule`.
/// Same (count, bbox, seed, rule) yields a bit-identical set.
inline PointSet generate_random_points(std::size_t count, const BoundingBox& bbox,
                                       std::uint64_t seed, ValueRule rule) {
    if (count == 0) {
        throw std::invalid_argument("generate_random_points: count must be >= 1");
    }
    if (!bbox.valid() || bbox.degenerate()) {
        throw std::invalid_argument("generate_random_points: bbox must have positive area");
    }
    std::mt19937_64 rng(seed);
    const double cx = bbox.min_x + 0.5 * bbox.width();
    const double cy = bbox.min_y + 0.5 * bbox.height();
    PointSet set;
    set.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = bbox.min_x + detail::unit_double(rng) * bbox.width();
        const double y = bbox.min_y + detail::unit_double(rng) * bbox.height();
        // Every point consumes exactly three draws regardless of the rule,
        // so positions depend only on (count, bbox, seed) and a value-rule
        // swap keeps the geometry fixed.
        const double noise = detail::unit_double(rng);
        double z = 0.0;
        switch (rule) {
            case ValueRule::uniform: z = noise; break;
            case ValueRule::planar: z = planar_field(x, y); break;
            case ValueRule::radial: z = std::hypot(x - cx, y - cy); break;
        }
        set.add(x, y, z);
    }
    return set;
}

/// `count` query locations uniformly distributed in `bbox` (no values).
inline PointSet generate_random_queries(std::size_t count, const BoundingBox& bbox,
                                        std::uint64_t seed) {
    if (count == 0) {
        throw std::invalid_argument("generate_random_queries: count must be >= 1");
    }
    if (!bbox.valid() || bbox.degenerate()) {
        throw std::invalid_argument("generate_random_queries: bbox must have positive area");
    }
    std::mt19937_64 rng(seed);
    PointSet set;
    set.xs.reserve(count);
    set.ys.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = bbox.min_x + detail::unit_double(rng) * bbox.width();
        const double y = bbox.min_y + detail::unit_double(rng) * bbox.height();
        set.add(x, y);
    }
    return set;
}

}  // namespace aidw
