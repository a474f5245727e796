#pragma once

// The adaptive power-parameter pipeline: from a query's average
// nearest-neighbor distance to the distance-decay exponent used by the
// weighted interpolation. Chain: expected_nn_distance -> nn_statistic ->
// normalize_mu -> alpha_from_mu.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "aidw/knn.hpp"
#include "aidw/types.hpp"

namespace aidw {

/// Expected nearest-neighbor distance of m points spread over `area`:
/// 1 / (2 * sqrt(m / area)).
inline double expected_nn_distance(std::size_t m, double area) {
    if (m == 0) {
        throw std::invalid_argument("expected_nn_distance: m must be >= 1");
    }
    if (!(area > 0.0) || !std::isfinite(area)) {
        throw std::invalid_argument("expected_nn_distance: area must be positive finite");
    }
    return 1.0 / (2.0 * std::sqrt(static_cast<double>(m) / area));
}

/// Nearest-neighbor statistic R(S0) = rObs / rExp: below 1 means locally
/// clustered, near 1 random, above 1 dispersed.
inline double nn_statistic(double r_obs, double r_exp) {
    if (!(r_exp > 0.0)) {
        throw std::invalid_argument("nn_statistic: rExp must be positive");
    }
    if (r_obs < 0.0) {
        throw std::invalid_argument("nn_statistic: rObs must be non-negative");
    }
    return r_obs / r_exp;
}

/// Fuzzy membership normalization of R into [0, 1]:
///   0 for R <= rMin, 1 for R >= rMax,
///   0.5 - 0.5 * cos((pi / rMax) * (R - rMin)) in between.
/// The cosine argument divides by rMax (not rMax - rMin) on purpose; with
/// the default bounds 0.0 / 2.0 both branch seams are exactly continuous,
/// while arbitrary bounds may jump at rMax. That quirk is kept as-is rather
/// than silently re-derived.
inline double normalize_mu(double r_statistic, double r_min = 0.0, double r_max = 2.0) {
    if (!(r_min < r_max)) {
        throw std::invalid_argument("normalize_mu: rMin must be < rMax");
    }
    if (r_statistic <= r_min) {
        return 0.0;
    }
    if (r_statistic >= r_max) {
        return 1.0;
    }
    return 0.5 - 0.5 * std::cos((std::numbers::pi / r_max) * (r_statistic - r_min));
}

/// Triangular membership mapping from mu to the distance-decay value:
/// constant alpha1 on [0, 0.1], then linear between adjacent levels across
/// the breakpoints 0.1/0.3/0.5/0.7/0.9, constant alpha5 on [0.9, 1].
///
/// Each linear piece is evaluated as a + t * (b - a), which returns the
/// level values exactly at the breakpoints and collapses to a constant
/// exactly when all levels are equal.
inline double alpha_from_mu(double mu, const std::array<double, 5>& levels) {
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw std::domain_error("alpha_from_mu: mu = " + std::to_string(mu) +
                                " outside [0, 1]");
    }
    if (mu < kMuBreakpoints.front()) {
        return levels.front();
    }
    if (mu >= kMuBreakpoints.back()) {
        return levels.back();
    }
    // mu in [0.1, 0.9): find the breakpoint interval (lower-inclusive).
    std::size_t seg = 0;
    while (mu >= kMuBreakpoints[seg + 1]) {
        ++seg;
    }
    const double t = 5.0 * (mu - kMuBreakpoints[seg]);  // interval width is 0.2
    return levels[seg] + t * (levels[seg + 1] - levels[seg]);
}

/// Full per-query record of the adaptive pipeline, kept intermediate by
/// intermediate so each step is testable.
struct AdaptiveAlpha {
    double r_exp = 0.0;
    double r_obs = 0.0;
    double r_statistic = 0.0;
    double mu_r = 0.0;
    double alpha = 0.0;
};

/// Chain the full pipeline for one query: rObs is the kNN average distance,
/// m and area describe the data set and study region.
inline AdaptiveAlpha adaptive_alpha(const KnnResult& knn, std::size_t m, double area,
                                    const AidwParams& params) {
    params.validate();
    if (!knn.exhausted && knn.size() != static_cast<std::size_t>(params.k)) {
        throw std::invalid_argument("adaptive_alpha: kNN result holds " +
                                    std::to_string(knn.size()) + " distances, expected " +
                                    std::to_string(params.k));
    }
    AdaptiveAlpha record;
    record.r_exp = expected_nn_distance(m, area);
    record.r_obs = knn.average_distance;
    record.r_statistic = nn_statistic(record.r_obs, record.r_exp);
    record.mu_r = normalize_mu(record.r_statistic, params.r_min, params.r_max);
    record.alpha = alpha_from_mu(record.mu_r, params.alpha_levels);
    return record;
}

}  // namespace aidw
