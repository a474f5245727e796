#pragma once

// Weighted interpolation over ALL data points (the kNN stage feeds only the
// adaptive exponent, never truncates the weighting):
//
//   Z(q) = sum_i w_i * z_i / sum_i w_i,   w_i = 1 / d(q, p_i)^alpha.
//
// Two traversal variants:
//   naive   — one pass in data-index order, literal weight expression.
//   blocked — data staged through a fixed-size local chunk (the CPU analog
//             of shared-memory tiling); weights computed without the pow()
//             call: a factored sqrt/multiply/divide chain when alpha is a
//             half-integer (d^2 raised to a multiple of 1/4), otherwise
//             exp(-alpha/2 * log(d^2)). Vectorized when the build enables
//             SIMD. A pinned-order switch degrades blocked to the naive
//             arithmetic for bit-exact comparison.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aidw/adaptive.hpp"
#include "aidw/executor.hpp"
#include "aidw/knn.hpp"
#include "aidw/types.hpp"

#if defined(AIDW_ENABLE_SIMD) && defined(__AVX512F__) && defined(__GLIBC__)
#define AIDW_WEIGHTS_AVX512 1
#include <immintrin.h>
extern "C" {
__m512d _ZGVeN8v_log(__m512d);
__m512d _ZGVeN8v_exp(__m512d);
}
#elif defined(AIDW_ENABLE_SIMD) && defined(__AVX2__) && defined(__FMA__) && defined(__GLIBC__)
#define AIDW_WEIGHTS_AVX2 1
#include <immintrin.h>
extern "C" {
__m256d _ZGVdN4v_log(__m256d);
__m256d _ZGVdN4v_exp(__m256d);
}
#endif

namespace aidw {

/// Traversal variant of the weighting pass.
enum class Variant { naive, blocked };

/// Chunk length of the blocked variant (power of two; 2 KiB of staged
/// squared distances fits comfortably in L1).
inline constexpr std::size_t kStageSize = 256;

/// Per-run predictions plus the per-query exponent actually used (constant
/// for the standard-IDW baseline).
struct InterpolationResult {
    std::vector<double> predicted;
    std::vector<double> alphas;
};

namespace detail {

/// The data set's value hull. Exact weights make every prediction a convex
/// combination of sample values; the final clamp enforces that invariant
/// against the few ulps of floating-point drift the summation can add.
struct ValueHull {
    double min_z = 0.0;
    double max_z = 0.0;
};

inline ValueHull value_hull(const PointSet& data) {
    ValueHull hull{data.zs.front(), data.zs.front()};
    for (double z : data.zs) {
        hull.min_z = std::min(hull.min_z, z);
        hull.max_z = std::max(hull.max_z, z);
    }
    return hull;
}

/// Squared snap tolerance: queries within 1e-12 of the bbox diagonal of a
/// data point take that point's value exactly (also dodges infinite
/// weights). Inclusive comparison, so a degenerate zero-diagonal box still
/// snaps exact coordinate hits.
inline double snap_tolerance_sq(const BoundingBox& bbox) {
    const double eps = 1.0e-12 * bbox.diagonal();
    return eps * eps;
}

/// Value of the data point nearest to (qx, qy), first index on ties. This
/// is the alpha -> infinity limit of the weighting, used when the weight
/// sums over- or underflow past double range.
inline double nearest_value(double qx, double qy, const PointSet& data) {
    std::size_t best = 0;
    double best_d2 = dist_sq(qx, qy, data.xs[0], data.ys[0]);
    for (std::size_t i = 1; i < data.count(); ++i) {
        const double d2 = dist_sq(qx, qy, data.xs[i], data.ys[i]);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return data.zs[best];
}

/// Turn accumulated weight sums into the prediction: quotient when the sums
/// are usable, nearest-value limit otherwise, clamped into the value hull.
inline double settle(double sum_w, double sum_wz, double qx, double qy, const PointSet& data,
                     const ValueHull& hull) {
    if (sum_w > 0.0 && std::isfinite(sum_w) && std::isfinite(sum_wz)) {
        const double predicted = sum_wz / sum_w;
        if (std::isfinite(predicted)) {
            return std::clamp(predicted, hull.min_z, hull.max_z);
        }
    }
    return nearest_value(qx, qy, data);
}

/// Naive variant: the textbook weight expression 1 / pow(sqrt(d2), alpha),
/// one point at a time, accumulation in data-index order.
inline double predict_naive(double qx, double qy, const PointSet& data, double alpha,
                            double snap_sq, const ValueHull& hull) {
    double sum_w = 0.0;
    double sum_wz = 0.0;
    const std::size_t m = data.count();
    for (std::size_t i = 0; i < m; ++i) {
        const double d2 = dist_sq(qx, qy, data.xs[i], data.ys[i]);
        if (d2 <= snap_sq) {
            return data.zs[i];
        }
        const double w = 1.0 / std::pow(std::sqrt(d2), alpha);
        sum_w += w;
        sum_wz += w * data.zs[i];
    }
    return settle(sum_w, sum_wz, qx, qy, data, hull);
}

/// Blocked variant with pinned accumulation order: chunks are staged, but
/// the weight expression and the order of every floating-point add match
/// predict_naive exactly, so results are bit-identical to it.
inline double predict_blocked_pinned(double qx, double qy, const PointSet& data, double alpha,
                                     double snap_sq, const ValueHull& hull) {
    double sum_w = 0.0;
    double sum_wz = 0.0;
    const std::size_t m = data.count();
    double stage[kStageSize];
    for (std::size_t base = 0; base < m; base += kStageSize) {
        const std::size_t nc = std::min(kStageSize, m - base);
        const double* px = data.xs.data() + base;
        const double* py = data.ys.data() + base;
        const double* pz = data.zs.data() + base;
        for (std::size_t j = 0; j < nc; ++j) {
            stage[j] = dist_sq(qx, qy, px[j], py[j]);
        }
        for (std::size_t j = 0; j < nc; ++j) {
            if (stage[j] <= snap_sq) {
                return pz[j];
            }
            const double w = 1.0 / std::pow(std::sqrt(stage[j]), alpha);
            sum_w += w;
            sum_wz += w * pz[j];
        }
    }
    return settle(sum_w, sum_wz, qx, qy, data, hull);
}

/// Factored form of w = d2^(-alpha/2). When 2*alpha is a small integer the
/// d2 exponent is a multiple of 1/4, so the power splits into correctly
/// rounded squares and square roots: d2^(n/4) = d2^(n/4 int) * sqrt(d2)^(bit
/// 1) * sqrt(sqrt(d2))^(bit 0) with n = 2*alpha. That covers every
/// half-integer alpha in [0.5, 8] — the default level ladder included —
/// within a few ulps of the pow() form, with no transcendental call.
struct WeightRecipe {
    bool exact = false;         ///< take the factored path
    int squares = 0;            ///< multiply the denominator by d2 this often
    bool root = false;          ///< ... and by sqrt(d2)
    bool quarter_root = false;  ///< ... and by sqrt(sqrt(d2))
};

inline WeightRecipe make_weight_recipe(double alpha) {
    WeightRecipe recipe;
    const double doubled = 2.0 * alpha;
    if (doubled == std::floor(doubled) && doubled >= 1.0 && doubled <= 16.0) {
        const int n = static_cast<int>(doubled);  // the d2 exponent is n/4
        recipe.exact = true;
        recipe.squares = n / 4;
        recipe.root = (n & 2) != 0;
        recipe.quarter_root = (n & 1) != 0;
    }
    return recipe;
}

inline double recipe_denominator(double d2, const WeightRecipe& recipe) {
    double denom = recipe.squares > 0 ? d2 : 1.0;
    for (int p = 1; p < recipe.squares; ++p) {
        denom *= d2;
    }
    if (recipe.root || recipe.quarter_root) {
        const double s = std::sqrt(d2);
        if (recipe.root) {
            denom *= s;
        }
        if (recipe.quarter_root) {
            denom *= std::sqrt(s);
        }
    }
    return denom;
}

#if defined(AIDW_WEIGHTS_AVX512)
inline __m512d recipe_denominator8(__m512d d2, const WeightRecipe& recipe) {
    __m512d denom = recipe.squares > 0 ? d2 : _mm512_set1_pd(1.0);
    for (int p = 1; p < recipe.squares; ++p) {
        denom = _mm512_mul_pd(denom, d2);
    }
    if (recipe.root || recipe.quarter_root) {
        const __m512d s = _mm512_sqrt_pd(d2);
        if (recipe.root) {
            denom = _mm512_mul_pd(denom, s);
        }
        if (recipe.quarter_root) {
            denom = _mm512_mul_pd(denom, _mm512_sqrt_pd(s));
        }
    }
    return denom;
}
#elif defined(AIDW_WEIGHTS_AVX2)
inline __m256d recipe_denominator4(__m256d d2, const WeightRecipe& recipe) {
    __m256d denom = recipe.squares > 0 ? d2 : _mm256_set1_pd(1.0);
    for (int p = 1; p < recipe.squares; ++p) {
        denom = _mm256_mul_pd(denom, d2);
    }
    if (recipe.root || recipe.quarter_root) {
        const __m256d s = _mm256_sqrt_pd(d2);
        if (recipe.root) {
            denom = _mm256_mul_pd(denom, s);
        }
        if (recipe.quarter_root) {
            denom = _mm256_mul_pd(denom, _mm256_sqrt_pd(s));
        }
    }
    return denom;
}
#endif

/// Optimized blocked variant: squared distances staged per chunk, weights
/// from the factored recipe for half-integer alpha, otherwise as
/// exp(e * log(d2)) with e = -alpha/2 (identical to 1/d^alpha in exact
/// arithmetic, within a few ulps in floating point), chunk partial sums
/// folded into the running totals. Vector code paths when enabled.
inline double predict_blocked_fast(double qx, double qy, const PointSet& data, double alpha,
                                   double snap_sq, const ValueHull& hull) {
    const double e = -0.5 * alpha;
    const WeightRecipe recipe = make_weight_recipe(alpha);
    double sum_w = 0.0;
    double sum_wz = 0.0;
    const std::size_t m = data.count();
    alignas(64) double stage[kStageSize];

#if defined(AIDW_WEIGHTS_AVX512)
    const __m512d qxv = _mm512_set1_pd(qx);
    const __m512d qyv = _mm512_set1_pd(qy);
    const __m512d ev = _mm512_set1_pd(e);
    const __m512d snapv = _mm512_set1_pd(snap_sq);
#elif defined(AIDW_WEIGHTS_AVX2)
    const __m256d qxv = _mm256_set1_pd(qx);
    const __m256d qyv = _mm256_set1_pd(qy);
    const __m256d ev = _mm256_set1_pd(e);
    const __m256d snapv = _mm256_set1_pd(snap_sq);
#endif

    for (std::size_t base = 0; base < m; base += kStageSize) {
        const std::size_t nc = std::min(kStageSize, m - base);
        const double* px = data.xs.data() + base;
        const double* py = data.ys.data() + base;
        const double* pz = data.zs.data() + base;

        // Stage the chunk's squared distances and watch for snap hits.
        bool snap_hit = false;
        std::size_t j = 0;
#if defined(AIDW_WEIGHTS_AVX512)
        __mmask8 snap_mask = 0;
        for (; j + 8 <= nc; j += 8) {
            const __m512d dx = _mm512_sub_pd(_mm512_loadu_pd(px + j), qxv);
            const __m512d dy = _mm512_sub_pd(_mm512_loadu_pd(py + j), qyv);
            const __m512d d2 = _mm512_fmadd_pd(dy, dy, _mm512_mul_pd(dx, dx));
            _mm512_store_pd(stage + j, d2);
            snap_mask |= _mm512_cmp_pd_mask(d2, snapv, _CMP_LE_OQ);
        }
        snap_hit = snap_mask != 0;
#elif defined(AIDW_WEIGHTS_AVX2)
        int snap_bits = 0;
        for (; j + 4 <= nc; j += 4) {
            const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(px + j), qxv);
            const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(py + j), qyv);
            const __m256d d2 = _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx));
            _mm256_store_pd(stage + j, d2);
            snap_bits |= _mm256_movemask_pd(_mm256_cmp_pd(d2, snapv, _CMP_LE_OQ));
        }
        snap_hit = snap_bits != 0;
#endif
        for (; j < nc; ++j) {
            const double d2 = dist_sq(qx, qy, px[j], py[j]);
            stage[j] = d2;
            snap_hit = snap_hit || d2 <= snap_sq;
        }
        if (snap_hit) {
            for (std::size_t s = 0; s < nc; ++s) {
                if (stage[s] <= snap_sq) {
                    return pz[s];
                }
            }
        }

        // Weights over the staged chunk, chunk partial into running sums.
        double chunk_w = 0.0;
        double chunk_wz = 0.0;
        j = 0;
#if defined(AIDW_WEIGHTS_AVX512)
        __m512d sw = _mm512_setzero_pd();
        __m512d swz = _mm512_setzero_pd();
        if (recipe.exact) {
            const __m512d ones = _mm512_set1_pd(1.0);
            for (; j + 8 <= nc; j += 8) {
                const __m512d d2 = _mm512_load_pd(stage + j);
                const __m512d w = _mm512_div_pd(ones, recipe_denominator8(d2, recipe));
                sw = _mm512_add_pd(sw, w);
                swz = _mm512_fmadd_pd(w, _mm512_loadu_pd(pz + j), swz);
            }
        } else {
            for (; j + 8 <= nc; j += 8) {
                const __m512d d2 = _mm512_load_pd(stage + j);
                const __m512d w = _ZGVeN8v_exp(_mm512_mul_pd(ev, _ZGVeN8v_log(d2)));
                sw = _mm512_add_pd(sw, w);
                swz = _mm512_fmadd_pd(w, _mm512_loadu_pd(pz + j), swz);
            }
        }
        chunk_w = _mm512_reduce_add_pd(sw);
        chunk_wz = _mm512_reduce_add_pd(swz);
#elif defined(AIDW_WEIGHTS_AVX2)
        __m256d sw = _mm256_setzero_pd();
        __m256d swz = _mm256_setzero_pd();
        if (recipe.exact) {
            const __m256d ones = _mm256_set1_pd(1.0);
            for (; j + 4 <= nc; j += 4) {
                const __m256d d2 = _mm256_load_pd(stage + j);
                const __m256d w = _mm256_div_pd(ones, recipe_denominator4(d2, recipe));
                sw = _mm256_add_pd(sw, w);
                swz = _mm256_fmadd_pd(w, _mm256_loadu_pd(pz + j), swz);
            }
        } else {
            for (; j + 4 <= nc; j += 4) {
                const __m256d d2 = _mm256_load_pd(stage + j);
                const __m256d w = _ZGVdN4v_exp(_mm256_mul_pd(ev, _ZGVdN4v_log(d2)));
                sw = _mm256_add_pd(sw, w);
                swz = _mm256_fmadd_pd(w, _mm256_loadu_pd(pz + j), swz);
            }
        }
        {
            const __m128d lo_w = _mm256_castpd256_pd128(sw);
            const __m128d hi_w = _mm256_extractf128_pd(sw, 1);
            const __m128d pair_w = _mm_add_pd(lo_w, hi_w);
            chunk_w = _mm_cvtsd_f64(_mm_add_sd(pair_w, _mm_unpackhi_pd(pair_w, pair_w)));
            const __m128d lo_z = _mm256_castpd256_pd128(swz);
            const __m128d hi_z = _mm256_extractf128_pd(swz, 1);
            const __m128d pair_z = _mm_add_pd(lo_z, hi_z);
            chunk_wz = _mm_cvtsd_f64(_mm_add_sd(pair_z, _mm_unpackhi_pd(pair_z, pair_z)));
        }
#endif
        for (; j < nc; ++j) {
            const double w = recipe.exact ? 1.0 / recipe_denominator(stage[j], recipe)
                                          : std::exp(e * std::log(stage[j]));
            chunk_w += w;
            chunk_wz += w * pz[j];
        }
        sum_w += chunk_w;
        sum_wz += chunk_wz;
    }
    return settle(sum_w, sum_wz, qx, qy, data, hull);
}

/// Shared per-query context of one predict_all run.
struct PredictContext {
    double snap_sq = 0.0;
    ValueHull hull;
    Variant variant = Variant::blocked;
    bool pinned_order = false;
};

inline double predict_one(double qx, double qy, const PointSet& data, double alpha,
                          const PredictContext& ctx) {
    if (ctx.variant == Variant::naive) {
        return predict_naive(qx, qy, data, alpha, ctx.snap_sq, ctx.hull);
    }
    return ctx.pinned_order ? predict_blocked_pinned(qx, qy, data, alpha, ctx.snap_sq, ctx.hull)
                            : predict_blocked_fast(qx, qy, data, alpha, ctx.snap_sq, ctx.hull);
}

inline void validate_interpolation_inputs(const PointSet& data) {
    if (data.count() == 0) {
        throw std::invalid_argument("interpolation: data set is empty");
    }
    if (!data.has_values()) {
        throw std::invalid_argument("interpolation: data set carries no values");
    }
}

}  // namespace detail

/// One standard-IDW prediction with constant exponent, naive traversal.
inline double idw_predict(const QueryPoint& q, const PointSet& data, double alpha) {
    detail::validate_interpolation_inputs(data);
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("idw_predict: alpha must be positive finite");
    }
    PointSet probe;
    probe.add(q.x, q.y);
    const BoundingBox bbox = compute_bbox(data, probe);
    return detail::predict_naive(q.x, q.y, data, alpha, detail::snap_tolerance_sq(bbox),
                                 detail::value_hull(data));
}

/// Standard-IDW baseline over a query set: constant alpha, chosen variant,
/// predictions written to each query's own slot for any worker count.
inline InterpolationResult idw_predict_all(const PointSet& queries, const PointSet& data,
                                           double alpha, Variant variant, int workers = 1,
                                           bool pinned_order = false) {
    detail::validate_interpolation_inputs(data);
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("idw_predict_all: alpha must be positive finite");
    }
    const BoundingBox bbox = compute_bbox(data, queries);
    detail::PredictContext ctx{detail::snap_tolerance_sq(bbox), detail::value_hull(data),
                               variant, pinned_order};
    auto per_query = [&](std::size_t i) -> double {
        try {
            return detail::predict_one(queries.xs[i], queries.ys[i], data, alpha, ctx);
        } catch (const std::exception& e) {
            throw std::runtime_error("idw_predict_all: query " + std::to_string(i) + ": " +
                                     e.what());
        }
    };
    InterpolationResult result;
    result.predicted = parallel_map_indexed(queries.count(), per_query, workers, 4);
    result.alphas.assign(queries.count(), alpha);
    return result;
}

/// AIDW over a query set: each query's exponent comes from its kNN average
/// distance via the adaptive pipeline, then the same full-data weighting as
/// the baseline. `knn` must hold one result per query (input order).
inline InterpolationResult aidw_predict_all(const PointSet& queries, const PointSet& data,
                                            const std::vector<KnnResult>& knn,
                                            const AidwParams& params, Variant variant,
                                            int workers = 1, bool pinned_order = false) {
    detail::validate_interpolation_inputs(data);
    params.validate();
    if (knn.size() != queries.count()) {
        throw std::invalid_argument("aidw_predict_all: " + std::to_string(knn.size()) +
                                    " kNN results for " + std::to_string(queries.count()) +
                                    " queries");
    }
    const BoundingBox bbox = compute_bbox(data, queries);
    const double area = params.area > 0.0 ? params.area : bbox.area();
    detail::PredictContext ctx{detail::snap_tolerance_sq(bbox), detail::value_hull(data),
                               variant, pinned_order};
    const std::size_t m = data.count();
    auto per_query = [&](std::size_t i) -> std::pair<double, double> {
        try {
            const AdaptiveAlpha adaptive = adaptive_alpha(knn[i], m, area, params);
            const double predicted =
                detail::predict_one(queries.xs[i], queries.ys[i], data, adaptive.alpha, ctx);
            return {predicted, adaptive.alpha};
        } catch (const std::exception& e) {
            throw std::runtime_error("aidw_predict_all: query " + std::to_string(i) + ": " +
                                     e.what());
        }
    };
    auto rows = parallel_map_indexed(queries.count(), per_query, workers, 4);
    InterpolationResult result;
    result.predicted.reserve(rows.size());
    result.alphas.reserve(rows.size());
    for (const auto& [predicted, alpha] : rows) {
        result.predicted.push_back(predicted);
        result.alphas.push_back(alpha);
    }
    return result;
}

}  // namespace aidw
