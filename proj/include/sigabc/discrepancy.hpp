#pragma once

#include <functional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "sigabc/sigkernel.hpp"
#include "sigabc/streams.hpp"

namespace sigabc {

enum class DiscrepancyTag { SigDistance, SigKRR, SALinear, MMD2, WassersteinCM };

std::string to_string(DiscrepancyTag tag);

/// Loss of a simulation against an observation already bound in.
using LossFn = std::function<double(const TimeSeries& simulation)>;

/**
 * A configured discrepancy rho(x, y).
 *
 * `bind(y)` does the per-observation work once (transforming y, caching k(y,y),
 * summarising y) and returns the loss used inside the rejection loop.  Bound
 * losses are immutable and may be called from many threads.
 */
struct DiscrepancyFn {
    DiscrepancyTag tag;
    nlohmann::json config;
    std::function<LossFn(const TimeSeries& observation)> bind;

    double operator()(const TimeSeries& x, const TimeSeries& y) const { return bind(y)(x); }
};

/**
 * Unbiased squared MMD between the samples of X and Y treated as iid draws
 * (times are ignored, each row of values is one point).  The U-statistic can
 * be negative.
 */
double mmd2_unbiased(const TimeSeries& x, const TimeSeries& y, const StaticKernelSpec& spec);

/// Same estimator on raw point sets, rows of dimension `dim`.
double mmd2_unbiased(std::span<const double> x, std::span<const double> y, std::size_t dim,
                     const StaticKernelSpec& spec);

/// lambda = V / T for the curve-matching ground distance.
double lambda_heuristic(double vertical_range, double horizon);

/**
 * p-Wasserstein distance between the time-augmented empirical measures of y and x
 * under rho0((t,a),(s,b)) = |a - b|_2 + lambda |t - s|, uniform weights, solved exactly.
 * Returns (optimal cost)^(1/p).
 */
double wasserstein_cm(const TimeSeries& y, const TimeSeries& x, double lambda, int p = 1);

/// Squared Euclidean distance.
double euclidean_sq(std::span<const double> a, std::span<const double> b);

/// Largest per-channel (max - min) of one series; the "vertical range" of a stream.
double vertical_range(const TimeSeries& ts);

/// Median of |y_i - y_j| over all pairs of observation values, pooled across channels.
double median_abs_difference(const TimeSeries& ts);

// Factories -------------------------------------------------------------------

/// Signature ABC: pipeline applied to both series, then sig_distance.
DiscrepancyFn make_sig_discrepancy(TransformPipeline pipeline, SigKernelConfig cfg);

/// K2-ABC style loss with a Gaussian RBF static kernel of the given bandwidth.
DiscrepancyFn make_mmd_discrepancy(StaticKernelSpec spec);

DiscrepancyFn make_wasserstein_discrepancy(double lambda, int p = 1);

}  // namespace sigabc
