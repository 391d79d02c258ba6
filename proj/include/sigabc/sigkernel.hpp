#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sigabc/streams.hpp"

namespace sigabc {

enum class StaticKernelKind { Linear, GaussianRBF };

/// Point-wise kernel used to lift path values into feature space.
struct StaticKernelSpec {
    StaticKernelKind kind = StaticKernelKind::Linear;
    double bandwidth = 1.0;  ///< sigma, RBF only

    static StaticKernelSpec linear() { return {StaticKernelKind::Linear, 1.0}; }
    static StaticKernelSpec rbf(double sigma);

    void validate() const;
};

struct SigKernelConfig {
    StaticKernelSpec static_kernel;
    int dyadic_order = 0;
    int max_dyadic_order = 6;

    void validate() const;
};

/// <a,b> for Linear, exp(-|a-b|^2 / (2 sigma^2)) for GaussianRBF.
double static_kernel_eval(const StaticKernelSpec& spec, std::span<const double> a,
                          std::span<const double> b);

/**
 * Signature kernel of the piecewise-linear interpolations of x and y.
 *
 * Solves the Goursat problem d2u/dsdt = A u with unit boundary on a grid
 * refined 2^dyadic_order times per axis, using the explicit update
 *
 *   u[i+1][j+1] = (u[i+1][j] + u[i][j+1]) (1 + a/2 + a^2/12) - u[i][j] (1 - a^2/12)
 *
 * where a is the static-kernel cross increment of the enclosing coarse cell
 * divided by 4^dyadic_order.  For the linear kernel the sub-cell increments are
 * exact; for RBF the uniform split is an approximation.
 *
 * Throws NumericalError if the solution is not finite, which almost always
 * means the inputs need range normalisation.
 */
double sig_kernel(const TimeSeries& x, const TimeSeries& y, const SigKernelConfig& cfg);

/// |Sig(x) - Sig(y)|^2 via k(x,x) + k(y,y) - 2k(x,y).  Slightly negative results
/// (> -1e-8) are clamped to zero; anything lower throws NumericalError.
double sig_distance(const TimeSeries& x, const TimeSeries& y, const SigKernelConfig& cfg);

/// Same, reusing precomputed k(x,x) and k(y,y).
double sig_distance_from_parts(double kxx, double kyy, double kxy);

/// Gram matrix G[i][j] = k(xs[i], xs[j]).  Upper triangle computed in parallel
/// and mirrored, so the result is exactly symmetric.
Eigen::MatrixXd gram_matrix(std::span<const TimeSeries> xs, const SigKernelConfig& cfg);
Eigen::MatrixXd gram_matrix_serial(std::span<const TimeSeries> xs, const SigKernelConfig& cfg);

/// Cross Gram K[i][j] = k(xs[i], ys[j]).
Eigen::MatrixXd cross_gram(std::span<const TimeSeries> xs, std::span<const TimeSeries> ys,
                           const SigKernelConfig& cfg);
Eigen::MatrixXd cross_gram_serial(std::span<const TimeSeries> xs, std::span<const TimeSeries> ys,
                                  const SigKernelConfig& cfg);

}  // namespace sigabc
