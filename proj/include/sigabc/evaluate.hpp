#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigabc/abc.hpp"
#include "sigabc/mcmc.hpp"

namespace sigabc {

/// M x p parameter draws, one per row.
using SampleSet = Eigen::MatrixXd;

SampleSet to_sample_set(const ParticleSet& ps);
SampleSet to_sample_set(const Chain& chain);

/// Median Euclidean distance over all pairs of rows of the pooled set A u B.
double pooled_median_bandwidth(const SampleSet& A, const SampleSet& B);

/// Unbiased MMD^2 with a Gaussian RBF kernel of the given bandwidth.
double mmd2_between_posteriors(const SampleSet& A, const SampleSet& B, double bandwidth);

/// Same with the pooled median heuristic bandwidth.
double mmd2_between_posteriors(const SampleSet& A, const SampleSet& B);

/// |mean(A) - mean(B)|^2.
double sq_dist_means(const SampleSet& A, const SampleSet& B);

/// Samples as CSV `theta_1,...,theta_p`.
std::string samples_to_csv(const SampleSet& S);
SampleSet samples_from_csv(const std::string& text);

}  // namespace sigabc
