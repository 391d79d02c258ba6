#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigabc/abc.hpp"
#include "sigabc/models.hpp"
#include "sigabc/rng.hpp"
#include "sigabc/streams.hpp"

namespace sigabc {

struct Chain {
    std::vector<ParamVector> states;  ///< state after each iteration
    std::vector<double> log_post;     ///< target value stored with each state
    std::size_t accepted = 0;

    std::size_t size() const { return states.size(); }
    double acceptance_rate() const;
};

/// Log target density; -inf marks points outside the support.
using LogDensity = std::function<double(std::span<const double>)>;

/**
 * Random-walk Metropolis-Hastings with N(0, proposal_cov) increments.
 * Calls log_post once at init and once per iteration.  Every iteration draws
 * p normals and one uniform, accepted or not, so the stream layout is fixed.
 */
Chain mh_random_walk(const LogDensity& log_post, ParamVector init, const Eigen::MatrixXd& proposal_cov,
                     std::size_t iters, Rng& rng);

/// (2.38^2 / p) times the pilot's sample covariance plus 1e-8 on the diagonal.
Eigen::MatrixXd tune_mh(const Chain& pilot);

/**
 * Bootstrap particle filter estimate of log p(y | theta) for the Ricker model.
 * Particles start at N0, move through the latent recursion, are weighted by the
 * Poisson observation mass and resampled systematically at every step.
 * Returns -inf as soon as every weight vanishes.
 */
double bootstrap_pf_loglik(const RickerParams& p, const TimeSeries& y, int P, Rng& rng, double N0 = 1.0);

/// Exact Ricker log-likelihood when sigma = 0 (deterministic latent path).
double ricker_deterministic_loglik(const RickerParams& p, const TimeSeries& y, double N0 = 1.0);

/// Noisy log-likelihood estimator; draws its randomness from the given stream.
using LogLikEstimator = std::function<double(std::span<const double>, Rng&)>;

/**
 * Pseudo-marginal MH: the estimate for the current state is kept until a
 * proposal is accepted.  Proposals and accept/reject draws come from `rng`;
 * the estimator only ever sees `est_rng`, so with a deterministic estimator the
 * chain matches mh_random_walk on the exact target step for step.
 */
Chain pseudo_marginal_mh(const LogDensity& log_prior, const LogLikEstimator& loglik, ParamVector init,
                         const Eigen::MatrixXd& proposal_cov, std::size_t iters, Rng& rng, Rng& est_rng);

struct PmcmcOptions {
    std::size_t pilot_iters = 5000;
    double pilot_scale = 0.1;  ///< pilot sd per dimension, as a fraction of the prior range
    double N0 = 1.0;
};

/// Particle MCMC for the Ricker model: pilot from the prior mean, tune_mh, then the main run
/// continuing from the pilot's last state.
Chain pmcmc(const PriorSpec& prior, const TimeSeries& y, std::size_t iters, int P, std::uint64_t seed,
            const PmcmcOptions& opt = {});

struct MhOptions {
    std::size_t pilot_iters = 5000;
    double pilot_scale = 0.1;
};

/// Same pilot-tune-run schedule with an exact log-likelihood.
Chain tuned_mh(const PriorSpec& prior, const LogDensity& loglik, std::size_t iters, std::uint64_t seed,
               const MhOptions& opt = {});

/// Evenly spaced subsample of `keep` states ending at the last one: indices L-1-(keep-1-j)*(L/keep).
Chain thin(const Chain& chain, std::size_t keep);

/// `iter,theta_1..theta_p,log_post`.
std::string chain_to_csv(const Chain& chain);

}  // namespace sigabc
