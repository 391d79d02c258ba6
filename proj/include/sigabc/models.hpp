#pragma once

#include <span>
#include <string>
#include <vector>

#include "sigabc/rng.hpp"
#include "sigabc/streams.hpp"

namespace sigabc {

// --- MA(2) ------------------------------------------------------------------

struct MA2Params {
    double theta1 = 0.0;
    double theta2 = 0.0;
};

/// Identifiability triangle: theta1 in [-2,2], theta1+theta2 > -1, theta1-theta2 < 1, theta2 < 1.
bool ma2_in_triangle(double theta1, double theta2);

/// x_0 = 0, x_1 = e_1 + t1 e_0, x_t = e_t + t1 e_{t-1} + t2 e_{t-2}; T+1 samples on times 0..T.
TimeSeries simulate_ma2(const MA2Params& p, int T, Rng& rng);

/**
 * Exact Gaussian log-density of x_1..x_T under the MA(2) model.
 *
 * The covariance is CC^T without its last row and column, where C is the
 * (T+1)x(T+1) upper band matrix with rows (1, t1, t2).  Its trailing diagonal
 * entry 1+t1^2 belongs to x_1, so the values are stacked latest first
 * (x_T, ..., x_1).  Factorised with a band Cholesky in O(T).
 */
double ma2_log_likelihood(const MA2Params& p, const TimeSeries& y);

// --- Geometric Brownian motion ----------------------------------------------

struct GBMParams {
    double mu = 0.0;
    double sigma = 1.0;
};

/// Exact log-space discretisation on times 0, dt, ..., (T-1)dt with dt = 1/(T-1).
TimeSeries simulate_gbm(const GBMParams& p, double x0, int T, Rng& rng);

/// Sum of the Gaussian transition log-densities of log y_i given log y_{i-1}.
double gbm_log_likelihood(const GBMParams& p, const TimeSeries& y);

// --- Ricker -----------------------------------------------------------------

struct RickerParams {
    double log_r = 0.0;
    double phi = 1.0;
    double sigma = 0.0;
};

/// Floor applied to the latent population before taking its log.
inline constexpr double kRickerFloor = 1e-12;

/// One latent step: exp(log r + log N - N + sigma * eps), with N floored at kRickerFloor.
double ricker_step(double N, double log_r, double sigma, double eps);

/// Latent N_t for t = 1..T from N_0 with Poisson(phi N_t) observations on times 1..T.
TimeSeries simulate_ricker(const RickerParams& p, int T, double N0, Rng& rng);

/// log Po(k; mean).  A zero mean gives 0 for k = 0 and -inf otherwise.
double poisson_log_pmf(double k, double mean);

/// Number of entries in wood_summaries().
inline constexpr std::size_t kWoodSummaryCount = 14;

/**
 * Hand-crafted Ricker summaries: biased autocovariances at lags 0..5, the mean,
 * the count of zeros, the coefficients (b1, b2) of x_{t+1}^0.3 ~ b1 x_t^0.3 + b2 x_t^0.6,
 * and the four coefficients of the cubic (with intercept) regressing the sorted
 * first differences on the differences in their observed order.
 */
std::vector<double> wood_summaries(const TimeSeries& ts);

// --- Generalised stochastic epidemic ----------------------------------------

struct GSEParams {
    double beta = 0.0;
    double gamma = 0.0;
};

enum class GSEEventKind { Infection, Recovery };

/// One event and the state right after it.
struct GSEEvent {
    double t;
    GSEEventKind kind;
    int X;  ///< susceptible
    int Y;  ///< infected
};

struct GSETrajectory {
    int Z = 0;
    double T = 0.0;
    std::vector<GSEEvent> events;  ///< events in (0, T], strictly increasing times
    double phi1 = 0.0;             ///< time of the first infection (the seed case at t = 0)
    double int_XY = 0.0;           ///< integral of X_t Y_t over [phi1, T]
    double int_Y = 0.0;            ///< integral of Y_t over [phi1, T]
    int n_I = 0;                   ///< infections including the initial case
    int n_R = 0;                   ///< recoveries
};

/// Gillespie simulation from (X, Y) = (Z-1, 1) at t = 0 until extinction or T.
GSETrajectory simulate_gse(const GSEParams& p, int Z, double T, Rng& rng);

/// Rebuilds counts and integrals from an event list (used for observations read from disk).
GSETrajectory gse_trajectory_from_events(int Z, double T, std::vector<GSEEvent> events);

/// Two channels (Y/Z, R/Z) on times t/T: the initial state at t = 0, then one row per event.
TimeSeries gse_observation(const GSETrajectory& traj);

/// Inverse of gse_observation given Z and T.
GSETrajectory gse_trajectory_from_observation(const TimeSeries& obs, int Z, double T);

/// Event log `t,kind,X,Y` with kind I or R.
std::string gse_events_csv(const GSETrajectory& traj);

struct GSEHyper {
    double lambda_beta = 0.1;
    double nu_beta = 2.0;
    double lambda_gamma = 0.2;
    double nu_gamma = 0.5;
};

struct GammaShapeRate {
    double shape;
    double rate;
};

/// Conjugate posterior factors: beta ~ Gamma(lb + n_I - 1, nb + int XY), gamma ~ Gamma(lg + n_R, ng + int Y).
std::pair<GammaShapeRate, GammaShapeRate> gse_posterior_params(const GSETrajectory& traj, const GSEHyper& h);

/// One exact posterior draw (beta, gamma).
std::pair<double, double> gse_exact_posterior_sample(const GSETrajectory& traj, const GSEHyper& h, Rng& rng);

/// Gamma(shape, rate) draw.
double sample_gamma(double shape, double rate, Rng& rng);

}  // namespace sigabc
