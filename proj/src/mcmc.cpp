#include "sigabc/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigabc/error.hpp"
#include "sigabc/util.hpp"

namespace sigabc {

using detail::require;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd proposal_factor(const Eigen::MatrixXd& cov, std::size_t p) {
    require(cov.rows() == static_cast<Eigen::Index>(p) && cov.cols() == static_cast<Eigen::Index>(p),
            "proposal covariance has the wrong shape");
    require(cov.allFinite() && cov.isApprox(cov.transpose()), "proposal covariance must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    require(llt.info() == Eigen::Success, "proposal covariance must be positive definite");
    return llt.matrixL();
}

ParamVector propose(const ParamVector& x, const Eigen::MatrixXd& L, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    const Eigen::VectorXd step = L * z;
    ParamVector y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += step[static_cast<Eigen::Index>(i)];
    return y;
}

double log_uniform(Rng& rng) { return std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng)); }

Eigen::MatrixXd isotropic_pilot_cov(const PriorSpec& prior, double scale) {
    const std::vector<double> r = prior.bounded() ? prior.range() : prior.mean();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::pow(scale * r[i], 2);
    return c;
}

}  // namespace

double Chain::acceptance_rate() const {
    return states.empty() ? 0.0 : static_cast<double>(accepted) / static_cast<double>(states.size());
}

Chain mh_random_walk(const LogDensity& log_post, ParamVector init, const Eigen::MatrixXd& proposal_cov,
                     std::size_t iters, Rng& rng) {
    require(!init.empty(), "MH needs a non-empty initial state");
    const Eigen::MatrixXd L = proposal_factor(proposal_cov, init.size());
    double cur_lp = log_post(init);
    require(std::isfinite(cur_lp), "MH initial log-posterior is not finite");
    Chain ch;
    ch.states.reserve(iters);
    ch.log_post.reserve(iters);
    ParamVector cur = std::move(init);
    for (std::size_t it = 0; it < iters; ++it) {
        ParamVector prop = propose(cur, L, rng);
        const double lu = log_uniform(rng);
        const double lp = log_post(prop);
        if (!std::isnan(lp) && lp > kNegInf && lu < lp - cur_lp) {
            cur = std::move(prop);
            cur_lp = lp;
            ++ch.accepted;
        }
        ch.states.push_back(cur);
        ch.log_post.push_back(cur_lp);
    }
    return ch;
}

Eigen::MatrixXd tune_mh(const Chain& pilot) {
    require(!pilot.states.empty(), "tuning needs a non-empty pilot chain");
    const std::size_t p = pilot.states.front().size(), L = pilot.size();
    require(L >= 10 * p, "pilot chain must have at least 10 states per dimension");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < p; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pilot.states[i][j];
    X.rowwise() -= X.colwise().mean();
    Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(L - 1);
    for (Eigen::Index j = 0; j < cov.rows(); ++j)
        if (!(cov(j, j) > 0.0)) throw ValidationError("pilot chain has zero variance in dimension " + std::to_string(j + 1));
    cov *= 2.38 * 2.38 / static_cast<double>(p);
    cov.diagonal().array() += 1e-8;
    return cov;
}

double ricker_deterministic_loglik(const RickerParams& p, const TimeSeries& y, double N0) {
    require(y.dim() == 1, "Ricker likelihood needs a univariate series");
    double N = N0, ll = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        N = ricker_step(N, p.log_r, p.sigma, 0.0);
        ll += poisson_log_pmf(y.value(t, 0), p.phi * N);
    }
    return ll;
}

double bootstrap_pf_loglik(const RickerParams& p, const TimeSeries& y, int P, Rng& rng, double N0) {
    require(P >= 2, "particle filter needs at least two particles");
    require(y.dim() == 1, "Ricker particle filter needs a univariate series");
    const auto np = static_cast<std::size_t>(P);
    std::vector<double> N(np, N0), next(np), logw(np);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double ll = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double obs = y.value(t, 0);
        double mx = kNegInf;
        for (std::size_t k = 0; k < np; ++k) {
            N[k] = ricker_step(N[k], p.log_r, p.sigma, normal(rng));
            logw[k] = poisson_log_pmf(obs, p.phi * N[k]);
            if (std::isnan(logw[k])) logw[k] = kNegInf;
            mx = std::max(mx, logw[k]);
        }
        if (mx == kNegInf) return kNegInf;
        double sum = 0.0;
        for (std::size_t k = 0; k < np; ++k) sum += std::exp(logw[k] - mx);
        ll += mx + std::log(sum / static_cast<double>(np));

        // Systematic resampling.
        const double u0 = unif(rng) / static_cast<double>(np);
        double cum = std::exp(logw[0] - mx) / sum;
        std::size_t j = 0;
        for (std::size_t k = 0; k < np; ++k) {
            const double u = u0 + static_cast<double>(k) / static_cast<double>(np);
            while (u > cum && j + 1 < np) {
                ++j;
                cum += std::exp(logw[j] - mx) / sum;
            }
            next[k] = N[j];
        }
        std::swap(N, next);
    }
    return ll;
}

Chain pseudo_marginal_mh(const LogDensity& log_prior, const LogLikEstimator& loglik, ParamVector init,
                         const Eigen::MatrixXd& proposal_cov, std::size_t iters, Rng& rng, Rng& est_rng) {
    require(!init.empty(), "pseudo-marginal MH needs a non-empty initial state");
    const Eigen::MatrixXd L = proposal_factor(proposal_cov, init.size());
    const double lp0 = log_prior(init);
    require(std::isfinite(lp0), "initial state is outside the prior support");
    double cur_lp = lp0 + loglik(init, est_rng);
    require(std::isfinite(cur_lp), "initial log-likelihood estimate is not finite");
    Chain ch;
    ch.states.reserve(iters);
    ch.log_post.reserve(iters);
    ParamVector cur = std::move(init);
    for (std::size_t it = 0; it < iters; ++it) {
        ParamVector prop = propose(cur, L, rng);
        const double lu = log_uniform(rng);
        const double prior = log_prior(prop);
        if (prior > kNegInf) {
            const double lp = prior + loglik(prop, est_rng);
            if (!std::isnan(lp) && lp > kNegInf && lu < lp - cur_lp) {
                cur = std::move(prop);
                cur_lp = lp;
                ++ch.accepted;
            }
        }
        ch.states.push_back(cur);
        ch.log_post.push_back(cur_lp);
    }
    return ch;
}

Chain pmcmc(const PriorSpec& prior, const TimeSeries& y, std::size_t iters, int P, std::uint64_t seed,
            const PmcmcOptions& opt) {
    prior.validate();
    require(prior.dim() == 3, "Ricker PMCMC expects (log r, phi, sigma)");
    auto log_prior = [&prior](std::span<const double> th) { return prior.log_density(th); };
    auto estimator = [&y, P, &opt](std::span<const double> th, Rng& r) {
        return bootstrap_pf_loglik({th[0], th[1], th[2]}, y, P, r, opt.N0);
    };
    Rng rng = make_stream(seed, StreamPurpose::Reference, 0);
    Rng est = make_stream(seed, StreamPurpose::Estimator, 0);
    const Chain pilot = pseudo_marginal_mh(log_prior, estimator, prior.mean(), isotropic_pilot_cov(prior, opt.pilot_scale),
                                           opt.pilot_iters, rng, est);
    const Eigen::MatrixXd cov = tune_mh(pilot);
    return pseudo_marginal_mh(log_prior, estimator, pilot.states.back(), cov, iters, rng, est);
}

Chain tuned_mh(const PriorSpec& prior, const LogDensity& loglik, std::size_t iters, std::uint64_t seed,
               const MhOptions& opt) {
    prior.validate();
    auto log_post = [&](std::span<const double> th) {
        const double lp = prior.log_density(th);
        return lp > kNegInf ? lp + loglik(th) : kNegInf;
    };
    Rng rng = make_stream(seed, StreamPurpose::Reference, 0);
    const Chain pilot = mh_random_walk(log_post, prior.mean(), isotropic_pilot_cov(prior, opt.pilot_scale),
                                       opt.pilot_iters, rng);
    return mh_random_walk(log_post, pilot.states.back(), tune_mh(pilot), iters, rng);
}

Chain thin(const Chain& chain, std::size_t keep) {
    const std::size_t L = chain.size();
    require(keep >= 1, "thinning must keep at least one state");
    require(keep <= L, "cannot keep " + std::to_string(keep) + " states from a chain of " + std::to_string(L));
    const std::size_t step = L / keep;
    Chain out;
    out.accepted = chain.accepted;
    for (std::size_t j = 0; j < keep; ++j) {
        const std::size_t idx = L - 1 - (keep - 1 - j) * step;
        out.states.push_back(chain.states[idx]);
        out.log_post.push_back(chain.log_post[idx]);
    }
    return out;
}

std::string chain_to_csv(const Chain& chain) {
    require(!chain.states.empty(), "cannot write an empty chain");
    std::string out = "iter";
    for (std::size_t i = 0; i < chain.states.front().size(); ++i) out += ",theta_" + std::to_string(i + 1);
    out += ",log_post\n";
    for (std::size_t k = 0; k < chain.size(); ++k) {
        out += std::to_string(k);
        for (double v : chain.states[k]) out += "," + format_g12(v);
        out += "," + format_g12(chain.log_post[k]) + "\n";
    }
    return out;
}

}  // namespace sigabc
