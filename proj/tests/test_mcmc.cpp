#include <doctest.h>

#include <cmath>
#include <limits>

#include "sigabc/abc.hpp"
#include "sigabc/error.hpp"
#include "sigabc/mcmc.hpp"
#include "sigabc/models.hpp"
#include "test_support.hpp"

using namespace sigabc;
using sigabc::testing::mean_se;

namespace {

double closed_form_poisson(const RickerParams& p, const TimeSeries& y, double N0) {
    double N = N0, ll = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        N = std::exp(p.log_r + std::log(N) - N);
        const double mu = p.phi * N, k = y.value(t, 0);
        ll += k * std::log(mu) - mu - std::lgamma(k + 1);
    }
    return ll;
}

Eigen::MatrixXd eye(Eigen::Index p, double s = 1.0) { return s * Eigen::MatrixXd::Identity(p, p); }

}  // namespace

TEST_CASE("MH on a standard normal") {
    Rng rng(1);
    const LogDensity target = [](std::span<const double> x) { return -0.5 * x[0] * x[0]; };
    const auto ch = mh_random_walk(target, {0.0}, eye(1, 2.4 * 2.4), 100000, rng);
    CHECK(ch.size() == 100000);
    double m = 0.0, v = 0.0;
    for (const auto& s : ch.states) m += s[0];
    m /= 1e5;
    for (const auto& s : ch.states) v += (s[0] - m) * (s[0] - m);
    v /= 1e5;
    CHECK(std::abs(m) < 0.05);
    CHECK(std::abs(v - 1.0) < 0.1);
    CHECK(ch.acceptance_rate() > 0.0);
    CHECK(ch.acceptance_rate() < 1.0);
    CHECK_THROWS_AS(mh_random_walk(target, {0.0}, eye(1, 0.0), 10, rng), ValidationError);
}

TEST_CASE("MH acceptance uses only the log-posterior difference") {
    // Count target evaluations: one at the start plus one per iteration.
    Rng rng(2);
    int calls = 0;
    const LogDensity flat = [&calls](std::span<const double>) {
        ++calls;
        return 0.0;
    };
    const auto ch = mh_random_walk(flat, {0.0, 0.0}, eye(2), 500, rng);
    CHECK(calls == 501);
    CHECK(ch.accepted == 500);  // zero difference always accepts
}

TEST_CASE("MH long-run frequencies on a discretised target") {
    // Piecewise-constant density on 5 unit bins with weights 1..5.
    Rng rng(3);
    const LogDensity target = [](std::span<const double> x) {
        if (x[0] < 0.0 || x[0] >= 5.0) return -std::numeric_limits<double>::infinity();
        return std::log(std::floor(x[0]) + 1.0);
    };
    const auto ch = mh_random_walk(target, {2.5}, eye(1, 1.5 * 1.5), 1000000, rng);
    std::vector<double> freq(5, 0.0);
    for (const auto& s : ch.states) freq[static_cast<std::size_t>(s[0])] += 1.0;
    double tv = 0.0;
    for (std::size_t k = 0; k < 5; ++k) tv += std::abs(freq[k] / 1e6 - (k + 1.0) / 15.0);
    CHECK(0.5 * tv < 0.02);
}

TEST_CASE("tune_mh") {
    Rng rng(4);
    std::normal_distribution<double> n01;
    Chain pilot;
    for (int i = 0; i < 20000; ++i) pilot.states.push_back({n01(rng), n01(rng)});
    pilot.log_post.assign(pilot.states.size(), 0.0);
    const auto cov = tune_mh(pilot);
    const double target = 2.38 * 2.38 / 2.0;
    CHECK(cov(0, 0) == doctest::Approx(target).epsilon(0.05));
    CHECK(cov(1, 1) == doctest::Approx(target).epsilon(0.05));
    CHECK(std::abs(cov(0, 1)) < 0.1);

    Chain scaled = pilot;
    for (auto& s : scaled.states)
        for (auto& v : s) v *= 3.0;
    const auto cs = tune_mh(scaled);
    CHECK(((cs - 9.0 * cov).cwiseAbs().maxCoeff()) < 1e-6);

    // A nearly constant column stays positive definite thanks to the jitter.
    Chain flat = pilot;
    for (auto& s : flat.states) s[1] = 1.0 + 1e-13 * s[1];
    const auto cf = tune_mh(flat);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(cf).info() == Eigen::Success);

    Chain constant = pilot;
    for (auto& s : constant.states) s[1] = 1.0;
    CHECK_THROWS_AS(tune_mh(constant), ValidationError);
    Chain tiny;
    tiny.states = {{1, 2}};
    CHECK_THROWS_AS(tune_mh(tiny), ValidationError);
}

TEST_CASE("particle filter at sigma 0 is exact") {
    Rng rng(5);
    for (const RickerParams& p : {RickerParams{4.0, 10.0, 0.0}, RickerParams{3.2, 5.0, 0.0}}) {
        const auto y = simulate_ricker(p, 50, 1.0, rng);
        const double exact = closed_form_poisson(p, y, 1.0);
        CHECK(std::abs(ricker_deterministic_loglik(p, y) - exact) <= 1e-8);
        for (int P : {10, 100}) {
            Rng pf(static_cast<std::uint64_t>(P));
            CHECK(std::abs(bootstrap_pf_loglik(p, y, P, pf) - exact) <= 1e-8);
        }
    }
}

TEST_CASE("particle filter edge cases and variance") {
    Rng rng(6);
    const auto y = simulate_ricker({4.0, 10.0, 0.3}, 50, 1.0, rng);
    CHECK(bootstrap_pf_loglik({4.0, 0.0, 0.3}, y, 50, rng) == -INFINITY);
    CHECK_THROWS_AS(bootstrap_pf_loglik({4.0, 10.0, 0.3}, y, 1, rng), ValidationError);

    std::vector<double> small, large;
    for (int r = 0; r < 60; ++r) {
        small.push_back(bootstrap_pf_loglik({4.0, 10.0, 0.3}, y, 50, rng));
        large.push_back(bootstrap_pf_loglik({4.0, 10.0, 0.3}, y, 500, rng));
    }
    const auto a = mean_se(small), b = mean_se(large);
    CHECK(b.se < a.se);
}

TEST_CASE("pseudo-marginal MH with an exact estimator equals exact MH") {
    Rng rng(7);
    const auto y = simulate_ricker({4.0, 10.0, 0.0}, 30, 1.0, rng);
    const PriorSpec prior{UniformBox{{3.0, 0.0}, {8.0, 20.0}}};
    const LogDensity log_prior = [&](std::span<const double> th) { return prior.log_density(th); };
    const LogLikEstimator pf = [&](std::span<const double> th, Rng& r) {
        return bootstrap_pf_loglik({th[0], th[1], 0.0}, y, 20, r);
    };
    const LogDensity exact = [&](std::span<const double> th) {
        const double lp = prior.log_density(th);
        return lp == -INFINITY ? lp : lp + ricker_deterministic_loglik({th[0], th[1], 0.0}, y);
    };
    const auto cov = eye(2, 0.01);
    Rng r1(11), r2(11), est(12);
    const auto pm = pseudo_marginal_mh(log_prior, pf, {4.5, 8.0}, cov, 3000, r1, est);
    const auto mh = mh_random_walk(exact, {4.5, 8.0}, cov, 3000, r2);
    REQUIRE(pm.size() == mh.size());
    std::size_t same = 0;
    for (std::size_t i = 0; i < pm.size(); ++i) same += pm.states[i] == mh.states[i];
    CHECK(same == pm.size());
    CHECK(pm.accepted == mh.accepted);

    // A rejected proposal never changes the stored estimate.
    for (std::size_t i = 1; i < pm.size(); ++i)
        if (pm.states[i] == pm.states[i - 1]) CHECK(pm.log_post[i] == pm.log_post[i - 1]);
}

TEST_CASE("PMCMC at desk scale") {
    Rng rng(8);
    const auto y = simulate_ricker({4.0, 10.0, 0.3}, 50, 1.0, rng);
    const PriorSpec prior{UniformBox{{3.0, 0.0, 0.0}, {8.0, 20.0, 0.6}}};
    const auto ch = pmcmc(prior, y, 20000, 200, 1);
    MESSAGE("PMCMC acceptance rate " << ch.acceptance_rate());
    CHECK(ch.acceptance_rate() >= 0.05);
    CHECK(ch.acceptance_rate() <= 0.5);
    PmcmcOptions quick;
    quick.pilot_iters = 300;
    const auto a = pmcmc(prior, y, 200, 20, 3, quick);
    const auto b = pmcmc(prior, y, 200, 20, 3, quick);
    CHECK(a.states == b.states);
    CHECK(a.log_post == b.log_post);
}

TEST_CASE("tuned MH recovers the MA(2) posterior region") {
    Rng rng(9);
    const auto y = simulate_ma2({0.6, 0.2}, 200, rng);
    const PriorSpec prior{MA2Triangle{}};
    const LogDensity ll = [&](std::span<const double> th) { return ma2_log_likelihood({th[0], th[1]}, y); };
    const auto ch = tuned_mh(prior, ll, 20000, 4, {2000, 0.1});
    const auto th = thin(ch, 1000);
    double m0 = 0, m1 = 0;
    for (const auto& s : th.states) {
        m0 += s[0];
        m1 += s[1];
    }
    CHECK(std::abs(m0 / 1000 - 0.6) < 0.2);
    CHECK(std::abs(m1 / 1000 - 0.2) < 0.2);
}

TEST_CASE("thin") {
    Chain c;
    for (int i = 0; i < 10; ++i) {
        c.states.push_back({static_cast<double>(i)});
        c.log_post.push_back(-i);
    }
    const auto two = thin(c, 2);
    CHECK(two.states == std::vector<ParamVector>{{4.0}, {9.0}});
    CHECK(thin(c, 10).states == c.states);
    CHECK(thin(c, 1).states == std::vector<ParamVector>{{9.0}});
    CHECK_THROWS_AS(thin(c, 11), ValidationError);
    CHECK_THROWS_AS(thin(c, 0), ValidationError);
    CHECK(chain_to_csv(two).rfind("iter,theta_1,log_post\n", 0) == 0);
}
