/**
 * End-to-end acceptance checks.  Each criterion prints one PASS or FAIL line
 * with the measured quantity; the process exits non-zero if any criterion fails.
 *
 * Oracles here are written from first principles and deliberately share no
 * code with the library beyond the function under test.
 */
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "sigabc/abc.hpp"
#include "sigabc/discrepancy.hpp"
#include "sigabc/evaluate.hpp"
#include "sigabc/experiment.hpp"
#include "sigabc/mcmc.hpp"
#include "sigabc/models.hpp"
#include "sigabc/parallel.hpp"
#include "sigabc/sigkernel.hpp"
#include "sigabc/summaries.hpp"
#include "sigabc/truncated_signature.hpp"

using namespace sigabc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

TimeSeries random_stream(Rng& rng, std::size_t n, std::size_t d, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n * d);
    for (auto& x : v) x = u(rng);
    return TimeSeries::on_index_grid(std::move(v), d);
}

struct MeanSE {
    double mean;
    double se;
};

MeanSE mean_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return {m, std::sqrt(v / (n - 1.0) / n)};
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << title << "  [" << detail << "]"
              << std::endl;
}

/// Runs one criterion, turning an escaped exception into a FAIL line.
void criterion(int id, const std::string& title, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(id, ok, title, detail);
    } catch (const std::exception& e) {
        report(id, false, title, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// --- 1 ----------------------------------------------------------------------

std::pair<bool, std::string> sig_kernel_oracle() {
    const auto t0 = Clock::now();
    Rng rng(20240501);
    std::uniform_int_distribution<int> len(2, 10), dim(1, 3);
    const SigKernelConfig cfg{StaticKernelSpec::linear(), 2};
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto d = static_cast<std::size_t>(dim(rng));
        const auto x = random_stream(rng, static_cast<std::size_t>(len(rng)), d);
        const auto y = random_stream(rng, static_cast<std::size_t>(len(rng)), d);
        const double oracle = truncated_sig_inner(x, y, 10);
        worst = std::max(worst, std::abs(sig_kernel(x, y, cfg) - oracle) / std::abs(oracle));
    }
    // Unit straight line: the kernel is sum_m 1/(m!)^2.
    double series = 0.0, term = 1.0;
    for (int m = 0; m < 40; ++m) {
        series += term;
        term /= (m + 1.0) * (m + 1.0);
    }
    const auto line = TimeSeries::on_index_grid({0, 0, 1, 0}, 2);
    const double k_line = sig_kernel(line, line, {StaticKernelSpec::linear(), 5});
    const double line_err = std::abs(k_line - series);
    const double secs = seconds_since(t0);
    const bool ok = worst <= 1e-3 && line_err <= 1e-4 && std::abs(series - 2.2795853) < 1e-7 && secs < 30.0;
    return {ok, "worst rel err " + fmt("%.3g", worst) + ", line err " + fmt("%.3g", line_err) + ", " +
                    fmt("%.2f", secs) + " s"};
}

// --- 2 ----------------------------------------------------------------------

std::pair<bool, std::string> distance_axioms() {
    Rng rng(2);
    std::vector<TimeSeries> xs;
    for (int i = 0; i < 8; ++i) xs.push_back(random_stream(rng, 5 + static_cast<std::size_t>(i % 4), 2));
    const SigKernelConfig cfg{StaticKernelSpec::rbf(0.5), 1};
    double self = 0.0;
    bool symmetric = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        self = std::max(self, sig_distance(xs[i], xs[i], cfg));
        for (std::size_t j = 0; j < xs.size(); ++j) symmetric &= sig_distance(xs[i], xs[j], cfg) == sig_distance(xs[j], xs[i], cfg);
    }
    double min_eig = INFINITY;
    for (const auto& c : {cfg, SigKernelConfig{StaticKernelSpec::linear(), 2}}) {
        const Eigen::MatrixXd G = gram_matrix(xs, c);
        symmetric &= G == G.transpose();
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().minCoeff());
    }
    const bool ok = self <= 1e-8 && symmetric && min_eig >= -1e-6;
    return {ok, "max d(x,x) " + fmt("%.3g", self) + ", symmetric " + (symmetric ? "yes" : "no") + ", min eig " +
                    fmt("%.3g", min_eig)};
}

// --- 3 ----------------------------------------------------------------------

double brute_force_permutation(const TimeSeries& y, const TimeSeries& x, double lambda) {
    std::vector<std::size_t> perm(y.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            double sq = 0.0;
            for (std::size_t k = 0; k < y.dim(); ++k) sq += std::pow(y.value(i, k) - x.value(perm[i], k), 2);
            c += std::sqrt(sq) + lambda * std::abs(y.time(i) - x.time(perm[i]));
        }
        best = std::min(best, c / static_cast<double>(perm.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::pair<bool, std::string> ot_correctness() {
    Rng rng(3);
    std::uniform_int_distribution<int> len(1, 30);
    double sorted_err = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto n = static_cast<std::size_t>(len(rng));
        const auto y = random_stream(rng, n, 1, -3, 3), x = random_stream(rng, n, 1, -3, 3);
        std::vector<double> a = y.values(), b = x.values();
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
        sorted_err = std::max(sorted_err, std::abs(wasserstein_cm(y, x, 0.0) - s / static_cast<double>(n)));
    }
    // With uniform weights and n = m an optimal plan is a permutation (Birkhoff).
    double brute_err = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto y = random_stream(rng, 3, 2), x = random_stream(rng, 3, 2);
        for (double lambda : {0.0, 0.5, 3.0})
            brute_err = std::max(brute_err, std::abs(wasserstein_cm(y, x, lambda) - brute_force_permutation(y, x, lambda)));
    }
    const bool ok = sorted_err <= 1e-10 && brute_err <= 1e-10;
    return {ok, "sorted coupling err " + fmt("%.3g", sorted_err) + ", brute force err " + fmt("%.3g", brute_err)};
}

// --- 4 ----------------------------------------------------------------------

double naive_mmd2(const TimeSeries& x, const TimeSeries& y, double bw) {
    auto k = [bw](const TimeSeries& a, std::size_t i, const TimeSeries& b, std::size_t j) {
        double sq = 0.0;
        for (std::size_t c = 0; c < a.dim(); ++c) sq += std::pow(a.value(i, c) - b.value(j, c), 2);
        return std::exp(-sq / (2.0 * bw * bw));
    };
    const std::size_t m = x.size(), n = y.size();
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j) sxx += k(x, i, x, j);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) syy += k(y, i, y, j);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) sxy += k(x, i, y, j);
    const double md = static_cast<double>(m), nd = static_cast<double>(n);
    return sxx / (md * (md - 1)) + syy / (nd * (nd - 1)) - 2.0 * sxy / (md * nd);
}

std::pair<bool, std::string> mmd_estimator() {
    Rng rng(4);
    std::uniform_int_distribution<int> len(2, 20), dim(1, 3);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto d = static_cast<std::size_t>(dim(rng));
        const auto x = random_stream(rng, static_cast<std::size_t>(len(rng)), d);
        const auto y = random_stream(rng, static_cast<std::size_t>(len(rng)), d);
        const double a = mmd2_unbiased(x, y, StaticKernelSpec::rbf(0.4)), b = naive_mmd2(x, y, 0.4);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
    }
    std::vector<double> reps;
    for (int r = 0; r < 200; ++r)
        reps.push_back(mmd2_unbiased(random_stream(rng, 15, 1), random_stream(rng, 12, 1), StaticKernelSpec::rbf(0.5)));
    const auto ms = mean_se(reps);
    // "Exact" up to summation order: allow a few ulps.
    const bool ok = worst <= 1e-12 && std::abs(ms.mean) <= 3.0 * ms.se;
    return {ok, "oracle err " + fmt("%.3g", worst) + ", null mean " + fmt("%.3g", ms.mean) + " (3 se " +
                    fmt("%.3g", 3.0 * ms.se) + ")"};
}

// --- 5 ----------------------------------------------------------------------

/// Gaussian log-density of x_1..x_T with covariance B B^T, where x = B e.
double dense_ma2_loglik(const MA2Params& p, const TimeSeries& y) {
    const Eigen::Index T = static_cast<Eigen::Index>(y.size()) - 1;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(T, T + 1);
    for (Eigen::Index t = 1; t <= T; ++t) {
        B(t - 1, t) = 1.0;
        B(t - 1, t - 1) = p.theta1;
        if (t >= 2) B(t - 1, t - 2) = p.theta2;
    }
    const Eigen::MatrixXd S = B * B.transpose();
    Eigen::VectorXd x(T);
    for (Eigen::Index t = 1; t <= T; ++t) x[t - 1] = y.value(static_cast<std::size_t>(t), 0);
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    const Eigen::VectorXd z = llt.matrixL().solve(x);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * z.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(T) * std::log(2.0 * std::numbers::pi);
}

std::pair<bool, std::string> ma2_oracle() {
    Rng rng(5);
    std::uniform_real_distribution<double> u1(-2, 2), u2(-1, 1);
    double worst = 0.0;
    for (int checked = 0; checked < 20;) {
        const MA2Params p{u1(rng), u2(rng)};
        if (!(p.theta1 + p.theta2 > -1 && p.theta1 - p.theta2 < 1 && p.theta2 < 1)) continue;
        const auto y = simulate_ma2(p, 10, rng);
        worst = std::max(worst, std::abs(ma2_log_likelihood(p, y) - dense_ma2_loglik(p, y)));
        ++checked;
    }
    return {worst <= 1e-8, "worst abs err " + fmt("%.3g", worst)};
}

// --- 6 ----------------------------------------------------------------------

std::pair<bool, std::string> krr_interpolation() {
    Rng rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    TrainingSet t;
    for (int i = 0; i < 20; ++i) {
        t.streams.push_back(random_stream(rng, 8, 1));
        t.thetas.push_back({u(rng), u(rng)});
    }
    const auto m = fit_krr_summary(t, TransformPipeline::parse({"time", "normalize"}),
                                   {StaticKernelSpec::rbf(0.5), 0}, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto s = predict_summary(m, t.streams[i]);
        for (std::size_t j = 0; j < 2; ++j) worst = std::max(worst, std::abs(s[j] - t.thetas[i][j]));
    }
    return {worst <= 1e-6, "worst target err " + fmt("%.3g", worst) + ", jitter " + fmt("%.3g", m.jitter)};
}

// --- 7 ----------------------------------------------------------------------

std::pair<bool, std::string> gse_machinery() {
    Rng rng(7);
    const auto tr = simulate_gse({1e-2, 1e-1}, 100, 50.0, rng);
    const GSEHyper h;
    const auto [b, g] = gse_posterior_params(tr, h);
    double sb = 0.0, sg = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto [bb, gg] = gse_exact_posterior_sample(tr, h, rng);
        sb += bb;
        sg += gg;
    }
    const double rb = std::abs(sb / draws / (b.shape / b.rate) - 1.0), rg = std::abs(sg / draws / (g.shape / g.rate) - 1.0);

    // First event from (X, Y) = (99, 1): exponential with rate beta X Y + gamma Y.
    std::vector<double> first;
    for (int r = 0; r < 100000; ++r) first.push_back(simulate_gse({1e-2, 1e-1}, 100, 1e9, rng).events.front().t);
    const auto fm = mean_se(first);
    const double expected = 1.0 / (1e-2 * 99 * 1 + 1e-1 * 1);
    const double z = std::abs(fm.mean - expected) / fm.se;

    bool conserved = true;
    for (int r = 0; r < 1000; ++r) {
        int recovered = 0;
        for (const auto& e : simulate_gse({1e-2, 1e-1}, 100, 50.0, rng).events) {
            recovered += e.kind == GSEEventKind::Recovery;
            conserved &= e.X + e.Y + recovered == 100;
        }
    }
    const bool ok = rb <= 0.01 && rg <= 0.01 && z <= 3.0 && conserved;
    return {ok, "rel mean err beta " + fmt("%.3g", rb) + " gamma " + fmt("%.3g", rg) + ", first event z " +
                    fmt("%.2f", z) + ", conservation " + (conserved ? "yes" : "no")};
}

// --- 8 ----------------------------------------------------------------------

std::pair<bool, std::string> pf_oracle() {
    Rng rng(8);
    double worst = 0.0;
    for (const RickerParams& p : {RickerParams{4.0, 10.0, 0.0}, RickerParams{3.5, 6.0, 0.0}, RickerParams{5.0, 15.0, 0.0}}) {
        const auto y = simulate_ricker(p, 50, 1.0, rng);
        // The latent recursion floors N at 1e-12 before the log; the (5, 15) point reaches it.
        double N = 1.0, exact = 0.0;
        for (std::size_t t = 0; t < y.size(); ++t) {
            N = std::max(N, 1e-12);
            N = std::exp(p.log_r + std::log(N) - N);
            const double mu = p.phi * N, k = y.value(t, 0);
            exact += k * std::log(mu) - mu - std::lgamma(k + 1);
        }
        for (int P : {10, 100}) {
            Rng pf(static_cast<std::uint64_t>(P) + 17);
            worst = std::max(worst, std::abs(bootstrap_pf_loglik(p, y, P, pf) - exact));
        }
    }
    return {worst <= 1e-8, "worst abs err " + fmt("%.3g", worst)};
}

// --- 9 ----------------------------------------------------------------------

/// Posterior MMD^2 per method per seed against one reference for one observation.
std::vector<std::vector<double>> sweep_mmd(ExperimentConfig cfg, const std::vector<std::string>& methods) {
    cfg.validate();
    const TimeSeries obs = simulate_observation(cfg, cfg.theta, cfg.observation_seed);
    const SampleSet ref = run_reference(cfg, obs, cfg.observation_seed);
    std::vector<std::vector<double>> out;
    for (const auto& name : methods) {
        const Method method = resolve_method(cfg, name);
        std::vector<double> row;
        for (std::uint64_t seed : cfg.seeds) {
            const auto t0 = Clock::now();
            const auto res = run_infer(cfg, method, obs, seed);
            row.push_back(mmd2_between_posteriors(to_sample_set(res.particles), ref));
            std::cout << "  " << to_string(cfg.model) << " " << name << " seed " << seed << ": mmd2 "
                      << fmt("%.5g", row.back()) << " (" << fmt("%.1f", seconds_since(t0)) << " s)" << std::endl;
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::pair<bool, std::string> desk_replication() {
    const auto t0 = Clock::now();
    ExperimentConfig ma2 = ExperimentConfig::defaults(ModelKind::MA2);
    ma2.N = 10000;
    ma2.M = 100;
    ma2.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto m = sweep_mmd(ma2, {"sig-leadlag", "mmd", "wass"});
    const double sig_med = median_of(m[0]), mmd_med = median_of(m[1]), wass_med = median_of(m[2]);
    int seed_wins = 0;
    for (std::size_t s = 0; s < m[0].size(); ++s) seed_wins += m[0][s] <= m[1][s] && m[0][s] <= m[2][s];
    const bool ma2_ok = sig_med <= mmd_med && sig_med <= wass_med && seed_wins >= 6;

    ExperimentConfig gse = ExperimentConfig::defaults(ModelKind::GSE);
    gse.N = 50000;
    gse.M = 100;
    gse.seeds = {1, 2, 3, 4, 5};
    const auto g = sweep_mmd(gse, {"sig", "wass"});
    const double gsig = median_of(g[0]), gwass = median_of(g[1]);
    const bool gse_ok = gsig <= gwass;

    std::ostringstream d;
    d << "ma2 medians sig-leadlag " << fmt("%.4g", sig_med) << " mmd " << fmt("%.4g", mmd_med) << " wass "
      << fmt("%.4g", wass_med) << ", sig best in " << seed_wins << "/10 seeds; gse medians sig " << fmt("%.4g", gsig)
      << " wass " << fmt("%.4g", gwass) << "; " << fmt("%.0f", seconds_since(t0)) << " s";
    return {ma2_ok && gse_ok, d.str()};
}

// --- 10 ---------------------------------------------------------------------

std::pair<bool, std::string> determinism() {
    ExperimentConfig cfg = ExperimentConfig::defaults(ModelKind::MA2);
    cfg.N = 1000;
    cfg.M = 50;
    cfg.R = 60;
    cfg.pilot_runs = 30;
    cfg.lambda_samples = 100;
    cfg.cv.alpha_grid = {1e-3, 1e-1};
    cfg.cv.bandwidth_scales = {0.5, 1.0};
    cfg.validate();
    const TimeSeries obs = simulate_observation(cfg, cfg.theta, cfg.observation_seed);
    const int before = thread_count();
    bool same = true;
    std::size_t checked = 0;
    for (const auto& name : {"sig-leadlag", "skrr", "mmd", "wass", "sa"}) {
        const Method method = resolve_method(cfg, name);
        std::string first;
        for (int threads : {1, 4, 8}) {
            set_thread_count(threads);
            const std::string csv = particles_to_csv(run_infer(cfg, method, obs, 5).particles);
            if (threads == 1)
                first = csv;
            else
                same &= csv == first;
        }
        ++checked;
    }
    set_thread_count(before);
    return {same, std::to_string(checked) + " methods at 1, 4 and 8 threads, identical " + (same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    // Optional arguments select criteria by number; default is all ten.
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

    if (wanted(1)) criterion(1, "signature-kernel oracle equivalence", sig_kernel_oracle);
    if (wanted(2)) criterion(2, "distance axioms", distance_axioms);
    if (wanted(3)) criterion(3, "optimal transport correctness", ot_correctness);
    if (wanted(4)) criterion(4, "MMD estimator", mmd_estimator);
    if (wanted(5)) criterion(5, "MA(2) likelihood oracle", ma2_oracle);
    if (wanted(6)) criterion(6, "KRR interpolation", krr_interpolation);
    if (wanted(7)) criterion(7, "GSE exact machinery", gse_machinery);
    if (wanted(8)) criterion(8, "particle filter oracle", pf_oracle);
    if (wanted(10)) criterion(10, "determinism across thread counts", determinism);
    if (wanted(9)) criterion(9, "desk-scale method ordering", desk_replication);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
