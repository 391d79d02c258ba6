#include <doctest.h>

#include <chrono>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "sigabc/error.hpp"
#include "sigabc/sigkernel.hpp"
#include "sigabc/truncated_signature.hpp"
#include "test_support.hpp"

using namespace sigabc;
using sigabc::testing::random_stream;

namespace {

double bessel_series(double a) {
    // sum_m a^m / (m!)^2
    double s = 0.0, term = 1.0;
    for (int m = 0; m < 40; ++m) {
        s += term;
        term *= a / ((m + 1.0) * (m + 1.0));
    }
    return s;
}

const TimeSeries kUnitX = TimeSeries::on_index_grid({0, 0, 1, 0}, 2);

SigKernelConfig linear(int order) { return {StaticKernelSpec::linear(), order}; }

}  // namespace

TEST_CASE("static kernels") {
    const std::vector<double> a{1, 2}, b{3, 4};
    CHECK(static_kernel_eval(StaticKernelSpec::linear(), a, b) == 11.0);
    CHECK(static_kernel_eval(StaticKernelSpec::rbf(0.7), a, a) == 1.0);
    const std::vector<double> z{0}, t{2};
    CHECK(static_kernel_eval(StaticKernelSpec::rbf(1.0), z, t) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(StaticKernelSpec::rbf(0.0), ValidationError);
    SigKernelConfig bad = linear(7);
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("truncated signature levels") {
    const auto seg = TimeSeries::on_index_grid({0, 0, 2, 3}, 2);
    const auto s = truncated_signature(seg, 2);
    REQUIRE(s.levels.size() == 3);
    CHECK(s.levels[0] == std::vector<double>{1.0});
    CHECK(s.levels[1] == std::vector<double>{2, 3});
    CHECK(s.levels[2][0] == doctest::Approx(2.0));
    CHECK(s.levels[2][1] == doctest::Approx(3.0));
    CHECK(s.levels[2][2] == doctest::Approx(3.0));
    CHECK(s.levels[2][3] == doctest::Approx(4.5));

    // Univariate paths only see the total increment.
    const auto u = truncated_signature(TimeSeries::on_index_grid({1, 4, 2, 3.5}, 1), 5);
    double fact = 1.0;
    for (int m = 1; m <= 5; ++m) {
        fact *= m;
        CHECK(u.levels[static_cast<std::size_t>(m)][0] == doctest::Approx(std::pow(2.5, m) / fact));
    }

    // Chen at depth one.
    const auto two = truncated_signature(TimeSeries::on_index_grid({0, 0, 1, 2, 4, 3}, 2), 1);
    CHECK(two.levels[1][0] == doctest::Approx(4.0));
    CHECK(two.levels[1][1] == doctest::Approx(3.0));
}

TEST_CASE("truncated inner product partial sums") {
    Rng rng(1);
    const auto x = random_stream(rng, 4, 2), y = random_stream(rng, 5, 2);
    CHECK(truncated_sig_inner(x, y, 0) == 1.0);
    CHECK(truncated_sig_inner(kUnitX, kUnitX, 3) == doctest::Approx(1 + 1 + 0.25 + 1.0 / 36.0).epsilon(1e-12));
}

TEST_CASE("sig_kernel simple paths") {
    const auto c = TimeSeries::on_index_grid({0.3, 0.3, 0.3}, 1);
    CHECK(sig_kernel(c, c, linear(0)) == 1.0);
    CHECK(std::abs(sig_kernel(kUnitX, kUnitX, linear(5)) - bessel_series(1.0)) < 1e-4);
    CHECK(bessel_series(1.0) == doctest::Approx(2.2795853).epsilon(1e-7));
}

TEST_CASE("sig_kernel agrees with truncated signatures") {
    Rng rng(20240501);
    std::uniform_int_distribution<int> len(2, 10), dim(1, 3);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t d = static_cast<std::size_t>(dim(rng));
        const auto x = random_stream(rng, static_cast<std::size_t>(len(rng)), d);
        const auto y = random_stream(rng, static_cast<std::size_t>(len(rng)), d);
        const double pde = sig_kernel(x, y, linear(2));
        const double oracle = truncated_sig_inner(x, y, 10);
        worst = std::max(worst, std::abs(pde - oracle) / std::abs(oracle));
    }
    MESSAGE("worst relative error at dyadic order 2: " << worst);
    CHECK(worst < 1e-3);
}

TEST_CASE("truncated inner product converges to the PDE kernel") {
    Rng rng(7);
    const auto x = random_stream(rng, 5, 2), y = random_stream(rng, 6, 2);
    const double k = sig_kernel(x, y, linear(5));
    double prev = INFINITY;
    for (std::size_t D : {2, 4, 6, 8, 10}) {
        const double err = std::abs(truncated_sig_inner(x, y, D) - k);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
}

TEST_CASE("dyadic refinement converges") {
    Rng rng(8);
    const auto x = random_stream(rng, 6, 2), y = random_stream(rng, 7, 2);
    double prev = INFINITY;
    for (int lam = 0; lam < 4; ++lam) {
        const double diff = std::abs(sig_kernel(x, y, linear(lam)) - sig_kernel(x, y, linear(lam + 1)));
        CHECK(diff < prev);
        prev = diff;
    }
}

TEST_CASE("sig_kernel symmetry and translation invariance") {
    Rng rng(9);
    const auto x = random_stream(rng, 6, 2), y = random_stream(rng, 9, 2);
    for (auto cfg : {linear(0), linear(2), SigKernelConfig{StaticKernelSpec::rbf(0.5), 1}})
        CHECK(sig_kernel(x, y, cfg) == sig_kernel(y, x, cfg));

    auto shift = [](const TimeSeries& ts, double c) {
        std::vector<double> v = ts.values();
        for (auto& e : v) e += c;
        return TimeSeries(ts.times(), v, ts.dim());
    };
    const double k0 = sig_kernel(x, y, linear(1));
    CHECK(std::abs(sig_kernel(shift(x, 3.0), shift(y, 3.0), linear(1)) - k0) < 1e-6);
    const double kb = sig_kernel(basepoint_augment(x), basepoint_augment(y), linear(1));
    const double kbs = sig_kernel(basepoint_augment(shift(x, 3.0)), basepoint_augment(shift(y, 3.0)), linear(1));
    CHECK(std::abs(kb - kbs) > 1e-3);
}

TEST_CASE("sig_distance axioms") {
    Rng rng(10);
    const auto x = random_stream(rng, 8, 2), y = random_stream(rng, 5, 2);
    const SigKernelConfig cfg{StaticKernelSpec::rbf(0.5), 0};
    CHECK(sig_distance(x, x, cfg) <= 1e-8);
    CHECK(sig_distance(x, y, cfg) == sig_distance(y, x, cfg));
    CHECK(sig_distance(x, y, cfg) > 0.0);
    // Straight lines with identical increments are equal paths.
    const auto y2 = TimeSeries::on_index_grid({5, 1, 6, 1}, 2);
    CHECK(sig_distance(kUnitX, y2, linear(3)) <= 1e-8);
    CHECK(sig_distance_from_parts(1.0, 1.0, 1.0 + 5e-9) == 0.0);
    CHECK_THROWS_AS(sig_distance_from_parts(1.0, 1.0, 1.1), NumericalError);
}

TEST_CASE("sig_kernel overflow is reported") {
    std::vector<double> v;
    for (int i = 0; i < 30; ++i) v.push_back(i * 1e3);
    const auto big = TimeSeries::on_index_grid(v, 1);
    CHECK_THROWS_AS(sig_kernel(big, big, linear(0)), NumericalError);
}

TEST_CASE("Gram matrices: parallel equals serial, symmetric, PSD") {
    Rng rng(11);
    std::vector<TimeSeries> xs;
    for (int i = 0; i < 8; ++i) xs.push_back(random_stream(rng, 4 + static_cast<std::size_t>(i % 3), 2));
    for (auto cfg : {linear(1), SigKernelConfig{StaticKernelSpec::rbf(0.4), 0}}) {
        const auto G = gram_matrix(xs, cfg);
        CHECK(G == gram_matrix_serial(xs, cfg));
        CHECK(G == G.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        CHECK(es.eigenvalues().minCoeff() >= -1e-6);
    }
    std::vector<TimeSeries> ys(xs.begin(), xs.begin() + 3);
    const auto K = cross_gram(xs, ys, linear(0));
    CHECK(K == cross_gram_serial(xs, ys, linear(0)));
    CHECK(K.rows() == 8);
    CHECK(K.cols() == 3);
    CHECK(K(4, 1) == sig_kernel(xs[4], ys[1], linear(0)));
}

TEST_CASE("runtime is bilinear in the stream lengths") {
    Rng rng(12);
    const auto x = random_stream(rng, 200, 2), y = random_stream(rng, 200, 2), y2 = random_stream(rng, 400, 2);
    auto timed = [&](const TimeSeries& b) {
        volatile double sink = sig_kernel(x, b, linear(0));  // warm-up
        const auto t0 = std::chrono::steady_clock::now();
        for (int rep = 0; rep < 40; ++rep) sink = sig_kernel(x, b, linear(0));
        (void)sink;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const double t_short = timed(y);
    const double t_long = timed(y2);
    const double ratio = t_long / t_short;
    MESSAGE("time ratio when doubling one length: " << ratio);
    CHECK(ratio <= 2.5);
}
