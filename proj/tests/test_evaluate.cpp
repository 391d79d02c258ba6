#include <doctest.h>

#include <cmath>

#include "sigabc/discrepancy.hpp"
#include "sigabc/error.hpp"
#include "sigabc/evaluate.hpp"
#include "test_support.hpp"

using namespace sigabc;
using sigabc::testing::mean_se;

namespace {

SampleSet gaussian(Rng& rng, Eigen::Index n, Eigen::Index p, double mu) {
    std::normal_distribution<double> d(mu, 1.0);
    SampleSet S(n, p);
    for (Eigen::Index i = 0; i < S.size(); ++i) S.data()[i] = d(rng);
    return S;
}

}  // namespace

TEST_CASE("mmd2_between_posteriors on three points by hand") {
    SampleSet A(3, 1);
    A << 0.0, 1.0, 3.0;
    const double bw = 1.0;
    auto k = [&](double a, double b) { return std::exp(-(a - b) * (a - b) / (2 * bw * bw)); };
    double off = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) off += k(A(i, 0), A(j, 0));
    double all = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) all += k(A(i, 0), A(j, 0));
    const double expected = 2.0 * off / 6.0 - 2.0 * all / 9.0;
    const double got = mmd2_between_posteriors(A, A, bw);
    CHECK(std::abs(got - expected) <= 1e-12);
    CHECK(got <= 1e-12);
}

TEST_CASE("posterior MMD separates and is unbiased") {
    Rng rng(1);
    std::vector<double> same;
    int separated = 0;
    for (int r = 0; r < 100; ++r) {
        const double s = mmd2_between_posteriors(gaussian(rng, 500, 1, 0.0), gaussian(rng, 500, 1, 0.0));
        same.push_back(s);
        const double d = mmd2_between_posteriors(gaussian(rng, 500, 1, 0.0), gaussian(rng, 500, 1, 5.0));
        separated += d > 0.0 && d > s;
    }
    const auto m = mean_se(same);
    CHECK(std::abs(m.mean) <= 3 * m.se);
    CHECK(separated == 100);
}

TEST_CASE("posterior MMD agrees with the discrepancy estimator") {
    Rng rng(2);
    const SampleSet A = gaussian(rng, 30, 2, 0.0), B = gaussian(rng, 25, 2, 0.5);
    std::vector<double> a(A.size()), b(B.size());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < 2; ++j) a[static_cast<std::size_t>(2 * i + j)] = A(i, j);
    for (Eigen::Index i = 0; i < B.rows(); ++i)
        for (Eigen::Index j = 0; j < 2; ++j) b[static_cast<std::size_t>(2 * i + j)] = B(i, j);
    CHECK(mmd2_between_posteriors(A, B, 0.8) == mmd2_unbiased(a, b, 2, StaticKernelSpec::rbf(0.8)));
    CHECK(pooled_median_bandwidth(A, B) == pooled_median_bandwidth(B, A));
    CHECK(mmd2_between_posteriors(A, B) == mmd2_between_posteriors(A, B, pooled_median_bandwidth(A, B)));
}

TEST_CASE("sq_dist_means") {
    Rng rng(3);
    const SampleSet A = gaussian(rng, 10, 2, 0.0);
    CHECK(sq_dist_means(A, A) == 0.0);
    SampleSet z = SampleSet::Zero(4, 2), o = SampleSet::Ones(3, 2);
    CHECK(sq_dist_means(z, o) == 2.0);
    SampleSet rev = A.colwise().reverse();
    CHECK(std::abs(sq_dist_means(rev, o) - sq_dist_means(A, o)) < 1e-12);
    CHECK_THROWS_AS(sq_dist_means(A, SampleSet::Zero(3, 3)), ValidationError);
}

TEST_CASE("degenerate inputs") {
    const SampleSet c = SampleSet::Ones(5, 2);
    CHECK_THROWS_AS(mmd2_between_posteriors(c, c), NumericalError);
    SampleSet one(1, 2);
    one << 1, 2;
    CHECK_THROWS_AS(mmd2_between_posteriors(one, c, 1.0), ValidationError);
}

TEST_CASE("sample CSV") {
    Rng rng(4);
    const SampleSet A = gaussian(rng, 6, 3, 0.0);
    const auto text = samples_to_csv(A);
    CHECK(text.rfind("theta_1,theta_2,theta_3\n", 0) == 0);
    const SampleSet B = samples_from_csv(text);
    CHECK(B.rows() == 6);
    CHECK((A - B).cwiseAbs().maxCoeff() < 1e-10);
    const SampleSet P = samples_from_csv("theta_1,theta_2,loss,seed\n1,2,0.5,9\n3,4,0.7,10\n");
    CHECK(P.cols() == 2);
    CHECK(P(1, 0) == 3.0);
    CHECK_THROWS_AS(samples_from_csv("loss\n1\n"), ValidationError);
}
