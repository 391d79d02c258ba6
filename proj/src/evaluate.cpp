#include "sigabc/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sigabc/discrepancy.hpp"
#include "sigabc/error.hpp"
#include "sigabc/util.hpp"

namespace sigabc {

using detail::require;

namespace {

std::vector<double> row_major(const SampleSet& S) {
    std::vector<double> v(static_cast<std::size_t>(S.size()));
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        for (Eigen::Index j = 0; j < S.cols(); ++j) v[static_cast<std::size_t>(i * S.cols() + j)] = S(i, j);
    return v;
}

void require_compatible(const SampleSet& A, const SampleSet& B) {
    require(A.rows() >= 1 && B.rows() >= 1, "sample sets must be non-empty");
    require(A.cols() == B.cols(), "sample sets differ in parameter dimension (" + std::to_string(A.cols()) +
                                      " vs " + std::to_string(B.cols()) + ")");
    require(A.allFinite() && B.allFinite(), "sample sets contain non-finite values");
}

}  // namespace

SampleSet to_sample_set(const ParticleSet& ps) {
    require(!ps.particles.empty(), "empty particle set");
    const std::size_t p = ps.particles.front().theta.size();
    SampleSet S(static_cast<Eigen::Index>(ps.particles.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < ps.particles.size(); ++i)
        for (std::size_t j = 0; j < p; ++j) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ps.particles[i].theta[j];
    return S;
}

SampleSet to_sample_set(const Chain& chain) {
    require(!chain.states.empty(), "empty chain");
    const std::size_t p = chain.states.front().size();
    SampleSet S(static_cast<Eigen::Index>(chain.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < chain.size(); ++i)
        for (std::size_t j = 0; j < p; ++j) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = chain.states[i][j];
    return S;
}

double pooled_median_bandwidth(const SampleSet& A, const SampleSet& B) {
    require_compatible(A, B);
    SampleSet P(A.rows() + B.rows(), A.cols());
    P << A, B;
    const Eigen::Index n = P.rows();
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((P.row(i) - P.row(j)).norm());
    return median(std::move(d));
}

double mmd2_between_posteriors(const SampleSet& A, const SampleSet& B, double bandwidth) {
    require_compatible(A, B);
    require(A.rows() >= 2 && B.rows() >= 2, "posterior MMD needs at least two samples in each set");
    return mmd2_unbiased(row_major(A), row_major(B), static_cast<std::size_t>(A.cols()), StaticKernelSpec::rbf(bandwidth));
}

double mmd2_between_posteriors(const SampleSet& A, const SampleSet& B) {
    const double bw = pooled_median_bandwidth(A, B);
    if (!(bw > 0.0)) throw NumericalError("pooled posterior samples are all identical; the median bandwidth is zero");
    return mmd2_between_posteriors(A, B, bw);
}

double sq_dist_means(const SampleSet& A, const SampleSet& B) {
    require_compatible(A, B);
    return (A.colwise().mean() - B.colwise().mean()).squaredNorm();
}

std::string samples_to_csv(const SampleSet& S) {
    require(S.rows() >= 1 && S.cols() >= 1, "cannot write an empty sample set");
    std::string out;
    for (Eigen::Index j = 0; j < S.cols(); ++j) out += (j ? ",theta_" : "theta_") + std::to_string(j + 1);
    out += "\n";
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
        for (Eigen::Index j = 0; j < S.cols(); ++j) out += (j ? "," : "") + format_g12(S(i, j));
        out += "\n";
    }
    return out;
}

SampleSet samples_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "sample CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line.rfind("theta_1", 0) == 0, "sample CSV header must start with theta_1");
    // Count leading theta_ columns; anything after them (loss, seed, log_post) is ignored.
    std::vector<std::string> head;
    {
        std::size_t s = 0;
        while (true) {
            const std::size_t c = line.find(',', s);
            head.push_back(line.substr(s, c == std::string::npos ? std::string::npos : c - s));
            if (c == std::string::npos) break;
            s = c + 1;
        }
    }
    std::size_t p = 0;
    while (p < head.size() && head[p].rfind("theta_", 0) == 0) ++p;
    std::vector<double> v;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t s = 0, field = 0;
        while (field < p) {
            const std::size_t c = line.find(',', s);
            v.push_back(parse_double(std::string_view(line).substr(s, c == std::string::npos ? std::string::npos : c - s)));
            ++field;
            if (c == std::string::npos) break;
            s = c + 1;
        }
        require(field == p, "sample CSV row " + std::to_string(rows + 2) + " is short");
        ++rows;
    }
    require(rows >= 1, "sample CSV has no rows");
    SampleSet S(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < p; ++j) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i * p + j];
    return S;
}

}  // namespace sigabc
