#include "sigabc/sigkernel.hpp"

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "sigabc/error.hpp"
#include "sigabc/parallel.hpp"

namespace sigabc {

using detail::require;

StaticKernelSpec StaticKernelSpec::rbf(double sigma) {
    StaticKernelSpec s{StaticKernelKind::GaussianRBF, sigma};
    s.validate();
    return s;
}

void StaticKernelSpec::validate() const {
    if (kind == StaticKernelKind::GaussianRBF)
        require(std::isfinite(bandwidth) && bandwidth > 0.0, "RBF bandwidth must be positive");
}

void SigKernelConfig::validate() const {
    static_kernel.validate();
    require(dyadic_order >= 0, "dyadic order must be non-negative");
    require(dyadic_order <= max_dyadic_order,
            "dyadic order " + std::to_string(dyadic_order) + " exceeds the cap of " +
                std::to_string(max_dyadic_order));
}

double static_kernel_eval(const StaticKernelSpec& spec, std::span<const double> a,
                          std::span<const double> b) {
    require(a.size() == b.size(), "static kernel arguments differ in dimension");
    if (spec.kind == StaticKernelKind::Linear) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::exp(-s / (2.0 * spec.bandwidth * spec.bandwidth));
}

namespace {

// Static Gram between the samples of x and y, row-major n x m.
std::vector<double> static_gram(const TimeSeries& x, const TimeSeries& y, const StaticKernelSpec& spec) {
    const std::size_t n = x.size(), m = y.size(), d = x.dim();
    std::vector<double> k(n * m);
    const double* xv = x.values().data();
    const double* yv = y.values().data();
    if (spec.kind == StaticKernelKind::Linear) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) s += xv[i * d + c] * yv[j * d + c];
                k[i * m + j] = s;
            }
    } else {
        const double scale = -1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = xv[i * d + c] - yv[j * d + c];
                    s += diff * diff;
                }
                k[i * m + j] = std::exp(scale * s);
            }
    }
    return k;
}

}  // namespace

namespace {

double solve_goursat(const TimeSeries& x, const TimeSeries& y, const SigKernelConfig& cfg) {
    require(x.dim() == y.dim(), "signature kernel inputs differ in channel dimension (" +
                                    std::to_string(x.dim()) + " vs " + std::to_string(y.dim()) + ")");
    const std::size_t n = x.size(), m = y.size();
    if (n < 2 || m < 2) return 1.0;

    const std::vector<double> k = static_gram(x, y, cfg.static_kernel);

    // Per coarse cell: c1 = 1 + a/2 + a^2/12, c2 = 1 - a^2/12.
    const std::size_t cn = n - 1, cm = m - 1;
    const double inv = 1.0 / std::ldexp(1.0, 2 * cfg.dyadic_order);
    std::vector<double> c1(cn * cm), c2(cn * cm);
    for (std::size_t i = 0; i < cn; ++i)
        for (std::size_t j = 0; j < cm; ++j) {
            const double a = (k[(i + 1) * m + j + 1] - k[(i + 1) * m + j] - k[i * m + j + 1] + k[i * m + j]) * inv;
            c1[i * cm + j] = 1.0 + 0.5 * a + a * a / 12.0;
            c2[i * cm + j] = 1.0 - a * a / 12.0;
        }

    const int shift = cfg.dyadic_order;
    const std::size_t rows = (cn << shift) + 1, cols = (cm << shift) + 1;
    std::vector<double> prev(cols, 1.0), cur(cols, 1.0);
    for (std::size_t fi = 0; fi + 1 < rows; ++fi) {
        const std::size_t ci = fi >> shift;
        const double* r1 = c1.data() + ci * cm;
        const double* r2 = c2.data() + ci * cm;
        cur[0] = 1.0;
        for (std::size_t fj = 0; fj + 1 < cols; ++fj) {
            const std::size_t cj = fj >> shift;
            cur[fj + 1] = (cur[fj] + prev[fj + 1]) * r1[cj] - prev[fj] * r2[cj];
        }
        std::swap(prev, cur);
    }
    const double result = prev[cols - 1];
    if (!std::isfinite(result))
        throw NumericalError(
            "signature kernel PDE solution is not finite; range_normalize the streams "
            "(or lower the RBF bandwidth scale) before evaluating the kernel");
    return result;
}

}  // namespace

double sig_kernel(const TimeSeries& x, const TimeSeries& y, const SigKernelConfig& cfg) {
    cfg.validate();
    // The discretised PDE is not bitwise symmetric under transposition, so both argument
    // orders are mapped to one canonical order: shorter stream first, then lexicographic data.
    const bool swap = y.size() < x.size() ||
                      (y.size() == x.size() && std::tie(y.values(), y.times()) < std::tie(x.values(), x.times()));
    return swap ? solve_goursat(y, x, cfg) : solve_goursat(x, y, cfg);
}

double sig_distance_from_parts(double kxx, double kyy, double kxy) {
    const double d = kxx + kyy - 2.0 * kxy;
    if (!std::isfinite(d)) throw NumericalError("signature distance is not finite");
    if (d >= 0.0) return d;
    if (d > -1e-8) return 0.0;
    throw NumericalError("signature distance is negative (" + std::to_string(d) +
                         "); the PDE grid is too coarse for these inputs, raise the dyadic order");
}

double sig_distance(const TimeSeries& x, const TimeSeries& y, const SigKernelConfig& cfg) {
    return sig_distance_from_parts(sig_kernel(x, x, cfg), sig_kernel(y, y, cfg), sig_kernel(x, y, cfg));
}

namespace {

template <typename Loop>
Eigen::MatrixXd gram_impl(std::span<const TimeSeries> xs, const SigKernelConfig& cfg, Loop loop) {
    const std::size_t r = xs.size();
    Eigen::MatrixXd g(r, r);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(r * (r + 1) / 2);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i; j < r; ++j) pairs.emplace_back(i, j);
    std::vector<double> vals(pairs.size());
    loop(pairs.size(), [&](std::size_t p) { vals[p] = sig_kernel(xs[pairs[p].first], xs[pairs[p].second], cfg); });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        g(i, j) = g(j, i) = vals[p];
    }
    return g;
}

template <typename Loop>
Eigen::MatrixXd cross_impl(std::span<const TimeSeries> xs, std::span<const TimeSeries> ys,
                           const SigKernelConfig& cfg, Loop loop) {
    const std::size_t a = xs.size(), b = ys.size();
    Eigen::MatrixXd g(a, b);
    std::vector<double> vals(a * b);
    loop(a * b, [&](std::size_t p) { vals[p] = sig_kernel(xs[p / b], ys[p % b], cfg); });
    for (std::size_t p = 0; p < a * b; ++p) g(p / b, p % b) = vals[p];
    return g;
}

constexpr auto kParallel = [](std::size_t n, auto&& f) { parallel_for(n, f); };
constexpr auto kSerial = [](std::size_t n, auto&& f) { serial_for(n, f); };

}  // namespace

Eigen::MatrixXd gram_matrix(std::span<const TimeSeries> xs, const SigKernelConfig& cfg) {
    return gram_impl(xs, cfg, kParallel);
}

Eigen::MatrixXd gram_matrix_serial(std::span<const TimeSeries> xs, const SigKernelConfig& cfg) {
    return gram_impl(xs, cfg, kSerial);
}

Eigen::MatrixXd cross_gram(std::span<const TimeSeries> xs, std::span<const TimeSeries> ys,
                           const SigKernelConfig& cfg) {
    return cross_impl(xs, ys, cfg, kParallel);
}

Eigen::MatrixXd cross_gram_serial(std::span<const TimeSeries> xs, std::span<const TimeSeries> ys,
                                  const SigKernelConfig& cfg) {
    return cross_impl(xs, ys, cfg, kSerial);
}

}  // namespace sigabc
