#include "sigabc/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "sigabc/error.hpp"
#include "sigabc/ot.hpp"
#include "sigabc/util.hpp"

namespace sigabc {

using detail::require;

std::string to_string(DiscrepancyTag tag) {
    switch (tag) {
        case DiscrepancyTag::SigDistance: return "sig";
        case DiscrepancyTag::SigKRR: return "skrr";
        case DiscrepancyTag::SALinear: return "sa";
        case DiscrepancyTag::MMD2: return "mmd";
        case DiscrepancyTag::WassersteinCM: return "wass";
    }
    return "?";
}

double mmd2_unbiased(std::span<const double> x, std::span<const double> y, std::size_t dim,
                     const StaticKernelSpec& spec) {
    require(dim >= 1 && x.size() % dim == 0 && y.size() % dim == 0, "MMD point sets are ragged");
    const std::size_t m = x.size() / dim, n = y.size() / dim;
    require(m >= 2 && n >= 2, "unbiased MMD needs at least two samples on each side");
    auto pt = [dim](std::span<const double> s, std::size_t i) { return s.subspan(i * dim, dim); };

    double sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) sxx += static_kernel_eval(spec, pt(x, i), pt(x, j));
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) syy += static_kernel_eval(spec, pt(y, i), pt(y, j));
    double sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) sxy += static_kernel_eval(spec, pt(x, i), pt(y, j));

    const double md = static_cast<double>(m), nd = static_cast<double>(n);
    return 2.0 * sxx / (md * (md - 1.0)) + 2.0 * syy / (nd * (nd - 1.0)) - 2.0 * sxy / (md * nd);
}

double mmd2_unbiased(const TimeSeries& x, const TimeSeries& y, const StaticKernelSpec& spec) {
    require(x.dim() == y.dim(), "MMD inputs differ in dimension");
    return mmd2_unbiased(x.values(), y.values(), x.dim(), spec);
}

double lambda_heuristic(double vertical_range, double horizon) {
    require(vertical_range > 0.0 && horizon > 0.0, "lambda heuristic needs positive V and T");
    return vertical_range / horizon;
}

double wasserstein_cm(const TimeSeries& y, const TimeSeries& x, double lambda, int p) {
    require(lambda >= 0.0 && std::isfinite(lambda), "curve-matching lambda must be non-negative");
    require(p >= 1, "Wasserstein order must be at least 1");
    require(x.dim() == y.dim(), "Wasserstein inputs differ in dimension");
    const std::size_t n = y.size(), m = x.size(), d = y.dim();
    std::vector<double> cost(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = y.value(i, c) - x.value(j, c);
                s += diff * diff;
            }
            const double rho = std::sqrt(s) + lambda * std::abs(y.time(i) - x.time(j));
            cost[i * m + j] = p == 1 ? rho : std::pow(rho, p);
        }
    // Uniform weights 1/n and 1/m scaled to integers m and n.
    std::vector<std::int64_t> supply(n, static_cast<std::int64_t>(m));
    std::vector<std::int64_t> demand(m, static_cast<std::int64_t>(n));
    const double total = solve_transport(supply, demand, cost).cost / (static_cast<double>(n) * static_cast<double>(m));
    const double clipped = std::max(total, 0.0);
    return p == 1 ? clipped : std::pow(clipped, 1.0 / p);
}

double euclidean_sq(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "euclidean distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double vertical_range(const TimeSeries& ts) {
    const std::vector<TimeSeries> one{ts};
    const auto r = channel_ranges(one);
    return *std::max_element(r.begin(), r.end());
}

double median_abs_difference(const TimeSeries& ts) {
    const std::size_t n = ts.size(), d = ts.dim();
    require(n >= 2, "median absolute difference needs at least two samples");
    std::vector<double> diffs;
    diffs.reserve(d * n * (n - 1) / 2);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) diffs.push_back(std::abs(ts.value(i, c) - ts.value(j, c)));
    return median(std::move(diffs));
}

DiscrepancyFn make_sig_discrepancy(TransformPipeline pipeline, SigKernelConfig cfg) {
    cfg.validate();
    require(pipeline.fitted(), "signature discrepancy needs a fitted pipeline");
    nlohmann::json conf = {
        {"pipeline", pipeline.tags()},
        {"static_kernel", cfg.static_kernel.kind == StaticKernelKind::Linear ? "linear" : "rbf"},
        {"bandwidth", cfg.static_kernel.bandwidth},
        {"dyadic_order", cfg.dyadic_order},
    };
    auto bind = [pipeline, cfg](const TimeSeries& observation) -> LossFn {
        auto y = std::make_shared<const TimeSeries>(pipeline.apply(observation));
        const double kyy = sig_kernel(*y, *y, cfg);
        return [pipeline, cfg, y, kyy](const TimeSeries& sim) {
            const TimeSeries x = pipeline.apply(sim);
            return sig_distance_from_parts(sig_kernel(x, x, cfg), kyy, sig_kernel(x, *y, cfg));
        };
    };
    return {DiscrepancyTag::SigDistance, std::move(conf), std::move(bind)};
}

DiscrepancyFn make_mmd_discrepancy(StaticKernelSpec spec) {
    spec.validate();
    nlohmann::json conf = {{"bandwidth", spec.bandwidth}};
    auto bind = [spec](const TimeSeries& observation) -> LossFn {
        auto y = std::make_shared<const TimeSeries>(observation);
        return [spec, y](const TimeSeries& sim) { return mmd2_unbiased(sim, *y, spec); };
    };
    return {DiscrepancyTag::MMD2, std::move(conf), std::move(bind)};
}

DiscrepancyFn make_wasserstein_discrepancy(double lambda, int p) {
    require(lambda >= 0.0, "curve-matching lambda must be non-negative");
    nlohmann::json conf = {{"lambda", lambda}, {"p", p}};
    auto bind = [lambda, p](const TimeSeries& observation) -> LossFn {
        auto y = std::make_shared<const TimeSeries>(observation);
        return [lambda, p, y](const TimeSeries& sim) { return wasserstein_cm(*y, sim, lambda, p); };
    };
    return {DiscrepancyTag::WassersteinCM, std::move(conf), std::move(bind)};
}

}  // namespace sigabc
