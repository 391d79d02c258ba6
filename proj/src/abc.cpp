#include "sigabc/abc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sigabc/error.hpp"
#include "sigabc/models.hpp"
#include "sigabc/parallel.hpp"
#include "sigabc/util.hpp"

namespace sigabc {

using detail::require;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void PriorSpec::validate() const {
    std::visit(overloaded{
                   [](const UniformBox& b) {
                       require(!b.lo.empty() && b.lo.size() == b.hi.size(), "uniform prior bounds are ragged");
                       for (std::size_t i = 0; i < b.lo.size(); ++i)
                           require(std::isfinite(b.lo[i]) && std::isfinite(b.hi[i]) && b.lo[i] < b.hi[i],
                                   "uniform prior needs lo < hi in every dimension");
                   },
                   [](const MA2Triangle&) {},
                   [](const GammaPair& g) {
                       require(!g.shape.empty() && g.shape.size() == g.rate.size(), "Gamma prior is ragged");
                       for (std::size_t i = 0; i < g.shape.size(); ++i)
                           require(g.shape[i] > 0.0 && g.rate[i] > 0.0, "Gamma prior shape and rate must be positive");
                   },
               },
               kind);
}

std::size_t PriorSpec::dim() const {
    return std::visit(overloaded{
                          [](const UniformBox& b) { return b.lo.size(); },
                          [](const MA2Triangle&) { return std::size_t{2}; },
                          [](const GammaPair& g) { return g.shape.size(); },
                      },
                      kind);
}

bool PriorSpec::bounded() const { return !std::holds_alternative<GammaPair>(kind); }

bool PriorSpec::contains(std::span<const double> th) const {
    if (th.size() != dim()) return false;
    return std::visit(overloaded{
                          [&](const UniformBox& b) {
                              for (std::size_t i = 0; i < th.size(); ++i)
                                  if (!(th[i] >= b.lo[i] && th[i] <= b.hi[i])) return false;
                              return true;
                          },
                          [&](const MA2Triangle&) { return ma2_in_triangle(th[0], th[1]); },
                          [&](const GammaPair&) {
                              return std::all_of(th.begin(), th.end(), [](double v) { return v > 0.0; });
                          },
                      },
                      kind);
}

double PriorSpec::log_density(std::span<const double> th) const {
    if (!contains(th)) return -kInf;
    return std::visit(overloaded{
                          [&](const UniformBox& b) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < th.size(); ++i) s -= std::log(b.hi[i] - b.lo[i]);
                              return s;
                          },
                          [&](const MA2Triangle&) { return -std::log(4.0); },  // triangle area 4
                          [&](const GammaPair& g) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < th.size(); ++i)
                                  s += g.shape[i] * std::log(g.rate[i]) - std::lgamma(g.shape[i]) +
                                       (g.shape[i] - 1.0) * std::log(th[i]) - g.rate[i] * th[i];
                              return s;
                          },
                      },
                      kind);
}

std::vector<double> PriorSpec::lower() const {
    return std::visit(overloaded{
                          [](const UniformBox& b) { return b.lo; },
                          [](const MA2Triangle&) { return std::vector<double>{-2.0, -1.0}; },
                          [](const GammaPair&) -> std::vector<double> {
                              throw ValidationError("Gamma prior has no bounded range");
                          },
                      },
                      kind);
}

std::vector<double> PriorSpec::range() const {
    return std::visit(overloaded{
                          [](const UniformBox& b) {
                              std::vector<double> r(b.lo.size());
                              for (std::size_t i = 0; i < r.size(); ++i) r[i] = b.hi[i] - b.lo[i];
                              return r;
                          },
                          [](const MA2Triangle&) { return std::vector<double>{4.0, 2.0}; },
                          [](const GammaPair&) -> std::vector<double> {
                              throw ValidationError("Gamma prior has no bounded range");
                          },
                      },
                      kind);
}

std::vector<double> PriorSpec::mean() const {
    return std::visit(overloaded{
                          [](const UniformBox& b) {
                              std::vector<double> m(b.lo.size());
                              for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (b.lo[i] + b.hi[i]);
                              return m;
                          },
                          // centroid of (-2,1), (2,1), (0,-1)
                          [](const MA2Triangle&) { return std::vector<double>{0.0, 1.0 / 3.0}; },
                          [](const GammaPair& g) {
                              std::vector<double> m(g.shape.size());
                              for (std::size_t i = 0; i < m.size(); ++i) m[i] = g.shape[i] / g.rate[i];
                              return m;
                          },
                      },
                      kind);
}

nlohmann::json PriorSpec::to_json() const {
    return std::visit(overloaded{
                          [](const UniformBox& b) {
                              return nlohmann::json{{"kind", "uniform"}, {"lo", b.lo}, {"hi", b.hi}};
                          },
                          [](const MA2Triangle&) { return nlohmann::json{{"kind", "ma2_triangle"}}; },
                          [](const GammaPair& g) {
                              return nlohmann::json{{"kind", "gamma"}, {"shape", g.shape}, {"rate", g.rate}};
                          },
                      },
                      kind);
}

ParamVector sample_prior(const PriorSpec& prior, Rng& rng) {
    return std::visit(overloaded{
                          [&](const UniformBox& b) {
                              ParamVector th(b.lo.size());
                              for (std::size_t i = 0; i < th.size(); ++i)
                                  th[i] = std::uniform_real_distribution<double>(b.lo[i], b.hi[i])(rng);
                              return th;
                          },
                          [&](const MA2Triangle&) {
                              std::uniform_real_distribution<double> u1(-2.0, 2.0), u2(-1.0, 1.0);
                              while (true) {
                                  const double a = u1(rng), b = u2(rng);
                                  if (ma2_in_triangle(a, b)) return ParamVector{a, b};
                              }
                          },
                          [&](const GammaPair& g) {
                              ParamVector th(g.shape.size());
                              for (std::size_t i = 0; i < th.size(); ++i) th[i] = sample_gamma(g.shape[i], g.rate[i], rng);
                              return th;
                          },
                      },
                      prior.kind);
}

namespace {

struct Draw {
    ParamVector theta;
    double loss;
    bool numerical_error;
};

template <typename Loop>
ParticleSet rejection_impl(const PriorSpec& prior, const Simulator& simulator, const LossFn& loss,
                           std::size_t N, std::size_t M, std::uint64_t seed, Loop loop) {
    prior.validate();
    require(M >= 1 && M < N, "rejection ABC needs 1 <= M < N");
    std::vector<Draw> draws(N);
    loop(N, [&](std::size_t i) {
        Rng rng = make_stream(seed, StreamPurpose::Particle, i);
        Draw& d = draws[i];
        d.theta = sample_prior(prior, rng);
        d.loss = kInf;
        d.numerical_error = false;
        try {
            const double l = loss(simulator(d.theta, rng));
            if (std::isfinite(l)) d.loss = l;
        } catch (const NumericalError&) {
            d.numerical_error = true;
        }
    });

    ParticleSet ps;
    ps.n_total = N;
    for (const auto& d : draws) {
        if (d.numerical_error)
            ++ps.diagnostics.numerical_errors;
        else if (!std::isfinite(d.loss))
            ++ps.diagnostics.non_finite;
    }
    if (ps.diagnostics.non_finite + ps.diagnostics.numerical_errors == N)
        throw NumericalError("every ABC loss was non-finite; check the simulator and discrepancy");

    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto by_loss = [&](std::size_t a, std::size_t b) {
        return draws[a].loss < draws[b].loss || (draws[a].loss == draws[b].loss && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(M), order.end(), by_loss);
    ps.particles.reserve(M);
    for (std::size_t k = 0; k < M; ++k) {
        const std::size_t i = order[k];
        ps.particles.push_back({std::move(draws[i].theta), draws[i].loss,
                                stream_seed(seed, StreamPurpose::Particle, i)});
    }
    return ps;
}

}  // namespace

ParticleSet rejection_abc(const PriorSpec& prior, const Simulator& simulator, const LossFn& loss,
                          std::size_t N, std::size_t M, std::uint64_t seed) {
    return rejection_impl(prior, simulator, loss, N, M, seed,
                          [](std::size_t n, auto&& f) { parallel_for(n, f); });
}

ParticleSet rejection_abc_serial(const PriorSpec& prior, const Simulator& simulator, const LossFn& loss,
                                 std::size_t N, std::size_t M, std::uint64_t seed) {
    return rejection_impl(prior, simulator, loss, N, M, seed,
                          [](std::size_t n, auto&& f) { serial_for(n, f); });
}

ParticleSet rejection_abc(const PriorSpec& prior, const Simulator& simulator, const DiscrepancyFn& rho,
                          const TimeSeries& observation, std::size_t N, std::size_t M, std::uint64_t seed) {
    return rejection_abc(prior, simulator, rho.bind(observation), N, M, seed);
}

ParamVector posterior_mean(const ParticleSet& ps) {
    require(!ps.particles.empty(), "posterior mean of an empty particle set");
    ParamVector m(ps.particles.front().theta.size(), 0.0);
    for (const auto& p : ps.particles)
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += p.theta[i];
    for (double& v : m) v /= static_cast<double>(ps.particles.size());
    return m;
}

std::string particles_to_csv(const ParticleSet& ps) {
    require(!ps.particles.empty(), "cannot write an empty particle set");
    const std::size_t p = ps.particles.front().theta.size();
    std::string out;
    for (std::size_t i = 0; i < p; ++i) out += "theta_" + std::to_string(i + 1) + ",";
    out += "loss,seed\n";
    for (const auto& q : ps.particles) {
        for (double v : q.theta) out += format_g12(v) + ",";
        out += format_g12(q.loss) + "," + std::to_string(q.seed) + "\n";
    }
    return out;
}

ParticleSet particles_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "particle CSV is empty");
    const std::size_t cols = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    require(cols >= 3 && line.rfind("theta_1", 0) == 0, "particle CSV header must be theta_1,...,loss,seed");
    const std::size_t p = cols - 2;
    ParticleSet ps;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::size_t start = 0;
        while (true) {
            const std::size_t c = line.find(',', start);
            f.emplace_back(line.data() + start, (c == std::string::npos ? line.size() : c) - start);
            if (c == std::string::npos) break;
            start = c + 1;
        }
        require(f.size() == cols, "particle CSV row has the wrong number of fields");
        Particle q;
        for (std::size_t i = 0; i < p; ++i) q.theta.push_back(parse_double(f[i]));
        q.loss = parse_double(f[p]);
        q.seed = std::stoull(std::string(f[p + 1]));
        ps.particles.push_back(std::move(q));
    }
    require(!ps.particles.empty(), "particle CSV has no rows");
    ps.n_total = ps.particles.size();
    return ps;
}

}  // namespace sigabc
