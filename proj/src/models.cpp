#include "sigabc/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "sigabc/error.hpp"
#include "sigabc/util.hpp"

namespace sigabc {

using detail::require;

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2 pi)
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_finite_values(const std::vector<double>& v, const char* model) {
    for (double x : v)
        if (!std::isfinite(x)) throw NumericalError(std::string(model) + " simulation overflowed");
}

/// Least squares with a 1e-8 ridge, solved as the stacked system [X; 1e-4 I] b = [y; 0]
/// so badly scaled designs stay well conditioned.
Eigen::VectorXd ridge_lstsq(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows(), k = X.cols();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + k, k);
    A.topRows(n) = X;
    A.bottomRows(k).diagonal().setConstant(std::sqrt(1e-8));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + k);
    b.head(n) = y;
    Eigen::VectorXd beta = A.colPivHouseholderQr().solve(b);
    for (Eigen::Index i = 0; i < beta.size(); ++i)
        if (!std::isfinite(beta[i])) beta[i] = 0.0;
    return beta;
}

}  // namespace

// --- MA(2) ------------------------------------------------------------------

bool ma2_in_triangle(double t1, double t2) {
    return t1 >= -2.0 && t1 <= 2.0 && t1 + t2 > -1.0 && t1 - t2 < 1.0 && t2 < 1.0;
}

TimeSeries simulate_ma2(const MA2Params& p, int T, Rng& rng) {
    require(T >= 2, "MA(2) series length T must be at least 2");
    std::normal_distribution<double> normal;
    std::vector<double> eps(static_cast<std::size_t>(T) + 1);
    for (double& e : eps) e = normal(rng);
    std::vector<double> x(eps.size());
    x[0] = 0.0;
    x[1] = eps[1] + p.theta1 * eps[0];
    for (std::size_t t = 2; t < x.size(); ++t) x[t] = eps[t] + p.theta1 * eps[t - 1] + p.theta2 * eps[t - 2];
    return TimeSeries::on_index_grid(std::move(x), 1);
}

double ma2_log_likelihood(const MA2Params& p, const TimeSeries& y) {
    require(y.dim() == 1, "MA(2) likelihood needs a univariate series");
    require(y.size() >= 2, "MA(2) likelihood needs x_0 and at least one more value");
    const std::size_t T = y.size() - 1;
    const double t1 = p.theta1, t2 = p.theta2;
    const double diag = 1.0 + t1 * t1 + t2 * t2;
    const double off1 = t1 + t1 * t2;
    const double off2 = t2;

    // z_i = x_{T-i}; band Cholesky of M with L[i][i-1] = l1[i], L[i][i-2] = l2[i].
    std::vector<double> l0(T), l1(T, 0.0), l2(T, 0.0), w(T);
    double logdet_half = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
        const double mii = (i + 1 == T) ? 1.0 + t1 * t1 : diag;
        if (i >= 2) l2[i] = off2 / l0[i - 2];
        if (i >= 1) l1[i] = (off1 - (i >= 2 ? l2[i] * l1[i - 1] : 0.0)) / l0[i - 1];
        const double s = mii - l1[i] * l1[i] - l2[i] * l2[i];
        if (!(s > 0.0) || !std::isfinite(s))
            throw NumericalError("MA(2) covariance is not positive definite for these parameters");
        l0[i] = std::sqrt(s);
        const double z = y.value(T - i, 0);
        double r = z;
        if (i >= 1) r -= l1[i] * w[i - 1];
        if (i >= 2) r -= l2[i] * w[i - 2];
        w[i] = r / l0[i];
        logdet_half += std::log(l0[i]);
        quad += w[i] * w[i];
    }
    return -0.5 * quad - logdet_half - 0.5 * static_cast<double>(T) * kLogTwoPi;
}

// --- GBM --------------------------------------------------------------------

TimeSeries simulate_gbm(const GBMParams& p, double x0, int T, Rng& rng) {
    require(T >= 2, "GBM series length T must be at least 2");
    require(x0 > 0.0 && std::isfinite(x0), "GBM x0 must be positive");
    require(p.sigma >= 0.0, "GBM sigma must be non-negative");
    const double dt = 1.0 / (T - 1);
    const double drift = (p.mu - 0.5 * p.sigma * p.sigma) * dt;
    const double scale = p.sigma * std::sqrt(dt);
    std::normal_distribution<double> normal;
    std::vector<double> t(static_cast<std::size_t>(T)), x(static_cast<std::size_t>(T));
    double lx = std::log(x0);
    for (int i = 0; i < T; ++i) {
        if (i > 0) lx += drift + scale * normal(rng);
        t[static_cast<std::size_t>(i)] = i * dt;
        x[static_cast<std::size_t>(i)] = std::exp(lx);
    }
    require_finite_values(x, "GBM");
    return TimeSeries(std::move(t), std::move(x), 1);
}

double gbm_log_likelihood(const GBMParams& p, const TimeSeries& y) {
    require(y.dim() == 1 && y.size() >= 2, "GBM likelihood needs a univariate series of length >= 2");
    require(p.sigma > 0.0, "GBM likelihood needs sigma > 0");
    double ll = 0.0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        const double a = y.value(i - 1, 0), b = y.value(i, 0);
        require(a > 0.0 && b > 0.0, "GBM likelihood needs positive values");
        const double dt = y.time(i) - y.time(i - 1);
        const double var = p.sigma * p.sigma * dt;
        const double r = std::log(b) - std::log(a) - (p.mu - 0.5 * p.sigma * p.sigma) * dt;
        ll += -0.5 * (kLogTwoPi + std::log(var) + r * r / var);
    }
    return ll;
}

// --- Ricker -----------------------------------------------------------------

double ricker_step(double N, double log_r, double sigma, double eps) {
    const double n = std::max(N, kRickerFloor);
    return std::exp(log_r + std::log(n) - n + sigma * eps);
}

double poisson_log_pmf(double k, double mean) {
    if (mean <= 0.0) return k == 0.0 ? 0.0 : kNegInf;
    return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

TimeSeries simulate_ricker(const RickerParams& p, int T, double N0, Rng& rng) {
    require(T >= 1, "Ricker series length T must be at least 1");
    require(N0 > 0.0, "Ricker N0 must be positive");
    require(p.phi >= 0.0 && p.sigma >= 0.0, "Ricker phi and sigma must be non-negative");
    std::normal_distribution<double> normal;
    std::vector<double> t(static_cast<std::size_t>(T)), y(static_cast<std::size_t>(T));
    double N = N0;
    for (int i = 0; i < T; ++i) {
        N = ricker_step(N, p.log_r, p.sigma, normal(rng));
        const double mean = p.phi * N;
        if (!std::isfinite(mean)) throw NumericalError("Ricker latent state overflowed");
        double obs = 0.0;
        if (mean > 0.0) obs = static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
        t[static_cast<std::size_t>(i)] = i + 1;
        y[static_cast<std::size_t>(i)] = obs;
    }
    return TimeSeries(std::move(t), std::move(y), 1);
}

std::vector<double> wood_summaries(const TimeSeries& ts) {
    require(ts.dim() == 1, "Ricker summaries need a univariate series");
    const std::size_t n = ts.size();
    require(n >= 7, "Ricker summaries need at least 7 observations");
    const std::vector<double> x = ts.channel(0);
    std::vector<double> out;
    out.reserve(kWoodSummaryCount);

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    for (std::size_t lag = 0; lag <= 5; ++lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - mean) * (x[t + lag] - mean);
        out.push_back(s / static_cast<double>(n));
    }
    out.push_back(mean);
    out.push_back(static_cast<double>(std::count(x.begin(), x.end(), 0.0)));

    {
        Eigen::MatrixXd X(n - 1, 2);
        Eigen::VectorXd y(n - 1);
        for (std::size_t t = 0; t + 1 < n; ++t) {
            X(t, 0) = std::pow(x[t], 0.3);
            X(t, 1) = std::pow(x[t], 0.6);
            y[t] = std::pow(x[t + 1], 0.3);
        }
        const Eigen::VectorXd b = ridge_lstsq(X, y);
        out.push_back(b[0]);
        out.push_back(b[1]);
    }
    {
        std::vector<double> d(n - 1);
        for (std::size_t t = 1; t < n; ++t) d[t - 1] = x[t] - x[t - 1];
        std::vector<double> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        Eigen::MatrixXd X(n - 1, 4);
        Eigen::VectorXd y(n - 1);
        for (std::size_t i = 0; i < d.size(); ++i) {
            X(i, 0) = 1.0;
            X(i, 1) = d[i];
            X(i, 2) = d[i] * d[i];
            X(i, 3) = d[i] * d[i] * d[i];
            y[i] = sorted[i];
        }
        const Eigen::VectorXd b = ridge_lstsq(X, y);
        for (Eigen::Index i = 0; i < 4; ++i) out.push_back(b[i]);
    }
    return out;
}

// --- GSE --------------------------------------------------------------------

GSETrajectory simulate_gse(const GSEParams& p, int Z, double T, Rng& rng) {
    require(Z >= 2, "epidemic population Z must be at least 2");
    require(T > 0.0 && std::isfinite(T), "epidemic horizon T must be positive");
    require(p.beta >= 0.0 && p.gamma >= 0.0 && std::isfinite(p.beta) && std::isfinite(p.gamma),
            "epidemic rates must be non-negative");
    GSETrajectory tr;
    tr.Z = Z;
    tr.T = T;
    tr.phi1 = 0.0;
    tr.n_I = 1;
    int X = Z - 1, Y = 1;
    double t = 0.0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (Y > 0) {
        const double inf_rate = p.beta * X * Y;
        const double rate = inf_rate + p.gamma * Y;
        if (!(rate > 0.0)) break;
        std::exponential_distribution<double> wait(rate);
        double next = t;
        while (!(next > t)) next = t + wait(rng);
        if (next > T) break;
        const double dt = next - t;
        tr.int_XY += static_cast<double>(X) * Y * dt;
        tr.int_Y += static_cast<double>(Y) * dt;
        if (unif(rng) * rate < inf_rate) {
            --X;
            ++Y;
            ++tr.n_I;
            tr.events.push_back({next, GSEEventKind::Infection, X, Y});
        } else {
            --Y;
            ++tr.n_R;
            tr.events.push_back({next, GSEEventKind::Recovery, X, Y});
        }
        t = next;
    }
    tr.int_XY += static_cast<double>(X) * Y * (T - t);
    tr.int_Y += static_cast<double>(Y) * (T - t);
    return tr;
}

GSETrajectory gse_trajectory_from_events(int Z, double T, std::vector<GSEEvent> events) {
    require(Z >= 2 && T > 0.0, "epidemic Z and T must be positive");
    GSETrajectory tr;
    tr.Z = Z;
    tr.T = T;
    tr.n_I = 1;
    int X = Z - 1, Y = 1;
    double t = 0.0;
    for (const auto& e : events) {
        require(e.t > t && e.t <= T, "epidemic event times must increase within (0, T]");
        require(Y > 0, "epidemic event after extinction");
        const double dt = e.t - t;
        tr.int_XY += static_cast<double>(X) * Y * dt;
        tr.int_Y += static_cast<double>(Y) * dt;
        if (e.kind == GSEEventKind::Infection) {
            require(X > 0, "infection with no susceptibles");
            --X;
            ++Y;
            ++tr.n_I;
        } else {
            --Y;
            ++tr.n_R;
        }
        require(e.X == X && e.Y == Y, "epidemic event state is inconsistent with its kind");
        t = e.t;
    }
    tr.int_XY += static_cast<double>(X) * Y * (T - t);
    tr.int_Y += static_cast<double>(Y) * (T - t);
    tr.events = std::move(events);
    return tr;
}

TimeSeries gse_observation(const GSETrajectory& traj) {
    const double Z = traj.Z;
    std::vector<double> t{0.0}, v{1.0 / Z, 0.0};
    t.reserve(traj.events.size() + 1);
    v.reserve(2 * (traj.events.size() + 1));
    for (const auto& e : traj.events) {
        t.push_back(e.t / traj.T);
        v.push_back(e.Y / Z);
        v.push_back((traj.Z - e.X - e.Y) / Z);
    }
    return TimeSeries(std::move(t), std::move(v), 2);
}

GSETrajectory gse_trajectory_from_observation(const TimeSeries& obs, int Z, double T) {
    require(obs.dim() == 2, "epidemic observation needs two channels");
    require(std::lround(obs.value(0, 0) * Z) == 1 && std::lround(obs.value(0, 1) * Z) == 0,
            "epidemic observation must start from one infected and no recovered");
    std::vector<GSEEvent> events;
    int prevY = 1, prevR = 0;
    for (std::size_t i = 1; i < obs.size(); ++i) {
        const int Y = static_cast<int>(std::lround(obs.value(i, 0) * Z));
        const int R = static_cast<int>(std::lround(obs.value(i, 1) * Z));
        GSEEventKind kind;
        if (Y == prevY + 1 && R == prevR)
            kind = GSEEventKind::Infection;
        else if (Y == prevY - 1 && R == prevR + 1)
            kind = GSEEventKind::Recovery;
        else
            throw ValidationError("epidemic observation row " + std::to_string(i) +
                                  " is not a single infection or recovery");
        events.push_back({obs.time(i) * T, kind, Z - Y - R, Y});
        prevY = Y;
        prevR = R;
    }
    return gse_trajectory_from_events(Z, T, std::move(events));
}

std::string gse_events_csv(const GSETrajectory& traj) {
    std::string out = "t,kind,X,Y\n";
    for (const auto& e : traj.events) {
        out += format_exact(e.t);
        out += e.kind == GSEEventKind::Infection ? ",I," : ",R,";
        out += std::to_string(e.X) + "," + std::to_string(e.Y) + "\n";
    }
    return out;
}

std::pair<GammaShapeRate, GammaShapeRate> gse_posterior_params(const GSETrajectory& traj, const GSEHyper& h) {
    require(traj.n_I >= 1, "epidemic posterior needs at least one infection");
    return {{h.lambda_beta + traj.n_I - 1, h.nu_beta + traj.int_XY},
            {h.lambda_gamma + traj.n_R, h.nu_gamma + traj.int_Y}};
}

double sample_gamma(double shape, double rate, Rng& rng) {
    require(shape > 0.0 && rate > 0.0, "Gamma shape and rate must be positive");
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

std::pair<double, double> gse_exact_posterior_sample(const GSETrajectory& traj, const GSEHyper& h, Rng& rng) {
    const auto [b, g] = gse_posterior_params(traj, h);
    const double beta = sample_gamma(b.shape, b.rate, rng);
    const double gamma = sample_gamma(g.shape, g.rate, rng);
    return {beta, gamma};
}

}  // namespace sigabc
