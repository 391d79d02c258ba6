#include "sigabc/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "sigabc/error.hpp"
#include "sigabc/models.hpp"
#include "sigabc/rng.hpp"
#include "sigabc/util.hpp"

namespace sigabc {

using detail::require;
using nlohmann::json;

void TrainingSet::validate() const {
    require(streams.size() >= 2, "training set needs at least two examples");
    require(streams.size() == thetas.size(), "training set has different numbers of streams and thetas");
    const std::size_t d = streams.front().dim(), p = thetas.front().size();
    require(p >= 1, "training thetas are empty");
    for (std::size_t i = 0; i < streams.size(); ++i) {
        require(streams[i].dim() == d, "training streams differ in channel dimension");
        require(thetas[i].size() == p, "training thetas differ in dimension");
    }
    require(param_lo.size() == param_range.size(), "parameter normalisation is ragged");
    if (!param_range.empty()) {
        require(param_range.size() == p, "parameter normalisation does not match theta dimension");
        for (double r : param_range) require(r > 0.0, "parameter ranges must be positive");
    }
}

Eigen::MatrixXd TrainingSet::targets() const {
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(param_dim()));
    for (std::size_t i = 0; i < size(); ++i) {
        const auto z = normalise_params(thetas[i], param_lo, param_range);
        for (std::size_t j = 0; j < z.size(); ++j) Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z[j];
    }
    return Y;
}

std::vector<double> normalise_params(std::span<const double> theta, std::span<const double> lo,
                                     std::span<const double> range) {
    std::vector<double> z(theta.begin(), theta.end());
    if (range.empty()) return z;
    require(lo.size() == z.size() && range.size() == z.size(), "parameter normalisation dimension mismatch");
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (z[i] - lo[i]) / range[i];
    return z;
}

std::vector<double> denormalise_params(std::span<const double> z, std::span<const double> lo,
                                       std::span<const double> range) {
    std::vector<double> th(z.begin(), z.end());
    if (range.empty()) return th;
    require(lo.size() == th.size() && range.size() == th.size(), "parameter normalisation dimension mismatch");
    for (std::size_t i = 0; i < th.size(); ++i) th[i] = lo[i] + th[i] * range[i];
    return th;
}

std::vector<double> power_features(const TimeSeries& ts, int pmax) {
    require(pmax >= 1, "power features need pmax >= 1");
    require(ts.dim() == 1, "power features need a univariate series");
    const std::size_t n = ts.size();
    std::vector<double> out(n * static_cast<std::size_t>(pmax));
    for (std::size_t i = 0; i < n; ++i) {
        const double v = ts.value(i, 0);
        double acc = 1.0;
        for (int k = 0; k < pmax; ++k) {
            acc *= v;
            out[static_cast<std::size_t>(k) * n + i] = acc;
        }
    }
    return out;
}

// --- linear summaries -------------------------------------------------------

std::vector<double> LinearSummaryModel::features(const TimeSeries& ts) const {
    return map == FeatureMap::Powers ? power_features(ts, pmax) : wood_summaries(ts);
}

Eigen::VectorXd LinearSummaryModel::predict_normalised(const TimeSeries& ts) const {
    const std::vector<double> g = features(ts);
    require(static_cast<Eigen::Index>(g.size()) == A.cols(),
            "series gives " + std::to_string(g.size()) + " features but the summary model expects " +
                std::to_string(A.cols()));
    return A * Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size())) + intercept;
}

LinearSummaryModel fit_linear_summary(const TrainingSet& train, FeatureMap map, int pmax) {
    train.validate();
    LinearSummaryModel m;
    m.map = map;
    m.pmax = pmax;
    m.param_lo = train.param_lo;
    m.param_range = train.param_range;

    const auto R = static_cast<Eigen::Index>(train.size());
    std::vector<std::vector<double>> feats(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) feats[i] = m.features(train.streams[i]);
    const auto J = static_cast<Eigen::Index>(feats.front().size());
    for (const auto& f : feats)
        require(static_cast<Eigen::Index>(f.size()) == J, "linear summaries need equal-length training streams");

    Eigen::MatrixXd X(R, J);
    for (Eigen::Index i = 0; i < R; ++i)
        for (Eigen::Index j = 0; j < J; ++j) X(i, j) = feats[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Eigen::MatrixXd Y = train.targets();
    const Eigen::RowVectorXd xbar = X.colwise().mean();
    const Eigen::RowVectorXd ybar = Y.colwise().mean();
    X.rowwise() -= xbar;
    Y.rowwise() -= ybar;

    // Ridge 1e-8 on the normal equations, solved as a stacked least-squares problem.
    Eigen::MatrixXd Aug = Eigen::MatrixXd::Zero(R + J, J);
    Aug.topRows(R) = X;
    Aug.bottomRows(J).diagonal().setConstant(std::sqrt(1e-8));
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(R + J, Y.cols());
    rhs.topRows(R) = Y;
    const Eigen::MatrixXd B = Aug.colPivHouseholderQr().solve(rhs);  // J x p
    if (!B.allFinite()) throw NumericalError("linear summary regression produced non-finite coefficients");
    m.A = B.transpose();
    m.intercept = ybar.transpose() - m.A * xbar.transpose();
    return m;
}

// --- KRR summaries ----------------------------------------------------------

double solve_regularised(const Eigen::MatrixXd& G, double alpha, const Eigen::MatrixXd& psi, Eigen::MatrixXd& W) {
    require(alpha >= 0.0 && std::isfinite(alpha), "ridge alpha must be non-negative");
    require(G.rows() == G.cols() && G.rows() == psi.rows(), "Gram and targets do not match");
    const double psi_norm = psi.norm();
    for (double jitter : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
        Eigen::MatrixXd A = G;
        A.diagonal().array() += alpha + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) continue;
        Eigen::MatrixXd sol = llt.solve(psi);
        if (!sol.allFinite()) continue;
        if ((A * sol - psi).norm() > 1e-8 * std::max(psi_norm, 1e-300)) continue;
        W = std::move(sol);
        return jitter;
    }
    throw NumericalError("kernel ridge solve failed even with 1e-6 jitter; raise alpha or remove duplicate streams");
}

Eigen::VectorXd KRRSummaryModel::predict_normalised(const TimeSeries& ts) const {
    const TimeSeries x = pipeline.apply(ts);
    Eigen::VectorXd k(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) k[static_cast<Eigen::Index>(i)] = sig_kernel(x, train[i], cfg);
    return weights.transpose() * k;
}

KRRSummaryModel fit_krr_summary_gram(std::vector<TimeSeries> transformed, const Eigen::MatrixXd& gram,
                                     const TrainingSet& train, const TransformPipeline& fitted,
                                     const SigKernelConfig& cfg, double alpha) {
    KRRSummaryModel m;
    m.pipeline = fitted;
    m.train = std::move(transformed);
    m.cfg = cfg;
    m.alpha = alpha;
    m.param_lo = train.param_lo;
    m.param_range = train.param_range;
    m.jitter = solve_regularised(gram, alpha, train.targets(), m.weights);
    return m;
}

KRRSummaryModel fit_krr_summary(const TrainingSet& train, const TransformPipeline& pipeline,
                                const SigKernelConfig& cfg, double alpha) {
    train.validate();
    cfg.validate();
    const TransformPipeline fitted = pipeline.fitted() ? pipeline : pipeline.fit_ranges(train.streams);
    std::vector<TimeSeries> xs;
    xs.reserve(train.size());
    for (const auto& s : train.streams) xs.push_back(fitted.apply(s));
    const Eigen::MatrixXd G = gram_matrix(xs, cfg);
    return fit_krr_summary_gram(std::move(xs), G, train, fitted, cfg, alpha);
}

std::vector<double> predict_summary(const LinearSummaryModel& m, const TimeSeries& ts) {
    const Eigen::VectorXd z = m.predict_normalised(ts);
    return denormalise_params(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), m.param_lo,
                              m.param_range);
}

std::vector<double> predict_summary(const KRRSummaryModel& m, const TimeSeries& ts) {
    const Eigen::VectorXd z = m.predict_normalised(ts);
    return denormalise_params(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())), m.param_lo,
                              m.param_range);
}

CVResult cross_validate_krr(const TrainingSet& train, const TransformPipeline& pipeline,
                            const SigKernelConfig& base, std::span<const double> alpha_grid,
                            std::span<const double> bandwidth_grid, std::size_t folds, std::uint64_t seed) {
    train.validate();
    require(!alpha_grid.empty() && !bandwidth_grid.empty(), "cross-validation grids must be non-empty");
    require(folds >= 2, "cross-validation needs at least two folds");
    require(train.size() >= folds, "fewer training examples than cross-validation folds");

    const TransformPipeline fitted = pipeline.fitted() ? pipeline : pipeline.fit_ranges(train.streams);
    std::vector<TimeSeries> xs;
    for (const auto& s : train.streams) xs.push_back(fitted.apply(s));
    const Eigen::MatrixXd Y = train.targets();

    const std::size_t R = train.size();
    std::vector<std::size_t> perm(R);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng = make_stream(seed, StreamPurpose::Folds, 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> fold_of(R);
    for (std::size_t k = 0; k < R; ++k) fold_of[perm[k]] = k * folds / R;

    CVResult best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    bool have = false;
    for (double bw : bandwidth_grid) {
        SigKernelConfig cfg = base;
        cfg.static_kernel = StaticKernelSpec::rbf(bw);
        const Eigen::MatrixXd G = gram_matrix(xs, cfg);
        for (double alpha : alpha_grid) {
            double total = 0.0;
            for (std::size_t f = 0; f < folds && std::isfinite(total); ++f) {
                std::vector<Eigen::Index> tr, va;
                for (std::size_t i = 0; i < R; ++i) (fold_of[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
                const Eigen::MatrixXd Gtt = G(tr, tr);
                const Eigen::MatrixXd Gvt = G(va, tr);
                const Eigen::MatrixXd Yt = Y(tr, Eigen::all);
                const Eigen::MatrixXd Yv = Y(va, Eigen::all);
                Eigen::MatrixXd W;
                try {
                    solve_regularised(Gtt, alpha, Yt, W);
                } catch (const NumericalError&) {
                    total = std::numeric_limits<double>::infinity();
                    break;
                }
                total += (Gvt * W - Yv).squaredNorm() / static_cast<double>(va.size());
            }
            const double mse = total / static_cast<double>(folds);
            const bool better = !have || mse < best.mse ||
                                (mse == best.mse && (alpha > best.alpha || (alpha == best.alpha && bw > best.bandwidth)));
            if (better) {
                best = {alpha, bw, mse};
                have = true;
            }
        }
    }
    return best;
}

namespace {

template <typename Model>
DiscrepancyFn summary_discrepancy(DiscrepancyTag tag, std::shared_ptr<const Model> model, json conf) {
    auto bind = [model](const TimeSeries& observation) -> LossFn {
        const Eigen::VectorXd sy = model->predict_normalised(observation);
        return [model, sy](const TimeSeries& sim) { return (model->predict_normalised(sim) - sy).squaredNorm(); };
    };
    return {tag, std::move(conf), std::move(bind)};
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    // Stored row-major.
    std::vector<double> v(static_cast<std::size_t>(M.size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) v[static_cast<std::size_t>(i * M.cols() + j)] = M(i, j);
    return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", base64_encode_doubles(v)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
    const std::vector<double> v = base64_decode_doubles(j.at("data").get<std::string>());
    require(static_cast<Eigen::Index>(v.size()) == r * c, "matrix payload does not match its shape");
    Eigen::MatrixXd M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < c; ++k) M(i, k) = v[static_cast<std::size_t>(i * c + k)];
    return M;
}

json pipeline_to_json(const TransformPipeline& p) {
    json steps = json::array();
    const auto tags = p.tags();
    for (std::size_t i = 0; i < tags.size(); ++i) {
        json s = {{"kind", tags[i]}};
        if (!p.steps()[i].range.empty()) s["range"] = base64_encode_doubles(p.steps()[i].range);
        steps.push_back(std::move(s));
    }
    return steps;
}

TransformPipeline pipeline_from_json(const json& j) {
    std::vector<std::string> tags;
    for (const auto& s : j) tags.push_back(s.at("kind").get<std::string>());
    std::vector<Transform> steps = TransformPipeline::parse(tags).steps();
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (j[i].contains("range")) steps[i].range = base64_decode_doubles(j[i].at("range").get<std::string>());
    return TransformPipeline(std::move(steps));
}

json kernel_to_json(const SigKernelConfig& c) {
    return {{"static_kernel", c.static_kernel.kind == StaticKernelKind::Linear ? "linear" : "rbf"},
            {"bandwidth", c.static_kernel.bandwidth},
            {"dyadic_order", c.dyadic_order}};
}

SigKernelConfig kernel_from_json(const json& j) {
    SigKernelConfig c;
    const auto kind = j.at("static_kernel").get<std::string>();
    require(kind == "linear" || kind == "rbf", "unknown static kernel '" + kind + "'");
    c.static_kernel = kind == "linear" ? StaticKernelSpec::linear() : StaticKernelSpec::rbf(j.at("bandwidth").get<double>());
    c.dyadic_order = j.at("dyadic_order").get<int>();
    c.validate();
    return c;
}

}  // namespace

DiscrepancyFn make_linear_summary_discrepancy(LinearSummaryModel model) {
    json conf = {{"features", model.map == FeatureMap::Powers ? "powers" : "wood"}, {"pmax", model.pmax}};
    return summary_discrepancy(DiscrepancyTag::SALinear, std::make_shared<const LinearSummaryModel>(std::move(model)),
                               std::move(conf));
}

DiscrepancyFn make_krr_summary_discrepancy(KRRSummaryModel model) {
    json conf = {{"kernel", kernel_to_json(model.cfg)}, {"alpha", model.alpha}, {"training_size", model.train.size()}};
    return summary_discrepancy(DiscrepancyTag::SigKRR, std::make_shared<const KRRSummaryModel>(std::move(model)),
                               std::move(conf));
}

json to_json(const LinearSummaryModel& m) {
    return {{"type", "linear_summary"},
            {"features", m.map == FeatureMap::Powers ? "powers" : "wood"},
            {"pmax", m.pmax},
            {"A", matrix_to_json(m.A)},
            {"intercept", base64_encode_doubles(std::span<const double>(m.intercept.data(), m.intercept.size()))},
            {"param_lo", m.param_lo},
            {"param_range", m.param_range}};
}

LinearSummaryModel linear_summary_from_json(const json& j) {
    require(j.at("type") == "linear_summary", "not a linear summary model");
    LinearSummaryModel m;
    const auto f = j.at("features").get<std::string>();
    require(f == "powers" || f == "wood", "unknown feature map '" + f + "'");
    m.map = f == "powers" ? FeatureMap::Powers : FeatureMap::WoodSummaries;
    m.pmax = j.at("pmax").get<int>();
    m.A = matrix_from_json(j.at("A"));
    const auto b = base64_decode_doubles(j.at("intercept").get<std::string>());
    m.intercept = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    require(m.intercept.size() == m.A.rows(), "intercept does not match the coefficient matrix");
    m.param_lo = j.at("param_lo").get<std::vector<double>>();
    m.param_range = j.at("param_range").get<std::vector<double>>();
    return m;
}

json to_json(const KRRSummaryModel& m) {
    json streams = json::array();
    for (const auto& s : m.train)
        streams.push_back({{"dim", s.dim()}, {"times", base64_encode_doubles(s.times())},
                           {"values", base64_encode_doubles(s.values())}});
    return {{"type", "krr_summary"},
            {"pipeline", pipeline_to_json(m.pipeline)},
            {"kernel", kernel_to_json(m.cfg)},
            {"alpha", m.alpha},
            {"jitter", m.jitter},
            {"weights", matrix_to_json(m.weights)},
            {"train", std::move(streams)},
            {"param_lo", m.param_lo},
            {"param_range", m.param_range}};
}

KRRSummaryModel krr_summary_from_json(const json& j) {
    require(j.at("type") == "krr_summary", "not a kernel ridge summary model");
    KRRSummaryModel m;
    m.pipeline = pipeline_from_json(j.at("pipeline"));
    m.cfg = kernel_from_json(j.at("kernel"));
    m.alpha = j.at("alpha").get<double>();
    m.jitter = j.at("jitter").get<double>();
    m.weights = matrix_from_json(j.at("weights"));
    for (const auto& s : j.at("train"))
        m.train.emplace_back(base64_decode_doubles(s.at("times").get<std::string>()),
                             base64_decode_doubles(s.at("values").get<std::string>()), s.at("dim").get<std::size_t>());
    require(static_cast<Eigen::Index>(m.train.size()) == m.weights.rows(), "weights do not match the training streams");
    m.param_lo = j.at("param_lo").get<std::vector<double>>();
    m.param_range = j.at("param_range").get<std::vector<double>>();
    return m;
}

}  // namespace sigabc
