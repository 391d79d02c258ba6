#include "sigabc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>

#include "sigabc/error.hpp"
#include "sigabc/mcmc.hpp"
#include "sigabc/models.hpp"
#include "sigabc/parallel.hpp"
#include "sigabc/summaries.hpp"
#include "sigabc/util.hpp"

namespace sigabc {

using detail::require;
using nlohmann::json;
namespace fs = std::filesystem;

// --- config -----------------------------------------------------------------

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::MA2: return "ma2";
        case ModelKind::GBM: return "gbm";
        case ModelKind::Ricker: return "ricker";
        case ModelKind::GSE: return "gse";
    }
    return "?";
}

ModelKind parse_model(const std::string& tag) {
    if (tag == "ma2") return ModelKind::MA2;
    if (tag == "gbm") return ModelKind::GBM;
    if (tag == "ricker") return ModelKind::Ricker;
    if (tag == "gse") return ModelKind::GSE;
    throw ValidationError("unknown model '" + tag + "' (expected ma2, gbm, ricker, gse)");
}

std::size_t param_dim(ModelKind m) { return m == ModelKind::Ricker ? 3 : 2; }

std::vector<std::string> default_methods(ModelKind m) {
    switch (m) {
        case ModelKind::MA2: return {"sig", "sig-leadlag", "skrr", "mmd", "wass", "sa"};
        case ModelKind::GBM:
        case ModelKind::Ricker: return {"sig", "skrr", "mmd", "wass", "sa"};
        case ModelKind::GSE: return {"sig", "wass"};
    }
    return {};
}

ExperimentConfig ExperimentConfig::defaults(ModelKind m) {
    ExperimentConfig c;
    c.model = m;
    c.methods = default_methods(m);
    switch (m) {
        case ModelKind::MA2:
            c.T = 100;
            c.theta = {0.6, 0.2};
            c.pipelines = {{"sig", {"time", "normalize", "basepoint"}},
                           {"sig-leadlag", {"leadlag", "time", "normalize", "basepoint"}},
                           {"skrr", {"time", "normalize", "basepoint"}}};
            break;
        case ModelKind::GBM:
            c.T = 100;
            c.theta = {0.2, 0.5};
            c.pipelines = {{"sig", {"time", "normalize", "basepoint"}},
                           {"sig-leadlag", {"leadlag", "time", "normalize", "basepoint"}},
                           {"skrr", {"time", "normalize", "basepoint"}}};
            break;
        case ModelKind::Ricker:
            c.T = 50;
            c.theta = {4.0, 10.0, 0.3};
            c.reference.iters = 20000;
            c.pipelines = {{"sig", {"cumsum", "time", "normalize", "basepoint"}},
                           {"sig-leadlag", {"cumsum", "leadlag", "time", "normalize", "basepoint"}},
                           {"skrr", {"cumsum", "time", "normalize", "basepoint"}}};
            break;
        case ModelKind::GSE:
            c.theta = {1e-2, 1e-1};
            c.pipelines = {{"sig", {"time"}}, {"sig-leadlag", {"leadlag", "time"}}, {"skrr", {"time"}}};
            break;
    }
    return c;
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& dst) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config key '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    require(j.is_object(), where + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        require(known.count(k) > 0, "unknown config key '" + k + "' in " + where);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    reject_unknown(j,
                   {"model", "T", "x0", "N0", "Z", "horizon", "theta", "methods", "N", "M", "R", "pilot_runs",
                    "lambda_samples", "seeds", "observation_seed", "dyadic_order", "pipelines", "reference", "cv",
                    "output"},
                   "config");
    require(j.contains("model") && j.at("model").is_string(), "config needs a string 'model'");
    ExperimentConfig c = defaults(parse_model(j.at("model").get<std::string>()));
    take(j, "T", c.T);
    take(j, "x0", c.x0);
    take(j, "N0", c.N0);
    take(j, "Z", c.Z);
    take(j, "horizon", c.horizon);
    take(j, "theta", c.theta);
    take(j, "methods", c.methods);
    take(j, "N", c.N);
    take(j, "M", c.M);
    take(j, "R", c.R);
    take(j, "pilot_runs", c.pilot_runs);
    take(j, "lambda_samples", c.lambda_samples);
    take(j, "seeds", c.seeds);
    take(j, "observation_seed", c.observation_seed);
    take(j, "dyadic_order", c.dyadic_order);
    take(j, "output", c.output);
    if (j.contains("pipelines")) {
        reject_unknown(j.at("pipelines"), {"sig", "sig-leadlag", "skrr"}, "pipelines");
        for (const auto& [k, v] : j.at("pipelines").items()) take(j.at("pipelines"), k.c_str(), c.pipelines[k]);
    }
    if (j.contains("reference")) {
        const json& r = j.at("reference");
        reject_unknown(r, {"iters", "keep", "pilot_iters", "particles"}, "reference");
        take(r, "iters", c.reference.iters);
        take(r, "keep", c.reference.keep);
        take(r, "pilot_iters", c.reference.pilot_iters);
        take(r, "particles", c.reference.particles);
    }
    if (j.contains("cv")) {
        const json& r = j.at("cv");
        reject_unknown(r, {"alpha_grid", "bandwidth_scales", "folds"}, "cv");
        take(r, "alpha_grid", c.cv.alpha_grid);
        take(r, "bandwidth_scales", c.cv.bandwidth_scales);
        take(r, "folds", c.cv.folds);
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

void ExperimentConfig::validate() const {
    require(theta.size() == param_dim(model), "theta must have " + std::to_string(param_dim(model)) + " entries for " +
                                                  to_string(model));
    require(T >= 2 || model == ModelKind::GSE, "T must be at least 2");
    require(x0 > 0.0 && N0 > 0.0, "x0 and N0 must be positive");
    require(Z >= 2 && horizon > 0.0, "Z must be at least 2 and horizon positive");
    require(N >= 2 && M >= 1 && M < N, "budgets need 1 <= M < N");
    require(R >= cv.folds && R >= 2, "training size R must be at least the number of CV folds");
    require(pilot_runs >= 1 && lambda_samples >= 1, "pilot_runs and lambda_samples must be positive");
    require(!seeds.empty(), "seeds list must be non-empty");
    require(!methods.empty(), "methods list must be non-empty");
    require(dyadic_order >= 0 && dyadic_order <= 6, "dyadic_order must be in [0, 6]");
    require(reference.keep >= 1 && reference.keep <= reference.iters, "reference.keep must be in [1, iters]");
    require(reference.pilot_iters >= 20 && reference.particles >= 2, "reference pilot and particles too small");
    require(!cv.alpha_grid.empty() && !cv.bandwidth_scales.empty() && cv.folds >= 2, "cv grids must be non-empty");
    for (double a : cv.alpha_grid) require(a >= 0.0, "cv alphas must be non-negative");
    for (double s : cv.bandwidth_scales) require(s > 0.0, "cv bandwidth scales must be positive");
    for (const auto& [k, tags] : pipelines) TransformPipeline::parse(tags);
    model_prior(*this).validate();
    for (const auto& m : methods) resolve_method(*this, m);
}

json ExperimentConfig::to_json() const {
    json pipes = json::object();
    for (const auto& [k, v] : pipelines) pipes[k] = v;
    return {{"model", sigabc::to_string(model)},
            {"T", T},
            {"x0", x0},
            {"N0", N0},
            {"Z", Z},
            {"horizon", horizon},
            {"theta", theta},
            {"methods", methods},
            {"N", N},
            {"M", M},
            {"R", R},
            {"pilot_runs", pilot_runs},
            {"lambda_samples", lambda_samples},
            {"seeds", seeds},
            {"observation_seed", observation_seed},
            {"dyadic_order", dyadic_order},
            {"pipelines", pipes},
            {"reference",
             {{"iters", reference.iters}, {"keep", reference.keep}, {"pilot_iters", reference.pilot_iters},
              {"particles", reference.particles}}},
            {"cv", {{"alpha_grid", cv.alpha_grid}, {"bandwidth_scales", cv.bandwidth_scales}, {"folds", cv.folds}}},
            {"output", output}};
}

std::string ExperimentConfig::fingerprint() const {
    json j = to_json();
    j.erase("output");  // where results go does not change them
    return sigabc::fingerprint(j.dump());
}

std::string ExperimentConfig::model_fingerprint() const {
    const json j = {{"model", sigabc::to_string(model)}, {"T", T},   {"x0", x0},
                    {"N0", N0},                          {"Z", Z},   {"horizon", horizon},
                    {"prior", model_prior(*this).to_json()}};
    return sigabc::fingerprint(j.dump());
}

// --- models -----------------------------------------------------------------

PriorSpec model_prior(const ExperimentConfig& cfg) {
    switch (cfg.model) {
        case ModelKind::MA2: return {MA2Triangle{}};
        case ModelKind::GBM: return {UniformBox{{-1.0, 0.2}, {1.0, 2.0}}};
        case ModelKind::Ricker: return {UniformBox{{3.0, 0.0, 0.0}, {8.0, 20.0, 0.6}}};
        case ModelKind::GSE: return {GammaPair{{0.1, 0.2}, {2.0, 0.5}}};
    }
    throw ValidationError("unknown model");
}

Simulator model_simulator(const ExperimentConfig& cfg) {
    const int T = cfg.T;
    switch (cfg.model) {
        case ModelKind::MA2:
            return [T](std::span<const double> th, Rng& rng) { return simulate_ma2({th[0], th[1]}, T, rng); };
        case ModelKind::GBM:
            return [T, x0 = cfg.x0](std::span<const double> th, Rng& rng) {
                return simulate_gbm({th[0], th[1]}, x0, T, rng);
            };
        case ModelKind::Ricker:
            return [T, N0 = cfg.N0](std::span<const double> th, Rng& rng) {
                return simulate_ricker({th[0], th[1], th[2]}, T, N0, rng);
            };
        case ModelKind::GSE:
            return [Z = cfg.Z, H = cfg.horizon](std::span<const double> th, Rng& rng) {
                return gse_observation(simulate_gse({th[0], th[1]}, Z, H, rng));
            };
    }
    throw ValidationError("unknown model");
}

double observation_horizon(const ExperimentConfig& cfg, const TimeSeries& obs) {
    if (cfg.model == ModelKind::GSE) return 1.0;  // times are already divided by the window length
    const double h = obs.time(obs.size() - 1) - obs.time(0);
    require(h > 0.0, "observation spans no time");
    return h;
}

TimeSeries simulate_observation(const ExperimentConfig& cfg, const std::vector<double>& theta, std::uint64_t seed) {
    require(theta.size() == param_dim(cfg.model), "theta has the wrong dimension for " + to_string(cfg.model));
    require(model_prior(cfg).contains(theta), "theta lies outside the prior support of " + to_string(cfg.model));
    Rng rng = make_stream(seed, StreamPurpose::Observation, 0);
    return model_simulator(cfg)(theta, rng);
}

std::string observation_fingerprint(const TimeSeries& obs) { return fingerprint(to_csv(obs)); }

std::string sidecar_path(const std::string& csv_path) {
    fs::path p(csv_path);
    p.replace_extension(".json");
    return p.string();
}

// --- methods ----------------------------------------------------------------

Method resolve_method(const ExperimentConfig& cfg, const std::string& name) {
    auto pipeline_for = [&](const std::string& key) {
        auto it = cfg.pipelines.find(key);
        require(it != cfg.pipelines.end(), "no pipeline configured for method '" + key + "'");
        return it->second;
    };
    if (name == "sig" || name == "sig-leadlag") return {name, MethodKind::Signature, pipeline_for(name)};
    if (name == "skrr") return {name, MethodKind::SignatureKRR, pipeline_for(name)};
    if (name == "mmd") return {name, MethodKind::MMD, {}};
    if (name == "wass") return {name, MethodKind::Wasserstein, {}};
    if (name == "sa") {
        require(cfg.model != ModelKind::GSE, "semi-automatic ABC needs fixed-length univariate series; not available for gse");
        return {name, MethodKind::SemiAutomatic, {}};
    }
    throw ValidationError("unknown method '" + name + "' (expected sig, sig-leadlag, skrr, mmd, wass, sa)");
}

namespace {

/// Prior-predictive draws on stream `purpose`, computed in parallel into fixed slots.
void prior_predictive(const ExperimentConfig& cfg, std::size_t count, std::uint64_t seed, StreamPurpose purpose,
                      std::vector<ParamVector>& thetas, std::vector<TimeSeries>& streams) {
    const PriorSpec prior = model_prior(cfg);
    const Simulator sim = model_simulator(cfg);
    std::vector<std::optional<TimeSeries>> out(count);
    thetas.assign(count, {});
    parallel_for(count, [&](std::size_t i) {
        Rng rng = make_stream(seed, purpose, i);
        // Redraw on numerical failure so the set always has `count` members.
        for (int attempt = 0; attempt < 100 && !out[i]; ++attempt) {
            thetas[i] = sample_prior(prior, rng);
            try {
                out[i] = sim(thetas[i], rng);
            } catch (const NumericalError&) {
            }
        }
        if (!out[i]) throw NumericalError("prior-predictive simulation keeps failing");
    });
    streams.clear();
    streams.reserve(count);
    for (auto& s : out) streams.push_back(std::move(*s));
}

TrainingSet training_set(const ExperimentConfig& cfg, std::uint64_t seed) {
    TrainingSet t;
    prior_predictive(cfg, cfg.R, seed, StreamPurpose::Training, t.thetas, t.streams);
    const PriorSpec prior = model_prior(cfg);
    if (prior.bounded()) {
        t.param_lo = prior.lower();
        t.param_range = prior.range();
    }
    return t;
}

}  // namespace

BuiltDiscrepancy build_discrepancy(const ExperimentConfig& cfg, const Method& method, const TimeSeries& obs,
                                   std::uint64_t seed) {
    BuiltDiscrepancy out;
    switch (method.kind) {
        case MethodKind::Signature: {
            TransformPipeline pipe = TransformPipeline::parse(method.pipeline);
            if (!pipe.fitted()) {
                std::vector<ParamVector> th;
                std::vector<TimeSeries> pilot;
                prior_predictive(cfg, cfg.pilot_runs, seed, StreamPurpose::Pilot, th, pilot);
                pipe = pipe.fit_ranges(pilot);
            }
            const double bw = median_pairwise_distance(pipe.apply(obs));
            if (!(bw > 0.0)) throw NumericalError("observation is constant after the pipeline; no RBF bandwidth");
            SigKernelConfig kc{StaticKernelSpec::rbf(bw), cfg.dyadic_order};
            out.fn = make_sig_discrepancy(pipe, kc);
            out.info = {{"bandwidth", bw}};
            std::vector<json> ranges;
            for (const auto& s : pipe.steps())
                if (!s.range.empty()) ranges.emplace_back(s.range);
            out.info["normalisation_ranges"] = ranges;
            break;
        }
        case MethodKind::SignatureKRR: {
            const TrainingSet train = training_set(cfg, seed);
            const TransformPipeline pipe = TransformPipeline::parse(method.pipeline).fit_ranges(train.streams);
            const double base = median_pairwise_distance(pipe.apply(obs));
            if (!(base > 0.0)) throw NumericalError("observation is constant after the pipeline; no RBF bandwidth");
            std::vector<double> bws;
            for (double s : cfg.cv.bandwidth_scales) bws.push_back(s * base);
            SigKernelConfig kc{StaticKernelSpec::rbf(base), cfg.dyadic_order};
            const CVResult cv = cross_validate_krr(train, pipe, kc, cfg.cv.alpha_grid, bws, cfg.cv.folds, seed);
            kc.static_kernel = StaticKernelSpec::rbf(cv.bandwidth);
            KRRSummaryModel model = fit_krr_summary(train, pipe, kc, cv.alpha);
            out.info = {{"alpha", cv.alpha}, {"bandwidth", cv.bandwidth}, {"cv_mse", cv.mse}, {"jitter", model.jitter}};
            out.model = to_json(model);
            out.fn = make_krr_summary_discrepancy(std::move(model));
            break;
        }
        case MethodKind::MMD: {
            const double bw = median_abs_difference(obs);
            if (!(bw > 0.0)) throw NumericalError("observation values are all equal; no MMD bandwidth");
            out.fn = make_mmd_discrepancy(StaticKernelSpec::rbf(bw));
            out.info = {{"bandwidth", bw}};
            break;
        }
        case MethodKind::Wasserstein: {
            std::vector<ParamVector> th;
            std::vector<TimeSeries> sims;
            prior_predictive(cfg, cfg.lambda_samples, seed, StreamPurpose::Lambda, th, sims);
            double V = 0.0;
            for (const auto& s : sims) V += vertical_range(s);
            V /= static_cast<double>(sims.size());
            const double lambda = lambda_heuristic(V, observation_horizon(cfg, obs));
            out.fn = make_wasserstein_discrepancy(lambda, 1);
            out.info = {{"lambda", lambda}, {"V", V}};
            break;
        }
        case MethodKind::SemiAutomatic: {
            const TrainingSet train = training_set(cfg, seed);
            const FeatureMap map = cfg.model == ModelKind::Ricker ? FeatureMap::WoodSummaries : FeatureMap::Powers;
            LinearSummaryModel model = fit_linear_summary(train, map, 4);
            out.model = to_json(model);
            out.info = {{"features", map == FeatureMap::Powers ? "powers" : "wood"}};
            out.fn = make_linear_summary_discrepancy(std::move(model));
            break;
        }
    }
    return out;
}

InferResult run_infer(const ExperimentConfig& cfg, const Method& method, const TimeSeries& obs, std::uint64_t seed) {
    BuiltDiscrepancy d = build_discrepancy(cfg, method, obs, seed);
    InferResult r;
    r.particles = rejection_abc(model_prior(cfg), model_simulator(cfg), d.fn, obs, cfg.N, cfg.M, seed);
    r.particles.fingerprint = cfg.fingerprint();
    r.sidecar = {{"kind", "particles"},
                 {"method", method.name},
                 {"seed", seed},
                 {"N", cfg.N},
                 {"M", cfg.M},
                 {"config_fingerprint", cfg.fingerprint()},
                 {"model_fingerprint", cfg.model_fingerprint()},
                 {"observation_fingerprint", observation_fingerprint(obs)},
                 {"discrepancy", d.fn.config},
                 {"tuning", d.info},
                 {"diagnostics",
                  {{"non_finite", r.particles.diagnostics.non_finite},
                   {"numerical_errors", r.particles.diagnostics.numerical_errors}}},
                 {"config", cfg.to_json()}};
    if (d.model) r.sidecar["summary_model_fingerprint"] = fingerprint(d.model->dump());
    return r;
}

SampleSet run_reference(const ExperimentConfig& cfg, const TimeSeries& obs, std::uint64_t seed) {
    const PriorSpec prior = model_prior(cfg);
    const auto& rs = cfg.reference;
    switch (cfg.model) {
        case ModelKind::MA2: {
            auto ll = [&obs](std::span<const double> th) { return ma2_log_likelihood({th[0], th[1]}, obs); };
            return to_sample_set(thin(tuned_mh(prior, ll, rs.iters, seed, {rs.pilot_iters, 0.1}), rs.keep));
        }
        case ModelKind::GBM: {
            auto ll = [&obs](std::span<const double> th) { return gbm_log_likelihood({th[0], th[1]}, obs); };
            return to_sample_set(thin(tuned_mh(prior, ll, rs.iters, seed, {rs.pilot_iters, 0.1}), rs.keep));
        }
        case ModelKind::Ricker: {
            if (rs.iters < 200000)
                std::cerr << "note: PMCMC reference runs " << rs.iters
                          << " iterations; the full-scale protocol uses 200000\n";
            PmcmcOptions opt;
            opt.pilot_iters = rs.pilot_iters;
            opt.N0 = cfg.N0;
            return to_sample_set(thin(pmcmc(prior, obs, rs.iters, rs.particles, seed, opt), rs.keep));
        }
        case ModelKind::GSE: {
            const GSETrajectory tr = gse_trajectory_from_observation(obs, cfg.Z, cfg.horizon);
            const GSEHyper h;
            Rng rng = make_stream(seed, StreamPurpose::Reference, 0);
            SampleSet S(static_cast<Eigen::Index>(rs.keep), 2);
            for (Eigen::Index i = 0; i < S.rows(); ++i) {
                const auto [b, g] = gse_exact_posterior_sample(tr, h, rng);
                S(i, 0) = b;
                S(i, 1) = g;
            }
            return S;
        }
    }
    throw ValidationError("unknown model");
}

// --- subcommands ------------------------------------------------------------

namespace {

ExperimentConfig load_config(const CommandOptions& o) {
    require(!o.config_path.empty(), "--config is required");
    ExperimentConfig cfg = ExperimentConfig::load(o.config_path);
    if (o.n) cfg.N = *o.n;
    if (o.m) cfg.M = *o.m;
    cfg.validate();
    return cfg;
}

void ensure_parent(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void write_json(const std::string& path, const json& j) {
    ensure_parent(path);
    write_file(path, j.dump(2) + "\n");
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path + " is not valid JSON: " + e.what());
    }
}

std::string pick(const std::string& v, const std::string& dflt) { return v.empty() ? dflt : v; }

void write_observation(const ExperimentConfig& cfg, const TimeSeries& obs, const std::vector<double>& theta,
                       std::uint64_t seed, const std::string& path) {
    ensure_parent(path);
    write_csv(obs, path);
    write_json(sidecar_path(path), {{"kind", "observation"},
                                    {"model", to_string(cfg.model)},
                                    {"theta", theta},
                                    {"seed", seed},
                                    {"model_fingerprint", cfg.model_fingerprint()},
                                    {"observation_fingerprint", observation_fingerprint(obs)}});
}

void write_particles(const InferResult& r, const std::string& path) {
    ensure_parent(path);
    write_file(path, particles_to_csv(r.particles));
    write_json(sidecar_path(path), r.sidecar);
}

void write_reference(const ExperimentConfig& cfg, const TimeSeries& obs, const SampleSet& S, std::uint64_t seed,
                     const std::string& path) {
    ensure_parent(path);
    write_file(path, samples_to_csv(S));
    const char* method = cfg.model == ModelKind::GSE ? "exact" : (cfg.model == ModelKind::Ricker ? "pmcmc" : "mh");
    json ref = {{"iters", cfg.reference.iters}, {"keep", cfg.reference.keep}, {"pilot_iters", cfg.reference.pilot_iters}};
    if (cfg.model == ModelKind::Ricker) ref["particles"] = cfg.reference.particles;
    write_json(sidecar_path(path), {{"kind", "reference"},
                                    {"method", method},
                                    {"seed", seed},
                                    {"settings", ref},
                                    {"model_fingerprint", cfg.model_fingerprint()},
                                    {"observation_fingerprint", observation_fingerprint(obs)}});
}

}  // namespace

void cmd_simulate(const CommandOptions& o) {
    const ExperimentConfig cfg = load_config(o);
    const std::vector<double> theta = o.theta.empty() ? cfg.theta : o.theta;
    const std::uint64_t seed = o.seed.value_or(cfg.observation_seed);
    const std::string out = pick(o.out, "observation.csv");
    if (cfg.model == ModelKind::GSE) {
        require(theta.size() == 2, "gse theta needs two entries");
        require(model_prior(cfg).contains(theta), "theta lies outside the prior support of gse");
        Rng rng = make_stream(seed, StreamPurpose::Observation, 0);
        const GSETrajectory tr = simulate_gse({theta[0], theta[1]}, cfg.Z, cfg.horizon, rng);
        write_observation(cfg, gse_observation(tr), theta, seed, out);
        fs::path ev(out);
        ev.replace_filename(ev.stem().string() + "_events.csv");
        write_file(ev.string(), gse_events_csv(tr));
        return;
    }
    write_observation(cfg, simulate_observation(cfg, theta, seed), theta, seed, out);
}

void cmd_infer(const CommandOptions& o) {
    const ExperimentConfig cfg = load_config(o);
    require(!o.observation.empty(), "--observation is required");
    require(!o.method.empty(), "--method is required");
    const TimeSeries obs = read_csv(o.observation);
    const std::string obs_meta = sidecar_path(o.observation);
    if (fs::exists(obs_meta) && !o.force) {
        const json meta = read_json(obs_meta);
        if (meta.contains("model_fingerprint"))
            require(meta.at("model_fingerprint") == cfg.model_fingerprint(),
                    "observation was simulated under a different model configuration (use --force to override)");
    }
    const Method method = resolve_method(cfg, o.method);
    const InferResult r = run_infer(cfg, method, obs, o.seed.value_or(cfg.seeds.front()));
    write_particles(r, pick(o.out, "particles.csv"));
}

void cmd_reference(const CommandOptions& o) {
    const ExperimentConfig cfg = load_config(o);
    require(!o.observation.empty(), "--observation is required");
    const TimeSeries obs = read_csv(o.observation);
    const std::uint64_t seed = o.seed.value_or(cfg.observation_seed);
    write_reference(cfg, obs, run_reference(cfg, obs, seed), seed, pick(o.out, "reference.csv"));
}

json evaluate_files(const std::string& particles, const std::string& reference, bool force) {
    const SampleSet A = samples_from_csv(read_file(particles));
    const SampleSet B = samples_from_csv(read_file(reference));
    const json pa = fs::exists(sidecar_path(particles)) ? read_json(sidecar_path(particles)) : json::object();
    const json pb = fs::exists(sidecar_path(reference)) ? read_json(sidecar_path(reference)) : json::object();
    for (const char* key : {"model_fingerprint", "observation_fingerprint"}) {
        const bool both = pa.contains(key) && pb.contains(key);
        if (!force) {
            require(both, std::string("missing ") + key + " in a sidecar (use --force to evaluate anyway)");
            require(pa.at(key) == pb.at(key), std::string(key) + " differs between particles and reference "
                                                                  "(use --force to evaluate anyway)");
        }
    }
    json m = {{"mmd2", mmd2_between_posteriors(A, B)},
              {"sq_dist_means", sq_dist_means(A, B)},
              {"M", A.rows()},
              {"reference_size", B.rows()}};
    for (const char* key : {"config_fingerprint", "model_fingerprint", "observation_fingerprint", "method", "seed"})
        if (pa.contains(key)) m[key] = pa.at(key);
    if (pb.contains("model_fingerprint")) m["reference_model_fingerprint"] = pb.at("model_fingerprint");
    return m;
}

void cmd_evaluate(const CommandOptions& o) {
    require(!o.particles.empty() && !o.reference.empty(), "--particles and --reference are required");
    write_json(pick(o.out, "metrics.json"), evaluate_files(o.particles, o.reference, o.force));
}

void cmd_sweep(const CommandOptions& o) {
    ExperimentConfig cfg = load_config(o);
    if (!o.method.empty()) {
        std::vector<std::string> ms;
        std::size_t s = 0;
        while (true) {
            const std::size_t c = o.method.find(',', s);
            ms.push_back(o.method.substr(s, c == std::string::npos ? std::string::npos : c - s));
            if (c == std::string::npos) break;
            s = c + 1;
        }
        cfg.methods = ms;
    }
    if (o.seed) cfg.seeds = {*o.seed};
    cfg.validate();
    const fs::path dir = pick(o.out, cfg.output);
    fs::create_directories(dir);

    const TimeSeries obs = simulate_observation(cfg, cfg.theta, cfg.observation_seed);
    const std::string obs_path = (dir / "observation.csv").string();
    write_observation(cfg, obs, cfg.theta, cfg.observation_seed, obs_path);

    const std::string ref_path = (dir / "reference.csv").string();
    bool have_ref = false;
    if (fs::exists(ref_path) && fs::exists(sidecar_path(ref_path))) {
        const json meta = read_json(sidecar_path(ref_path));
        have_ref = meta.value("model_fingerprint", "") == cfg.model_fingerprint() &&
                   meta.value("observation_fingerprint", "") == observation_fingerprint(obs) &&
                   meta.contains("settings") && meta["settings"].value("iters", std::size_t{0}) == cfg.reference.iters &&
                   meta["settings"].value("keep", std::size_t{0}) == cfg.reference.keep;
    }
    if (!have_ref) {
        std::cerr << "[sweep] reference posterior for " << to_string(cfg.model) << "\n";
        write_reference(cfg, obs, run_reference(cfg, obs, cfg.observation_seed), cfg.observation_seed, ref_path);
    }

    std::string table = "method,seed,mmd2,sq_dist_means\n";
    for (const auto& name : cfg.methods) {
        const Method method = resolve_method(cfg, name);
        for (std::uint64_t seed : cfg.seeds) {
            const std::string tag = name + "_" + std::to_string(seed);
            const std::string metrics_path = (dir / ("metrics_" + tag + ".json")).string();
            if (!fs::exists(metrics_path)) {
                try {
                    std::cerr << "[sweep] " << name << " seed " << seed << "\n";
                    const std::string part_path = (dir / ("particles_" + tag + ".csv")).string();
                    write_particles(run_infer(cfg, method, obs, seed), part_path);
                    write_json(metrics_path, evaluate_files(part_path, ref_path, false));
                } catch (const std::exception& e) {
                    std::cerr << "[sweep] failed at method " << name << ", seed " << seed << ": " << e.what()
                              << "\n[sweep] completed results are kept in " << dir.string() << "\n";
                    throw;
                }
            }
            const json m = read_json(metrics_path);
            table += name + "," + std::to_string(seed) + "," + format_g12(m.at("mmd2").get<double>()) + "," +
                     format_g12(m.at("sq_dist_means").get<double>()) + "\n";
        }
    }
    write_file((dir / "results.csv").string(), table);
}

}  // namespace sigabc
