#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigabc/abc.hpp"
#include "sigabc/discrepancy.hpp"
#include "sigabc/evaluate.hpp"
#include "sigabc/streams.hpp"

namespace sigabc {

enum class ModelKind { MA2, GBM, Ricker, GSE };

std::string to_string(ModelKind m);
ModelKind parse_model(const std::string& tag);

struct ReferenceSettings {
    std::size_t iters = 100000;     ///< MH / PMCMC iterations after the pilot
    std::size_t keep = 1000;        ///< thinned (or directly drawn) reference samples
    std::size_t pilot_iters = 5000;
    int particles = 200;            ///< PMCMC particle count
};

struct CVSettings {
    std::vector<double> alpha_grid{1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1};
    std::vector<double> bandwidth_scales{0.25, 0.5, 1.0, 2.0, 4.0};
    std::size_t folds = 5;
};

/**
 * Everything one experiment needs.  Read from a JSON object whose keys mirror
 * the field names; every key except "model" is optional and unknown keys are
 * rejected.  Defaults are the model's benchmark settings at desk scale.
 */
struct ExperimentConfig {
    ModelKind model = ModelKind::MA2;
    int T = 100;            ///< series length (ma2, gbm, ricker)
    double x0 = 10.0;       ///< gbm initial value
    double N0 = 1.0;        ///< ricker initial population
    int Z = 100;            ///< gse population
    double horizon = 50.0;  ///< gse observation window
    std::vector<double> theta;  ///< generating parameters for the observation
    std::vector<std::string> methods;
    std::size_t N = 10000;
    std::size_t M = 100;
    std::size_t R = 300;
    std::size_t pilot_runs = 100;
    std::size_t lambda_samples = 2000;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::uint64_t observation_seed = 0;
    int dyadic_order = 0;
    std::map<std::string, std::vector<std::string>> pipelines;  ///< per signature method
    ReferenceSettings reference;
    CVSettings cv;
    std::string output = "results";

    static ExperimentConfig defaults(ModelKind m);
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);

    void validate() const;
    nlohmann::json to_json() const;
    /// Digest of the canonical (key-sorted, defaults filled) JSON.
    std::string fingerprint() const;
    /// Digest of just the model, its settings and the prior: what a reference posterior depends on.
    std::string model_fingerprint() const;
};

PriorSpec model_prior(const ExperimentConfig& cfg);
Simulator model_simulator(const ExperimentConfig& cfg);
std::size_t param_dim(ModelKind m);

/// Length of the observation window in the units of the series' times.
double observation_horizon(const ExperimentConfig& cfg, const TimeSeries& obs);

TimeSeries simulate_observation(const ExperimentConfig& cfg, const std::vector<double>& theta, std::uint64_t seed);

enum class MethodKind { Signature, SignatureKRR, MMD, Wasserstein, SemiAutomatic };

struct Method {
    std::string name;
    MethodKind kind;
    std::vector<std::string> pipeline;  ///< signature methods only
};

/// Known names: sig, sig-leadlag, skrr, mmd, wass, sa.
Method resolve_method(const ExperimentConfig& cfg, const std::string& name);
std::vector<std::string> default_methods(ModelKind m);

struct BuiltDiscrepancy {
    DiscrepancyFn fn;
    nlohmann::json info;              ///< tuned hyperparameters, for the sidecar
    std::optional<nlohmann::json> model;  ///< fitted summary model, if any
};

/// Tunes and fits whatever the method needs using streams derived from `seed`.
BuiltDiscrepancy build_discrepancy(const ExperimentConfig& cfg, const Method& method, const TimeSeries& obs,
                                   std::uint64_t seed);

struct InferResult {
    ParticleSet particles;
    nlohmann::json sidecar;
};

InferResult run_infer(const ExperimentConfig& cfg, const Method& method, const TimeSeries& obs, std::uint64_t seed);

/// Reference posterior samples for the observation: MH (ma2, gbm), PMCMC (ricker) or exact draws (gse).
SampleSet run_reference(const ExperimentConfig& cfg, const TimeSeries& obs, std::uint64_t seed);

std::string observation_fingerprint(const TimeSeries& obs);

/// Path of the JSON sidecar next to a CSV output: same stem, .json extension.
std::string sidecar_path(const std::string& csv_path);

// --- subcommands ------------------------------------------------------------

struct CommandOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> n, m;
    std::string method;
    bool force = false;
    std::string observation;
    std::string particles;
    std::string reference;
    std::vector<double> theta;
};

void cmd_simulate(const CommandOptions& o);
void cmd_infer(const CommandOptions& o);
void cmd_reference(const CommandOptions& o);
void cmd_evaluate(const CommandOptions& o);
void cmd_sweep(const CommandOptions& o);

/// Evaluate two files and return the metrics object (what cmd_evaluate writes).
nlohmann::json evaluate_files(const std::string& particles, const std::string& reference, bool force);

}  // namespace sigabc
