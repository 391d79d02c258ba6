#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigabc/discrepancy.hpp"
#include "sigabc/rng.hpp"
#include "sigabc/streams.hpp"

namespace sigabc {

using ParamVector = std::vector<double>;

struct UniformBox {
    std::vector<double> lo, hi;
};

/// Uniform on the MA(2) identifiability triangle, sampled by rejection from [-2,2] x [-1,1].
struct MA2Triangle {};

/// Independent Gamma(shape, rate) per dimension.
struct GammaPair {
    std::vector<double> shape, rate;
};

struct PriorSpec {
    std::variant<UniformBox, MA2Triangle, GammaPair> kind;

    void validate() const;
    std::size_t dim() const;
    bool bounded() const;
    bool contains(std::span<const double> theta) const;
    /// Log density up to nothing: exact, -inf outside the support.
    double log_density(std::span<const double> theta) const;
    /// Bounding box of the support (bounded priors only).
    std::vector<double> lower() const;
    std::vector<double> range() const;
    std::vector<double> mean() const;

    nlohmann::json to_json() const;
};

ParamVector sample_prior(const PriorSpec& prior, Rng& rng);

/// A simulator draws one series for theta from its own RNG stream.
using Simulator = std::function<TimeSeries(std::span<const double> theta, Rng& rng)>;

struct Particle {
    ParamVector theta;
    double loss;
    std::uint64_t seed;  ///< seed of the particle's RNG stream
    bool operator==(const Particle&) const = default;
};

struct AbcDiagnostics {
    std::size_t non_finite = 0;        ///< losses that were NaN or infinite
    std::size_t numerical_errors = 0;  ///< simulations or losses that threw NumericalError
};

struct ParticleSet {
    std::vector<Particle> particles;  ///< ascending by (loss, draw index)
    std::size_t n_total = 0;
    std::string fingerprint;
    AbcDiagnostics diagnostics;
};

/**
 * Rejection ABC: N prior draws, N simulations, keep the M smallest losses.
 *
 * Draw i uses the stream stream_seed(seed, Particle, i), so the result does not
 * depend on the thread count.  Non-finite losses and NumericalErrors count as
 * +inf; ties are broken by the draw index.
 */
ParticleSet rejection_abc(const PriorSpec& prior, const Simulator& simulator, const LossFn& loss,
                          std::size_t N, std::size_t M, std::uint64_t seed);
ParticleSet rejection_abc_serial(const PriorSpec& prior, const Simulator& simulator, const LossFn& loss,
                                 std::size_t N, std::size_t M, std::uint64_t seed);

/// Convenience overload binding the discrepancy to the observation first.
ParticleSet rejection_abc(const PriorSpec& prior, const Simulator& simulator, const DiscrepancyFn& rho,
                          const TimeSeries& observation, std::size_t N, std::size_t M, std::uint64_t seed);

ParamVector posterior_mean(const ParticleSet& ps);

/// `theta_1,...,theta_p,loss,seed` at 12 significant digits.
std::string particles_to_csv(const ParticleSet& ps);
ParticleSet particles_from_csv(const std::string& text);

}  // namespace sigabc
