#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sigabc/discrepancy.hpp"
#include "sigabc/sigkernel.hpp"
#include "sigabc/streams.hpp"

namespace sigabc {

/// Training pairs (stream, theta).  When param_lo/param_range are set the
/// regressions target (theta - lo) / range instead of theta.
struct TrainingSet {
    std::vector<TimeSeries> streams;
    std::vector<std::vector<double>> thetas;
    std::vector<double> param_lo;
    std::vector<double> param_range;

    void validate() const;
    std::size_t size() const { return streams.size(); }
    std::size_t param_dim() const { return thetas.empty() ? 0 : thetas.front().size(); }
    bool normalised() const { return !param_range.empty(); }
    /// R x p targets in regression space.
    Eigen::MatrixXd targets() const;
};

/// theta -> (theta - lo) / range, or the identity when no ranges are given.
std::vector<double> normalise_params(std::span<const double> theta, std::span<const double> lo,
                                     std::span<const double> range);
std::vector<double> denormalise_params(std::span<const double> z, std::span<const double> lo,
                                       std::span<const double> range);

/// values^1, ..., values^pmax concatenated (univariate input).
std::vector<double> power_features(const TimeSeries& ts, int pmax);

enum class FeatureMap { Powers, WoodSummaries };

/// Semi-automatic summaries s(x) = A g(x) + b fitted by ridge-jittered least squares.
struct LinearSummaryModel {
    FeatureMap map = FeatureMap::Powers;
    int pmax = 4;
    Eigen::MatrixXd A;          ///< p x J
    Eigen::VectorXd intercept;  ///< p
    std::vector<double> param_lo, param_range;

    std::vector<double> features(const TimeSeries& ts) const;
    /// Summary in regression (normalised) space.
    Eigen::VectorXd predict_normalised(const TimeSeries& ts) const;
};

LinearSummaryModel fit_linear_summary(const TrainingSet& train, FeatureMap map, int pmax = 4);

/// Signature kernel ridge regression summaries.
struct KRRSummaryModel {
    TransformPipeline pipeline;      ///< fitted; applied to every stream before the kernel
    std::vector<TimeSeries> train;   ///< transformed training streams
    Eigen::MatrixXd weights;         ///< R x p, columns solve (G + alpha I) w = psi
    SigKernelConfig cfg;
    double alpha = 0.0;
    double jitter = 0.0;             ///< diagonal jitter the solve needed on top of alpha
    std::vector<double> param_lo, param_range;

    Eigen::VectorXd predict_normalised(const TimeSeries& ts) const;
};

/**
 * Fits omega = (G + alpha I)^{-1} psi.  The pipeline's normalisation ranges are
 * fitted on the training streams when not already set.  The Cholesky solve is
 * tried without jitter first and then with 1e-10, 1e-9, ..., 1e-6 added to the
 * diagonal; NumericalError if all fail.
 */
KRRSummaryModel fit_krr_summary(const TrainingSet& train, const TransformPipeline& pipeline,
                                const SigKernelConfig& cfg, double alpha);

/// Same fit with the Gram matrix of the already transformed training streams supplied.
KRRSummaryModel fit_krr_summary_gram(std::vector<TimeSeries> transformed, const Eigen::MatrixXd& gram,
                                     const TrainingSet& train, const TransformPipeline& fitted,
                                     const SigKernelConfig& cfg, double alpha);

/// Solves (G + alpha I) W = Psi with the jitter escalation above; returns the jitter used.
double solve_regularised(const Eigen::MatrixXd& G, double alpha, const Eigen::MatrixXd& psi, Eigen::MatrixXd& W);

/// Summary in original parameter units.
std::vector<double> predict_summary(const LinearSummaryModel& m, const TimeSeries& ts);
std::vector<double> predict_summary(const KRRSummaryModel& m, const TimeSeries& ts);

struct CVResult {
    double alpha;
    double bandwidth;
    double mse;
};

/**
 * Grid search with `folds`-fold cross-validation over (alpha, RBF bandwidth).
 * Folds come from a seeded permutation.  The score is the mean over folds of the
 * validation MSE summed over parameter dimensions; ties prefer larger alpha,
 * then larger bandwidth.
 */
CVResult cross_validate_krr(const TrainingSet& train, const TransformPipeline& pipeline,
                            const SigKernelConfig& base, std::span<const double> alpha_grid,
                            std::span<const double> bandwidth_grid, std::size_t folds, std::uint64_t seed);

/// Squared Euclidean distance between normalised summaries of x and y.
DiscrepancyFn make_linear_summary_discrepancy(LinearSummaryModel model);
DiscrepancyFn make_krr_summary_discrepancy(KRRSummaryModel model);

nlohmann::json to_json(const LinearSummaryModel& m);
nlohmann::json to_json(const KRRSummaryModel& m);
LinearSummaryModel linear_summary_from_json(const nlohmann::json& j);
KRRSummaryModel krr_summary_from_json(const nlohmann::json& j);

}  // namespace sigabc
