#ifndef HLCM_EVALUATION_HPP
#define HLCM_EVALUATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hlcm/gibbs.hpp"
#include "hlcm/model.hpp"

namespace hlcm {

/// Posterior mean with an equal-tailed interval.
struct IntervalSummary {
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::span<const double> samples, double q);
IntervalSummary summarize(std::span<const double> samples, double level = 0.95);
std::vector<IntervalSummary> summarize_columns(const Eigen::MatrixXd& draws, double level = 0.95);

struct CsmfEstimate {
    std::vector<IntervalSummary> strata;
    IntervalSummary overall;
    std::vector<IntervalSummary> by_time;  // NaN entries for periods with no records
};

/// pi_draws is draws x strata. Weights are stratum sizes n_sta.
Eigen::VectorXd aggregate_overall(const Eigen::MatrixXd& pi_draws, std::span<const int> sizes);
Eigen::MatrixXd aggregate_by_time(const Eigen::MatrixXd& pi_draws, const GridDims& grid, std::span<const int> sizes);
CsmfEstimate estimate_csmf(const Eigen::MatrixXd& pi_draws, const GridDims& grid, std::span<const int> sizes);

/// Overall and per-time truth aggregated the same way as the estimates.
double aggregate_truth(std::span<const double> truth, std::span<const int> sizes);
std::vector<double> aggregate_truth_by_time(std::span<const double> truth, const GridDims& grid,
                                            std::span<const int> sizes);

inline double bias(double estimate, double truth) { return estimate - truth; }

/// Empirical CRPS, E|X - x| - E|X - X'| / 2 over the sample, computed from
/// the sorted sample in O(M log M).
double crps(std::span<const double> samples, double truth);

/// CRPS(baseline) - CRPS(model); positive when the model is better.
double crps_improvement(std::span<const double> model, std::span<const double> baseline, double truth);

/// Matthews correlation of two binary columns over pairwise-complete rows.
/// Empty when a marginal count is zero. Throws with fewer than 2 complete pairs.
std::optional<double> mcc(std::span<const std::int8_t> a, std::span<const std::int8_t> b);
std::optional<double> mcc_from_counts(long tp, long fn, long fp, long tn);

/// Posterior-mean latent profiles with classes ordered per cause by ascending
/// expected symptom count sum_j phi_ckj. Ranks, classes and symptoms in the
/// cells are 1-based.
struct LatentProfileReport {
    struct PhiCell {
        int cause, rank, latent_class, symptom;
        double value;
    };
    struct LambdaCell {
        int cause, sex, time, age, rank, latent_class;
        double value;
    };
    std::vector<int> order[2];  // order[c][rank] = original class index
    std::vector<PhiCell> phi;
    std::vector<LambdaCell> lambda;
};

LatentProfileReport latent_profile_report(std::span<const double> phi_mean, std::span<const double> lambda_mean,
                                          int classes, int symptoms, const GridDims& working_grid);
LatentProfileReport latent_profile_report(const PosteriorDraws& draws);

/// Fraction of strata whose equal-tailed interval contains the truth.
double coverage(const Eigen::MatrixXd& pi_draws, std::span<const double> truth, double level = 0.95);

/// Standard error of the mean of a correlated series by non-overlapping batch means.
double batch_means_se(std::span<const double> series, int batches = 50);

} // namespace hlcm

#endif
