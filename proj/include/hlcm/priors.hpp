#ifndef HLCM_PRIORS_HPP
#define HLCM_PRIORS_HPP

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "hlcm/model.hpp"
#include "hlcm/rng.hpp"

namespace hlcm {

/// Which prior governs the stratum CSMFs.
enum class PriorVariant {
    FixedEffect,           // time/age effects ~ N(0, 100)
    IndependentRE,         // time/age effects ~ N(0, sigma^2)
    RW1,                   // first-order random walk on time/age effects
    UnstructuredBaseline,  // pi_sta ~ Beta(1, 1) independently
    Unstratified,          // one pi shared by every record
    TimeOnly,              // RW1 over time only; sex/age moved into the symptoms
};

std::string_view variant_name(PriorVariant v);
/// Accepts fixed | indep | rw1 | unstructured | unstratified | time-only.
PriorVariant parse_variant(std::string_view name);

struct InvGamma {
    double shape = 1.0;
    double rate = 1.0;
};

struct PriorSpec {
    PriorVariant variant = PriorVariant::RW1;
    double fixed_effect_variance = 100.0;
    InvGamma independent{0.5, 0.0015};
    InvGamma random_walk{0.5, 0.0009};
    InvGamma epsilon{0.5, 0.5};

    void validate() const;
    /// True for the variants that sample pi through the logit-scale regression.
    bool uses_regression() const;
};

/// Layout of eta = (mu, alpha_male, alpha_time[1..T], alpha_age[1..A], eps[1..G]).
/// The time-only model drops the sex and age blocks and has G = T.
struct EtaLayout {
    GridDims grid;
    bool sex_effect = true;
    bool age_effect = true;

    static EtaLayout full(int times, int ages);
    static EtaLayout time_only(int times);

    int sex_index() const { return 1; }
    int time_offset() const { return sex_effect ? 2 : 1; }
    int age_offset() const { return time_offset() + grid.times; }
    int eps_offset() const { return age_offset() + (age_effect ? grid.ages : 0); }
    int size() const { return eps_offset() + grid.size(); }
};

/// 0/1 design matrix P with m = P eta, one row per stratum in flat order.
Eigen::MatrixXd build_design_matrix(const EtaLayout& layout);
Eigen::MatrixXd build_design_matrix(int times, int ages);

/// First-difference precision of an RW1 of length n, scaled by 1/sigma2, plus
/// 1/anchor_variance on the first diagonal entry.
Eigen::MatrixXd rw1_precision(int n, double sigma2, double anchor_variance);

/// Block-diagonal prior precision of eta. Rejects the variants that bypass eta.
Eigen::MatrixXd build_prior_precision(const PriorSpec& spec, const EtaLayout& layout,
                                      double sigma2_time, double sigma2_age, double sigma2_eps);

/// Conjugate Inverse-Gamma posteriors of the variance parameters.
InvGamma rw1_variance_posterior(std::span<const double> alpha, InvGamma prior);
InvGamma independent_variance_posterior(std::span<const double> alpha, InvGamma prior);
InvGamma epsilon_variance_posterior(std::span<const double> eps, int expected_length, InvGamma prior);

double sample_variance_rw1(std::span<const double> alpha, Rng& rng, InvGamma prior = {0.5, 0.0009});
double sample_variance_independent(std::span<const double> alpha, Rng& rng, InvGamma prior = {0.5, 0.0015});
double sample_variance_epsilon(std::span<const double> eps, int expected_length, Rng& rng,
                               InvGamma prior = {0.5, 0.5});

} // namespace hlcm

#endif
