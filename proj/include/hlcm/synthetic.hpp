#ifndef HLCM_SYNTHETIC_HPP
#define HLCM_SYNTHETIC_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "hlcm/model.hpp"
#include "hlcm/rng.hpp"

namespace hlcm {

/// Additive logit-scale trend of the true CSMF surface.
///
/// With u = (2t - T - 1)/(T - 1) and v = (2a - A - 1)/(A - 1), both in [-1, 1]:
/// logit pi_sta = intercept + time_linear*u + time_quadratic*u^2 + age_linear*v + age_quadratic*v^2.
/// The defaults rise then fall over time, increase with age and span roughly (0.17, 0.77).
struct TrendCoefficients {
    double intercept = 0.55;
    double time_linear = -0.3;
    double time_quadratic = -1.2;
    double age_linear = 0.65;
    double age_quadratic = 0.0;
};

/// pi grid over (2, T, A), identical for both sexes.
std::vector<double> generate_true_csmf(int times, int ages, const TrendCoefficients& coef = {});

/// Generating parameters of a synthetic population.
struct TrueModel {
    GridDims grid;
    int classes = 10;
    int symptoms = 10;
    std::vector<double> pi;            // per stratum
    std::vector<int> stratum_sizes;    // n_sta per stratum
    LatentClassParams latent;          // lambda and phi used to generate symptoms

    void validate() const;
};

/// Draw lambda and phi from the model's own priors (stick-breaking with
/// Gamma(a_omega, b_omega) concentration, Beta(a_phi, b_phi) response
/// probabilities) around the given pi surface.
TrueModel draw_true_model(GridDims grid, std::vector<double> pi, std::vector<int> stratum_sizes,
                          int classes, int symptoms, Rng& rng,
                          double a_phi = 1.0, double b_phi = 1.0, double a_omega = 1.0, double b_omega = 1.0);

/// Default truth: T = 10, A = 8, p = 10, K = 10, n_sta = 100, default trend,
/// latent parameters drawn under kDefaultTruthSeed.
inline constexpr std::uint64_t kDefaultTruthSeed = 20210401;
TrueModel default_true_model(int times = 10, int ages = 8, int symptoms = 10, int classes = 10,
                             int per_stratum = 100, std::uint64_t seed = kDefaultTruthSeed);

/// Every record verified with its generated cause; no missing symptoms.
Dataset generate_population(const TrueModel& model, Rng& rng);

enum class VerificationCase { Ignorable, CauseDependent };  // cases (i) and (ii)

struct VerificationMechanism {
    VerificationCase kind = VerificationCase::Ignorable;
    std::vector<double> time_effect;   // length T
    std::vector<double> age_effect;    // length A
    std::vector<double> symptom_effect;  // [T][A][p]
    int symptoms = 0;
    double cause_effect = 0.0;      // c1, applied when y = 1
    double noncause_effect = 0.0;   // c2, applied when y = 0
    std::vector<std::vector<int>> active_symptoms;  // S_t, 0-based

    double symptom_coef(int t, int a, int j) const {
        return symptom_effect[((t - 1) * age_effect.size() + (a - 1)) * symptoms + j];
    }
    void validate() const;
};

/// Time coefficients [1.2, 0.1, ..., 0.1, 1.2], age coefficients
/// [0.4, 0.4, -1.6, ..., -1.6, 0.4, 0.4], symptom coefficient 0.1 on three
/// random symptoms per time period; case (ii) draws c1 ~ Unif(-0.4, 0), c2 = -c1.
VerificationMechanism build_mechanism(int times, int ages, int symptoms, VerificationCase kind, Rng& rng);

/// P(L = 1 | x, a, t, y). Missing symptom entries contribute nothing.
double verification_probability(std::span<const std::int8_t> x, int age, int time, int cause,
                                const VerificationMechanism& mech);

/// A dataset whose unverified causes are masked, with the truth kept aside.
struct MaskedDataset {
    Dataset data;
    std::vector<int> true_causes;  // aligned with data.records()
};

/// Draw L for every record of a fully labelled dataset and mask unverified causes.
MaskedDataset apply_verification(const Dataset& labeled, const VerificationMechanism& mech, Rng& rng);

/// Stratified subsample: floor(fraction * n_sta) records per stratum, with the
/// cause-1 share matched to the full stratum to within one record.
Dataset resample_semisynthetic(const Dataset& labeled, double fraction, Rng& rng);

/// Per-stratum share of cause 1 in a fully labelled dataset (0 where empty).
std::vector<double> empirical_csmf(const Dataset& labeled);

} // namespace hlcm

#endif
