#ifndef HLCM_GIBBS_HPP
#define HLCM_GIBBS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hlcm/model.hpp"
#include "hlcm/priors.hpp"
#include "hlcm/rng.hpp"

namespace hlcm {

/// Beta and Gamma hyperparameters of the latent class layer.
struct LatentHyper {
    double a_phi = 1.0;
    double b_phi = 1.0;
    double a_omega = 1.0;
    double b_omega = 1.0;

    void validate() const;
};

struct ChainConfig {
    int iterations = 8000;
    int burn_in = 3000;
    int classes = 10;
    int thinning = 1;
    std::uint64_t seed = 1;
    int chains = 1;
    /// Store phi and lambda for every retained draw. Posterior means are
    /// accumulated either way.
    bool keep_latent_draws = true;
    LatentHyper hyper;

    void validate() const;
    int retained_per_chain() const { return (iterations - burn_in) / thinning; }
};

/// One retained iteration. pi is on the dataset's full (sex, time, age) grid;
/// eta, phi and lambda live on the variant's working grid.
struct Draw {
    int chain = 0;
    int iteration = 0;
    std::vector<double> pi;
    std::vector<double> eta;
    double sigma2_time = 0.0;
    double sigma2_age = 0.0;
    double sigma2_eps = 0.0;
    std::vector<double> phi;     // [cause][class][symptom]
    std::vector<double> lambda;  // [cause][working stratum][class]
};

struct PosteriorDraws {
    PriorVariant variant = PriorVariant::RW1;
    GridDims grid;          // dataset grid; pi is reported here
    GridDims working_grid;  // grid the latent class weights are stratified over
    int classes = 1;
    int symptoms = 0;       // working symptom count (time-only adds dummies)
    std::vector<std::string> symptom_names;
    std::vector<int> stratum_counts;  // n_sta on the dataset grid
    int chains = 1;
    std::vector<Draw> draws;
    std::vector<double> phi_mean;
    std::vector<double> lambda_mean;
    std::vector<std::string> warnings;

    /// Draws x strata matrix of pi.
    Eigen::MatrixXd pi_matrix() const;
};

// --- single-step conditionals -------------------------------------------

/// P(Y = 1 | x, stratum) for an unverified record.
double cause_probability(std::span<const std::int8_t> x, int stratum,
                         const LatentClassParams& params, double pi);
int sample_cause(std::span<const std::int8_t> x, int stratum, const LatentClassParams& params,
                 double pi, Rng& rng);
/// Class index in [0, K).
int sample_latent_class(std::span<const std::int8_t> x, int cause, int stratum,
                        const LatentClassParams& params, Rng& rng);

/// Polya-Gamma augmented draw of eta given per-stratum successes z and totals
/// n. Strata with n = 0 contribute nothing to the likelihood.
Eigen::VectorXd sample_eta(std::span<const int> z, std::span<const int> n, const Eigen::MatrixXd& P,
                           const Eigen::MatrixXd& prior_precision, const Eigen::VectorXd& eta, Rng& rng);

/// Success/failure counts of each (cause, class, symptom) cell over observed entries.
struct PhiCounts {
    int classes = 1;
    int symptoms = 0;
    std::vector<int> ones;
    std::vector<int> zeros;

    PhiCounts(int K, int p) : classes(K), symptoms(p), ones(2 * K * p, 0), zeros(2 * K * p, 0) {}
    int index(int c, int k, int j) const { return (c * classes + k) * symptoms + j; }
};

/// phi_ckj ~ Beta(a + ones, b + zeros), written into params.phi.
void sample_phi(const PhiCounts& counts, double a_phi, double b_phi, Rng& rng, LatentClassParams& params);

/// Sticks for one (cause, stratum) from its per-class counts; the last stick is 1.
std::vector<double> sample_sticks(std::span<const int> class_counts, double concentration, Rng& rng);

/// Gamma(a + K - 1, b - sum_{k<K} log(1 - V_k)).
double sample_sb_concentration(std::span<const double> sticks, double a_omega, double b_omega, Rng& rng);

/// Independent Beta(1 + z, 1 + n - z) draws.
std::vector<double> sample_pi_unstructured(std::span<const int> z, std::span<const int> n, Rng& rng);
/// One Beta(1 + sum z, 1 + sum (n - z)) draw shared by every stratum.
double sample_pi_pooled(std::span<const int> z, std::span<const int> n, Rng& rng);

// --- the sampler ---------------------------------------------------------

/// One Gibbs chain over a dataset.
///
/// Each sweep runs, in order: unverified causes, latent classes, pi (through
/// eta or conjugate Beta draws), phi, sticks, stick-breaking concentrations,
/// effect variances and the interaction variance. Steps the variant does not
/// use are skipped.
class GibbsSampler {
public:
    GibbsSampler(const Dataset& data, const PriorSpec& prior, int classes, LatentHyper hyper = {});

    void initialize(Rng& rng);
    void sweep(Rng& rng);

    const ModelState& state() const { return state_; }
    ModelState& mutable_state() { return state_; }

    const GridDims& working_grid() const { return working_grid_; }
    const EtaLayout& eta_layout() const { return layout_; }
    const Eigen::MatrixXd& design() const { return design_; }
    int working_symptoms() const { return symptoms_; }
    const std::vector<std::string>& working_symptom_names() const { return symptom_names_; }
    std::size_t num_records() const { return stratum_.size(); }
    int record_stratum(std::size_t i) const { return stratum_[i]; }
    bool record_verified(std::size_t i) const { return verified_[i] != 0; }
    std::span<const std::int8_t> record_symptoms(std::size_t i) const {
        return {symptoms_matrix_.data() + i * symptoms_, static_cast<std::size_t>(symptoms_)};
    }

    /// pi mapped back onto the dataset grid.
    std::vector<double> pi_on_dataset_grid() const;

    /// Replace every parameter with a draw from its prior.
    void draw_parameters_from_prior(Rng& rng);
    /// Regenerate causes, classes and observed symptoms from the current
    /// parameters, keeping verification flags and missingness masks.
    void simulate_observations(Rng& rng);

private:
    void rebuild_symptom_index();
    void refresh_log_params();
    void update_causes_and_classes(Rng& rng);
    void update_pi(Rng& rng);
    void update_phi(Rng& rng);
    void update_sticks_and_concentration(Rng& rng);
    void update_variances(Rng& rng);
    void refresh_pi_from_eta();
    Eigen::MatrixXd prior_precision() const;

    PriorSpec prior_;
    LatentHyper hyper_;
    int classes_;
    GridDims data_grid_;
    GridDims working_grid_;
    EtaLayout layout_;
    Eigen::MatrixXd design_;
    std::vector<int> grid_map_;  // dataset stratum -> working stratum

    int symptoms_ = 0;
    int raw_symptoms_ = 0;
    std::vector<std::string> symptom_names_;
    std::vector<int> stratum_;
    std::vector<std::uint8_t> verified_;
    std::vector<int> observed_cause_;
    std::vector<std::int8_t> symptoms_matrix_;
    // Observed symptom indices per record, CSR-style.
    std::vector<int> ones_ptr_, ones_idx_, zeros_ptr_, zeros_idx_;

    std::vector<double> log_phi_, log_1m_phi_, log_lambda_;
    ModelState state_;
};

/// Run `config.chains` chains and collect the retained draws.
PosteriorDraws run_chain(const Dataset& data, const PriorSpec& prior, const ChainConfig& config);

} // namespace hlcm

#endif
