#ifndef HLCM_MODEL_HPP
#define HLCM_MODEL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hlcm {

/// Symptom value used for a missing answer. Observed answers are 0 or 1.
inline constexpr std::int8_t kMissing = -1;

/// Dimensions of the (sex, time, age) stratum grid.
///
/// Flat index ordering is sex slowest and age fastest:
/// g = ((s-1)*T + (t-1))*A + (a-1), with 1-based s, t, a.
struct GridDims {
    int sexes = 2;
    int times = 1;
    int ages = 1;

    int size() const { return sexes * times * ages; }
    int flat(int s, int t, int a) const { return ((s - 1) * times + (t - 1)) * ages + (a - 1); }
    std::array<int, 3> unflat(int g) const {
        return {g / (times * ages) + 1, (g / ages) % times + 1, g % ages + 1};
    }
    bool contains(int s, int t, int a) const {
        return s >= 1 && s <= sexes && t >= 1 && t <= times && a >= 1 && a <= ages;
    }
    friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// One death.
struct SurveyRecord {
    std::string id;
    int sex = 1;
    int time = 1;
    int age = 1;
    bool verified = false;
    std::optional<int> cause;           // present iff verified
    std::vector<std::int8_t> symptoms;  // 0, 1 or kMissing

    friend bool operator==(const SurveyRecord&, const SurveyRecord&) = default;
};

/// A validated collection of records over a fixed grid and symptom count.
class Dataset {
public:
    Dataset() = default;
    Dataset(GridDims grid, int num_symptoms, std::vector<SurveyRecord> records,
            std::vector<std::string> symptom_names = {});

    const GridDims& grid() const { return grid_; }
    int num_symptoms() const { return num_symptoms_; }
    const std::vector<std::string>& symptom_names() const { return symptom_names_; }
    const std::vector<SurveyRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    int stratum_of(const SurveyRecord& r) const { return grid_.flat(r.sex, r.time, r.age); }

    /// Throws InvalidArgument describing the first violated record invariant.
    void validate() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    GridDims grid_;
    int num_symptoms_ = 0;
    std::vector<std::string> symptom_names_;
    std::vector<SurveyRecord> records_;
};

/// Per-stratum record counts over a grid.
struct StratumGrid {
    GridDims dims;
    std::vector<int> counts;

    static StratumGrid from(const Dataset& data);
    int total() const;
};

/// Latent class parameters for causes {0, 1}, K classes, p symptoms and G strata.
///
/// phi is laid out [cause][class][symptom]; sticks, weights and the
/// stick-breaking concentration are laid out [cause][stratum][class] and
/// [cause][stratum].
struct LatentClassParams {
    int classes = 1;
    int symptoms = 0;
    int strata = 1;
    std::vector<double> phi;
    std::vector<double> sticks;
    std::vector<double> weights;
    std::vector<double> concentration;

    LatentClassParams() = default;
    LatentClassParams(int K, int p, int G);

    double& phi_at(int c, int k, int j) { return phi[(c * classes + k) * symptoms + j]; }
    double phi_at(int c, int k, int j) const { return phi[(c * classes + k) * symptoms + j]; }
    std::span<double> sticks_of(int c, int g) { return {sticks.data() + (c * strata + g) * classes, static_cast<std::size_t>(classes)}; }
    std::span<const double> sticks_of(int c, int g) const { return {sticks.data() + (c * strata + g) * classes, static_cast<std::size_t>(classes)}; }
    std::span<double> weights_of(int c, int g) { return {weights.data() + (c * strata + g) * classes, static_cast<std::size_t>(classes)}; }
    std::span<const double> weights_of(int c, int g) const { return {weights.data() + (c * strata + g) * classes, static_cast<std::size_t>(classes)}; }
    double& concentration_at(int c, int g) { return concentration[c * strata + g]; }
    double concentration_at(int c, int g) const { return concentration[c * strata + g]; }

    /// Recompute every weight vector from its sticks.
    void refresh_weights();
    /// Throws InvalidArgument if a type invariant is violated.
    void validate() const;
};

/// Logit-scale regression state for the stratum CSMFs.
struct RegressionState {
    Eigen::VectorXd eta;
    double sigma2_time = 0.01;
    double sigma2_age = 0.01;
    double sigma2_eps = 0.01;
};

/// Everything one Gibbs iteration carries forward.
struct ModelState {
    std::vector<int> causes;   // imputed or observed Y_i
    std::vector<int> classes;  // Z_i in [0, K)
    std::vector<double> pi;    // per working stratum
    LatentClassParams latent;
    RegressionState regression;
};

/// lambda_k = V_k * prod_{l<k} (1 - V_l). Requires V in (0, 1] and V[K-1] == 1.
std::vector<double> stick_breaking_weights(std::span<const double> sticks);

/// Inverse of stick_breaking_weights on non-degenerate inputs.
std::vector<double> sticks_from_weights(std::span<const double> weights);

double inv_logit(double r);
double logit(double p);
double log_sum_exp(std::span<const double> v);

/// log p(x | Y = c, D = g), marginalised over latent classes; missing entries
/// drop out of the product.
double symptom_loglik(std::span<const std::int8_t> x, int cause, int stratum,
                      const LatentClassParams& params);

/// log lambda_ck^(g) + sum_j log Bernoulli(x_j; phi_ckj) for every class k.
void class_logliks(std::span<const std::int8_t> x, int cause, int stratum,
                   const LatentClassParams& params, std::span<double> out);

} // namespace hlcm

#endif
