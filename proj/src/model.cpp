#include "hlcm/model.hpp"
#include "hlcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hlcm {

Dataset::Dataset(GridDims grid, int num_symptoms, std::vector<SurveyRecord> records,
                 std::vector<std::string> symptom_names)
    : grid_(grid), num_symptoms_(num_symptoms), symptom_names_(std::move(symptom_names)),
      records_(std::move(records)) {
    if (symptom_names_.empty()) {
        for (int j = 1; j <= num_symptoms_; ++j) symptom_names_.push_back("x" + std::to_string(j));
    }
    if (static_cast<int>(symptom_names_.size()) != num_symptoms_)
        throw InvalidArgument("symptom name count does not match symptom count");
    validate();
}

void Dataset::validate() const {
    if (grid_.sexes < 1 || grid_.sexes > 2 || grid_.times < 1 || grid_.ages < 1)
        throw InvalidArgument("invalid stratum grid dimensions");
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const SurveyRecord& r = records_[i];
        const std::string where = "record " + std::to_string(i + 1) + " (id " + r.id + "): ";
        if (!grid_.contains(r.sex, r.time, r.age))
            throw InvalidArgument(where + "stratum index out of range");
        if (r.verified != r.cause.has_value())
            throw InvalidArgument(where + (r.verified ? "verified record without a cause"
                                                      : "unverified record carries a cause"));
        if (r.cause && *r.cause != 0 && *r.cause != 1)
            throw InvalidArgument(where + "cause must be 0 or 1");
        if (static_cast<int>(r.symptoms.size()) != num_symptoms_)
            throw InvalidArgument(where + "symptom vector length " + std::to_string(r.symptoms.size()) +
                                  " != " + std::to_string(num_symptoms_));
        for (auto x : r.symptoms)
            if (x != 0 && x != 1 && x != kMissing)
                throw InvalidArgument(where + "symptom values must be 0, 1 or missing");
    }
}

StratumGrid StratumGrid::from(const Dataset& data) {
    StratumGrid out{data.grid(), std::vector<int>(data.grid().size(), 0)};
    for (const auto& r : data.records()) ++out.counts[data.stratum_of(r)];
    return out;
}

int StratumGrid::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

LatentClassParams::LatentClassParams(int K, int p, int G)
    : classes(K), symptoms(p), strata(G),
      phi(2 * K * p, 0.5), sticks(2 * G * K, 1.0), weights(2 * G * K, 0.0), concentration(2 * G, 1.0) {
    if (K < 1 || p < 0 || G < 1) throw InvalidArgument("latent class dimensions must be positive");
    refresh_weights();
}

void LatentClassParams::refresh_weights() {
    for (int c = 0; c < 2; ++c) {
        for (int g = 0; g < strata; ++g) {
            auto v = sticks_of(c, g);
            auto w = weights_of(c, g);
            double remaining = 1.0;
            for (int k = 0; k < classes; ++k) {
                w[k] = v[k] * remaining;
                remaining *= (1.0 - v[k]);
            }
        }
    }
}

void LatentClassParams::validate() const {
    for (double f : phi)
        if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("phi entries must lie in (0, 1)");
    for (int c = 0; c < 2; ++c) {
        for (int g = 0; g < strata; ++g) {
            auto v = sticks_of(c, g);
            if (v[classes - 1] != 1.0) throw InvalidArgument("last stick must equal 1");
            for (double x : v)
                if (!(x > 0.0 && x <= 1.0)) throw InvalidArgument("sticks must lie in (0, 1]");
            auto w = weights_of(c, g);
            const double total = std::accumulate(w.begin(), w.end(), 0.0);
            if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("class weights must sum to 1");
        }
    }
    for (double w : concentration)
        if (!(w > 0.0)) throw InvalidArgument("stick-breaking concentration must be positive");
}

std::vector<double> stick_breaking_weights(std::span<const double> sticks) {
    if (sticks.empty()) throw InvalidArgument("stick vector is empty");
    if (sticks.back() != 1.0) throw InvalidArgument("last stick must equal 1");
    std::vector<double> w(sticks.size());
    double remaining = 1.0;
    for (std::size_t k = 0; k < sticks.size(); ++k) {
        if (!(sticks[k] > 0.0 && sticks[k] <= 1.0)) throw InvalidArgument("sticks must lie in (0, 1]");
        w[k] = sticks[k] * remaining;
        remaining *= (1.0 - sticks[k]);
    }
    return w;
}

std::vector<double> sticks_from_weights(std::span<const double> weights) {
    if (weights.empty()) throw InvalidArgument("weight vector is empty");
    std::vector<double> v(weights.size());
    double remaining = 1.0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
        if (!(remaining > 0.0)) throw InvalidArgument("degenerate weights: no remaining stick");
        v[k] = weights[k] / remaining;
        remaining -= weights[k];
    }
    v.back() = 1.0;
    return v;
}

double inv_logit(double r) {
    if (r >= 0.0) return 1.0 / (1.0 + std::exp(-r));
    const double e = std::exp(r);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double log_sum_exp(std::span<const double> v) {
    const double mx = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

void class_logliks(std::span<const std::int8_t> x, int cause, int stratum,
                   const LatentClassParams& params, std::span<double> out) {
    if (static_cast<int>(x.size()) != params.symptoms)
        throw InvalidArgument("symptom vector length does not match phi");
    if (static_cast<int>(out.size()) != params.classes)
        throw InvalidArgument("output span must have one entry per class");
    auto w = params.weights_of(cause, stratum);
    for (int k = 0; k < params.classes; ++k) {
        double acc = std::log(w[k]);
        for (int j = 0; j < params.symptoms; ++j) {
            if (x[j] == kMissing) continue;
            const double f = params.phi_at(cause, k, j);
            acc += x[j] == 1 ? std::log(f) : std::log1p(-f);
        }
        out[k] = acc;
    }
}

double symptom_loglik(std::span<const std::int8_t> x, int cause, int stratum,
                      const LatentClassParams& params) {
    std::vector<double> terms(params.classes);
    class_logliks(x, cause, stratum, params, terms);
    return log_sum_exp(terms);
}

} // namespace hlcm
