#include "hlcm/gibbs.hpp"
#include "hlcm/error.hpp"
#include "hlcm/polya_gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace hlcm {

void LatentHyper::validate() const {
    if (!(a_phi > 0 && b_phi > 0 && a_omega > 0 && b_omega > 0))
        throw InvalidArgument("latent class hyperparameters must be positive");
}

void ChainConfig::validate() const {
    if (classes < 1) throw InvalidArgument("number of latent classes K must be >= 1");
    if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations) throw InvalidArgument("burn-in must be in [0, iterations)");
    if (thinning < 1) throw InvalidArgument("thinning must be >= 1");
    if (chains < 1) throw InvalidArgument("chains must be >= 1");
    hyper.validate();
}

Eigen::MatrixXd PosteriorDraws::pi_matrix() const {
    const int G = grid.size();
    Eigen::MatrixXd M(static_cast<Eigen::Index>(draws.size()), G);
    for (std::size_t d = 0; d < draws.size(); ++d)
        for (int g = 0; g < G; ++g) M(static_cast<Eigen::Index>(d), g) = draws[d].pi[g];
    return M;
}

// --- single-step conditionals -------------------------------------------

double cause_probability(std::span<const std::int8_t> x, int stratum,
                         const LatentClassParams& params, double pi) {
    const double l1 = std::log(pi) + symptom_loglik(x, 1, stratum, params);
    const double l0 = std::log1p(-pi) + symptom_loglik(x, 0, stratum, params);
    if (l1 == -std::numeric_limits<double>::infinity()) return 0.0;
    return 1.0 / (1.0 + std::exp(l0 - l1));
}

int sample_cause(std::span<const std::int8_t> x, int stratum, const LatentClassParams& params,
                 double pi, Rng& rng) {
    return rng.uniform() < cause_probability(x, stratum, params, pi) ? 1 : 0;
}

int sample_latent_class(std::span<const std::int8_t> x, int cause, int stratum,
                        const LatentClassParams& params, Rng& rng) {
    std::vector<double> ll(params.classes);
    class_logliks(x, cause, stratum, params, ll);
    return rng.categorical_log(ll);
}

Eigen::VectorXd sample_eta(std::span<const int> z, std::span<const int> n, const Eigen::MatrixXd& P,
                           const Eigen::MatrixXd& prior_precision, const Eigen::VectorXd& eta, Rng& rng) {
    const Eigen::Index G = P.rows();
    const Eigen::Index D = P.cols();
    if (static_cast<Eigen::Index>(z.size()) != G || static_cast<Eigen::Index>(n.size()) != G)
        throw InvalidArgument("count vectors must have one entry per design row");
    if (prior_precision.rows() != D || prior_precision.cols() != D || eta.size() != D)
        throw InvalidArgument("eta / precision dimensions do not match the design matrix");

    Eigen::MatrixXd Q = prior_precision;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(D);
    std::vector<Eigen::Index> nz;
    nz.reserve(8);
    for (Eigen::Index l = 0; l < G; ++l) {
        if (z[l] < 0 || z[l] > n[l]) throw InvalidArgument("stratum successes must lie in [0, n]");
        if (n[l] == 0) continue;
        nz.clear();
        double m = 0.0;
        for (Eigen::Index j = 0; j < D; ++j) {
            if (P(l, j) != 0.0) {
                nz.push_back(j);
                m += P(l, j) * eta[j];
            }
        }
        const double w = sample_pg({n[l], m}, rng);
        const double kappa = z[l] - 0.5 * n[l];
        for (auto i : nz) {
            b[i] += kappa * P(l, i);
            for (auto j : nz) Q(i, j) += w * P(l, i) * P(l, j);
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Q);
    if (llt.info() != Eigen::Success) throw std::runtime_error("posterior precision of eta is not positive definite");
    Eigen::VectorXd mean = llt.solve(b);
    Eigen::VectorXd xi(D);
    for (Eigen::Index j = 0; j < D; ++j) xi[j] = rng.normal();
    // Q = L L^T, so L^{-T} xi has covariance Q^{-1}.
    return mean + llt.matrixU().solve(xi);
}

void sample_phi(const PhiCounts& counts, double a_phi, double b_phi, Rng& rng, LatentClassParams& params) {
    if (counts.classes != params.classes || counts.symptoms != params.symptoms)
        throw InvalidArgument("phi count dimensions do not match parameters");
    for (int c = 0; c < 2; ++c)
        for (int k = 0; k < params.classes; ++k)
            for (int j = 0; j < params.symptoms; ++j) {
                const int idx = counts.index(c, k, j);
                params.phi_at(c, k, j) = rng.beta(a_phi + counts.ones[idx], b_phi + counts.zeros[idx]);
            }
}

std::vector<double> sample_sticks(std::span<const int> class_counts, double concentration, Rng& rng) {
    const int K = static_cast<int>(class_counts.size());
    std::vector<double> v(K, 1.0);
    int above = 0;
    for (int k = 0; k < K; ++k) above += class_counts[k];
    for (int k = 0; k + 1 < K; ++k) {
        above -= class_counts[k];
        v[k] = rng.beta(1.0 + class_counts[k], concentration + above);
    }
    return v;
}

double sample_sb_concentration(std::span<const double> sticks, double a_omega, double b_omega, Rng& rng) {
    const int K = static_cast<int>(sticks.size());
    double rate = b_omega;
    for (int k = 0; k + 1 < K; ++k) {
        if (!(sticks[k] < 1.0)) throw InvalidArgument("sticks before the last must be < 1");
        rate -= std::log1p(-sticks[k]);
    }
    return rng.gamma(a_omega + K - 1, rate);
}

std::vector<double> sample_pi_unstructured(std::span<const int> z, std::span<const int> n, Rng& rng) {
    if (z.size() != n.size()) throw InvalidArgument("count vectors differ in length");
    std::vector<double> pi(z.size());
    for (std::size_t g = 0; g < z.size(); ++g) {
        if (z[g] < 0 || z[g] > n[g]) throw InvalidArgument("stratum successes must lie in [0, n]");
        pi[g] = rng.beta(1.0 + z[g], 1.0 + n[g] - z[g]);
    }
    return pi;
}

double sample_pi_pooled(std::span<const int> z, std::span<const int> n, Rng& rng) {
    if (z.size() != n.size()) throw InvalidArgument("count vectors differ in length");
    long zs = 0, fs = 0;
    for (std::size_t g = 0; g < z.size(); ++g) {
        if (z[g] < 0 || z[g] > n[g]) throw InvalidArgument("stratum successes must lie in [0, n]");
        zs += z[g];
        fs += n[g] - z[g];
    }
    return rng.beta(1.0 + zs, 1.0 + fs);
}

// --- the sampler ---------------------------------------------------------

GibbsSampler::GibbsSampler(const Dataset& data, const PriorSpec& prior, int classes, LatentHyper hyper)
    : prior_(prior), hyper_(hyper), classes_(classes), data_grid_(data.grid()) {
    prior_.validate();
    hyper_.validate();
    if (classes_ < 1) throw InvalidArgument("number of latent classes K must be >= 1");
    if (data.empty()) throw InvalidArgument("dataset has no records");

    const int T = data_grid_.times;
    const int A = data_grid_.ages;
    raw_symptoms_ = data.num_symptoms();
    symptom_names_ = data.symptom_names();
    switch (prior_.variant) {
    case PriorVariant::Unstratified:
        working_grid_ = GridDims{1, 1, 1};
        break;
    case PriorVariant::TimeOnly:
        working_grid_ = GridDims{1, T, 1};
        layout_ = EtaLayout::time_only(T);
        symptom_names_.push_back("sex_1");
        for (int a = 2; a <= A; ++a) symptom_names_.push_back("age_" + std::to_string(a));
        break;
    default:
        working_grid_ = data_grid_;
        layout_ = EtaLayout::full(T, A);
        break;
    }
    symptoms_ = static_cast<int>(symptom_names_.size());
    if (prior_.uses_regression()) design_ = build_design_matrix(layout_);

    grid_map_.resize(data_grid_.size());
    for (int g = 0; g < data_grid_.size(); ++g) {
        const auto [s, t, a] = data_grid_.unflat(g);
        switch (prior_.variant) {
        case PriorVariant::Unstratified: grid_map_[g] = 0; break;
        case PriorVariant::TimeOnly: grid_map_[g] = t - 1; break;
        default: grid_map_[g] = g; break;
        }
    }

    const std::size_t n = data.size();
    stratum_.resize(n);
    verified_.resize(n);
    observed_cause_.assign(n, -1);
    symptoms_matrix_.assign(n * symptoms_, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = data.records()[i];
        stratum_[i] = grid_map_[data.stratum_of(r)];
        verified_[i] = r.verified ? 1 : 0;
        if (r.verified) observed_cause_[i] = *r.cause;
        std::int8_t* row = symptoms_matrix_.data() + i * symptoms_;
        std::copy(r.symptoms.begin(), r.symptoms.end(), row);
        if (prior_.variant == PriorVariant::TimeOnly) {
            row[raw_symptoms_] = r.sex == 1 ? 1 : 0;
            for (int a = 2; a <= A; ++a) row[raw_symptoms_ + a - 1] = r.age == a ? 1 : 0;
        }
    }
    rebuild_symptom_index();

    state_.latent = LatentClassParams(classes_, symptoms_, working_grid_.size());
    state_.causes.assign(n, 0);
    state_.classes.assign(n, 0);
    state_.pi.assign(working_grid_.size(), 0.5);
    if (prior_.uses_regression()) state_.regression.eta = Eigen::VectorXd::Zero(layout_.size());
}

void GibbsSampler::rebuild_symptom_index() {
    const std::size_t n = stratum_.size();
    ones_ptr_.assign(n + 1, 0);
    zeros_ptr_.assign(n + 1, 0);
    ones_idx_.clear();
    zeros_idx_.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const std::int8_t* row = symptoms_matrix_.data() + i * symptoms_;
        for (int j = 0; j < symptoms_; ++j) {
            if (row[j] == 1) ones_idx_.push_back(j);
            else if (row[j] == 0) zeros_idx_.push_back(j);
        }
        ones_ptr_[i + 1] = static_cast<int>(ones_idx_.size());
        zeros_ptr_[i + 1] = static_cast<int>(zeros_idx_.size());
    }
}

void GibbsSampler::initialize(Rng& rng) {
    const int G = working_grid_.size();
    const std::size_t n = stratum_.size();
    std::vector<int> vz(G, 0), vn(G, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!verified_[i]) continue;
        vn[stratum_[i]] += 1;
        vz[stratum_[i]] += observed_cause_[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (verified_[i]) {
            state_.causes[i] = observed_cause_[i];
        } else {
            const int g = stratum_[i];
            const double p = vn[g] > 0 ? static_cast<double>(vz[g]) / vn[g] : 0.5;
            state_.causes[i] = rng.bernoulli(p) ? 1 : 0;
        }
        state_.classes[i] = rng.uniform_int(0, classes_ - 1);
    }
    auto& lat = state_.latent;
    for (double& f : lat.phi) f = rng.beta(hyper_.a_phi, hyper_.b_phi);
    for (int c = 0; c < 2; ++c)
        for (int g = 0; g < G; ++g) {
            lat.concentration_at(c, g) = 1.0;
            auto v = lat.sticks_of(c, g);
            for (int k = 0; k + 1 < classes_; ++k) v[k] = rng.beta(1.0, 1.0);
            v[classes_ - 1] = 1.0;
        }
    lat.refresh_weights();
    state_.regression.sigma2_time = 0.01;
    state_.regression.sigma2_age = 0.01;
    state_.regression.sigma2_eps = 0.01;
    if (prior_.uses_regression()) {
        state_.regression.eta.setZero();
        refresh_pi_from_eta();
    } else {
        std::fill(state_.pi.begin(), state_.pi.end(), 0.5);
    }
}

void GibbsSampler::refresh_log_params() {
    const auto& lat = state_.latent;
    log_phi_.resize(lat.phi.size());
    log_1m_phi_.resize(lat.phi.size());
    for (std::size_t i = 0; i < lat.phi.size(); ++i) {
        log_phi_[i] = std::log(lat.phi[i]);
        log_1m_phi_[i] = std::log1p(-lat.phi[i]);
    }
    log_lambda_.resize(lat.weights.size());
    for (std::size_t i = 0; i < lat.weights.size(); ++i) log_lambda_[i] = std::log(lat.weights[i]);
}

void GibbsSampler::update_causes_and_classes(Rng& rng) {
    refresh_log_params();
    const int K = classes_;
    const int p = symptoms_;
    const int G = working_grid_.size();
    std::vector<double> ll(2 * K);
    const std::size_t n = stratum_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const int g = stratum_[i];
        const bool unverified = verified_[i] == 0;
        const int c_lo = unverified ? 0 : observed_cause_[i];
        const int c_hi = unverified ? 1 : observed_cause_[i];
        for (int c = c_lo; c <= c_hi; ++c) {
            const double* lphi = log_phi_.data() + c * K * p;
            const double* l1m = log_1m_phi_.data() + c * K * p;
            const double* llam = log_lambda_.data() + (c * G + g) * K;
            for (int k = 0; k < K; ++k) {
                double acc = llam[k];
                const double* a = lphi + k * p;
                const double* b = l1m + k * p;
                for (int q = ones_ptr_[i]; q < ones_ptr_[i + 1]; ++q) acc += a[ones_idx_[q]];
                for (int q = zeros_ptr_[i]; q < zeros_ptr_[i + 1]; ++q) acc += b[zeros_idx_[q]];
                ll[c * K + k] = acc;
            }
        }
        int y = observed_cause_[i];
        if (unverified) {
            const double pi = state_.pi[g];
            const double l1 = std::log(pi) + log_sum_exp({ll.data() + K, static_cast<std::size_t>(K)});
            const double l0 = std::log1p(-pi) + log_sum_exp({ll.data(), static_cast<std::size_t>(K)});
            const double p1 = l1 == -std::numeric_limits<double>::infinity() ? 0.0 : 1.0 / (1.0 + std::exp(l0 - l1));
            y = rng.uniform() < p1 ? 1 : 0;
        }
        state_.causes[i] = y;
        state_.classes[i] = rng.categorical_log({ll.data() + y * K, static_cast<std::size_t>(K)});
    }
}

Eigen::MatrixXd GibbsSampler::prior_precision() const {
    const auto& r = state_.regression;
    return build_prior_precision(prior_, layout_, r.sigma2_time, r.sigma2_age, r.sigma2_eps);
}

void GibbsSampler::refresh_pi_from_eta() {
    const Eigen::VectorXd m = design_ * state_.regression.eta;
    for (int g = 0; g < working_grid_.size(); ++g) state_.pi[g] = inv_logit(m[g]);
}

void GibbsSampler::update_pi(Rng& rng) {
    const int G = working_grid_.size();
    std::vector<int> z(G, 0), n(G, 0);
    for (std::size_t i = 0; i < stratum_.size(); ++i) {
        n[stratum_[i]] += 1;
        z[stratum_[i]] += state_.causes[i];
    }
    switch (prior_.variant) {
    case PriorVariant::UnstructuredBaseline:
        state_.pi = sample_pi_unstructured(z, n, rng);
        break;
    case PriorVariant::Unstratified:
        std::fill(state_.pi.begin(), state_.pi.end(), sample_pi_pooled(z, n, rng));
        break;
    default:
        state_.regression.eta = sample_eta(z, n, design_, prior_precision(), state_.regression.eta, rng);
        refresh_pi_from_eta();
        break;
    }
}

void GibbsSampler::update_phi(Rng& rng) {
    PhiCounts counts(classes_, symptoms_);
    for (std::size_t i = 0; i < stratum_.size(); ++i) {
        const int base = counts.index(state_.causes[i], state_.classes[i], 0);
        for (int q = ones_ptr_[i]; q < ones_ptr_[i + 1]; ++q) ++counts.ones[base + ones_idx_[q]];
        for (int q = zeros_ptr_[i]; q < zeros_ptr_[i + 1]; ++q) ++counts.zeros[base + zeros_idx_[q]];
    }
    sample_phi(counts, hyper_.a_phi, hyper_.b_phi, rng, state_.latent);
}

void GibbsSampler::update_sticks_and_concentration(Rng& rng) {
    const int G = working_grid_.size();
    const int K = classes_;
    std::vector<int> counts(2 * G * K, 0);
    for (std::size_t i = 0; i < stratum_.size(); ++i)
        ++counts[(state_.causes[i] * G + stratum_[i]) * K + state_.classes[i]];
    auto& lat = state_.latent;
    for (int c = 0; c < 2; ++c)
        for (int g = 0; g < G; ++g) {
            const std::span<const int> cnt(counts.data() + (c * G + g) * K, static_cast<std::size_t>(K));
            const auto v = sample_sticks(cnt, lat.concentration_at(c, g), rng);
            std::copy(v.begin(), v.end(), lat.sticks_of(c, g).begin());
        }
    lat.refresh_weights();
    for (int c = 0; c < 2; ++c)
        for (int g = 0; g < G; ++g)
            lat.concentration_at(c, g) = sample_sb_concentration(lat.sticks_of(c, g), hyper_.a_omega, hyper_.b_omega, rng);
}

void GibbsSampler::update_variances(Rng& rng) {
    if (!prior_.uses_regression()) return;
    auto& r = state_.regression;
    const Eigen::VectorXd& eta = r.eta;
    const int T = layout_.grid.times;
    const int A = layout_.grid.ages;
    const std::span<const double> time(eta.data() + layout_.time_offset(), static_cast<std::size_t>(T));
    const std::span<const double> age(eta.data() + layout_.age_offset(), static_cast<std::size_t>(A));
    switch (prior_.variant) {
    case PriorVariant::IndependentRE:
        r.sigma2_time = sample_variance_independent(time, rng, prior_.independent);
        if (layout_.age_effect) r.sigma2_age = sample_variance_independent(age, rng, prior_.independent);
        break;
    case PriorVariant::RW1:
    case PriorVariant::TimeOnly:
        if (T >= 2) r.sigma2_time = sample_variance_rw1(time, rng, prior_.random_walk);
        if (layout_.age_effect && A >= 2) r.sigma2_age = sample_variance_rw1(age, rng, prior_.random_walk);
        break;
    default:
        break;
    }
    const int G = layout_.grid.size();
    const std::span<const double> eps(eta.data() + layout_.eps_offset(), static_cast<std::size_t>(G));
    r.sigma2_eps = sample_variance_epsilon(eps, G, rng, prior_.epsilon);
}

void GibbsSampler::sweep(Rng& rng) {
    update_causes_and_classes(rng);
    update_pi(rng);
    update_phi(rng);
    update_sticks_and_concentration(rng);
    update_variances(rng);
}

std::vector<double> GibbsSampler::pi_on_dataset_grid() const {
    std::vector<double> out(data_grid_.size());
    for (int g = 0; g < data_grid_.size(); ++g) out[g] = state_.pi[grid_map_[g]];
    return out;
}

void GibbsSampler::draw_parameters_from_prior(Rng& rng) {
    auto& lat = state_.latent;
    const int G = working_grid_.size();
    for (double& f : lat.phi) f = rng.beta(hyper_.a_phi, hyper_.b_phi);
    for (int c = 0; c < 2; ++c)
        for (int g = 0; g < G; ++g) {
            const double w = rng.gamma(hyper_.a_omega, hyper_.b_omega);
            lat.concentration_at(c, g) = w;
            auto v = lat.sticks_of(c, g);
            for (int k = 0; k + 1 < classes_; ++k) v[k] = rng.beta(1.0, w);
            v[classes_ - 1] = 1.0;
        }
    lat.refresh_weights();

    if (!prior_.uses_regression()) {
        if (prior_.variant == PriorVariant::Unstratified)
            std::fill(state_.pi.begin(), state_.pi.end(), rng.beta(1.0, 1.0));
        else
            for (double& p : state_.pi) p = rng.beta(1.0, 1.0);
        return;
    }
    auto& r = state_.regression;
    switch (prior_.variant) {
    case PriorVariant::IndependentRE:
        r.sigma2_time = rng.inverse_gamma(prior_.independent.shape, prior_.independent.rate);
        r.sigma2_age = rng.inverse_gamma(prior_.independent.shape, prior_.independent.rate);
        break;
    case PriorVariant::RW1:
    case PriorVariant::TimeOnly:
        r.sigma2_time = rng.inverse_gamma(prior_.random_walk.shape, prior_.random_walk.rate);
        r.sigma2_age = rng.inverse_gamma(prior_.random_walk.shape, prior_.random_walk.rate);
        break;
    default:
        break;
    }
    r.sigma2_eps = rng.inverse_gamma(prior_.epsilon.shape, prior_.epsilon.rate);
    Eigen::LLT<Eigen::MatrixXd> llt(prior_precision());
    Eigen::VectorXd xi(layout_.size());
    for (Eigen::Index j = 0; j < xi.size(); ++j) xi[j] = rng.normal();
    r.eta = llt.matrixU().solve(xi);
    refresh_pi_from_eta();
}

void GibbsSampler::simulate_observations(Rng& rng) {
    const auto& lat = state_.latent;
    std::vector<double> logw(classes_);
    for (std::size_t i = 0; i < stratum_.size(); ++i) {
        const int g = stratum_[i];
        const int y = rng.bernoulli(state_.pi[g]) ? 1 : 0;
        auto w = lat.weights_of(y, g);
        for (int k = 0; k < classes_; ++k) logw[k] = std::log(w[k]);
        const int z = rng.categorical_log(logw);
        state_.causes[i] = y;
        state_.classes[i] = z;
        if (verified_[i]) observed_cause_[i] = y;
        std::int8_t* row = symptoms_matrix_.data() + i * symptoms_;
        for (int j = 0; j < raw_symptoms_; ++j) {
            if (row[j] == kMissing) continue;
            row[j] = rng.bernoulli(lat.phi_at(y, z, j)) ? 1 : 0;
        }
    }
    rebuild_symptom_index();
}

namespace {

struct ChainOutput {
    std::vector<Draw> draws;
    std::vector<double> phi_sum;
    std::vector<double> lambda_sum;
};

ChainOutput run_single_chain(const Dataset& data, const PriorSpec& prior, const ChainConfig& config, int chain) {
    GibbsSampler sampler(data, prior, config.classes, config.hyper);
    Rng rng(derive_seed(config.seed, 1, static_cast<std::uint64_t>(chain)));
    sampler.initialize(rng);
    const bool regression = prior.uses_regression();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    ChainOutput out;
    out.phi_sum.assign(sampler.state().latent.phi.size(), 0.0);
    out.lambda_sum.assign(sampler.state().latent.weights.size(), 0.0);
    out.draws.reserve(config.retained_per_chain());
    for (int it = 1; it <= config.iterations; ++it) {
        sampler.sweep(rng);
        if (it <= config.burn_in || (it - config.burn_in) % config.thinning != 0) continue;
        const auto& st = sampler.state();
        Draw d;
        d.chain = chain;
        d.iteration = it;
        d.pi = sampler.pi_on_dataset_grid();
        if (regression) {
            d.eta.assign(st.regression.eta.data(), st.regression.eta.data() + st.regression.eta.size());
            const bool variances = prior.variant != PriorVariant::FixedEffect;
            d.sigma2_time = variances ? st.regression.sigma2_time : nan;
            d.sigma2_age = variances && sampler.eta_layout().age_effect ? st.regression.sigma2_age : nan;
            d.sigma2_eps = st.regression.sigma2_eps;
        } else {
            d.sigma2_time = d.sigma2_age = d.sigma2_eps = nan;
        }
        for (std::size_t q = 0; q < out.phi_sum.size(); ++q) out.phi_sum[q] += st.latent.phi[q];
        for (std::size_t q = 0; q < out.lambda_sum.size(); ++q) out.lambda_sum[q] += st.latent.weights[q];
        if (config.keep_latent_draws) {
            d.phi = st.latent.phi;
            d.lambda = st.latent.weights;
        }
        out.draws.push_back(std::move(d));
    }
    return out;
}

} // namespace

PosteriorDraws run_chain(const Dataset& data, const PriorSpec& prior, const ChainConfig& config) {
    config.validate();
    prior.validate();
    if (data.empty()) throw InvalidArgument("dataset has no records");
    data.validate();

    // Probe construction once to surface configuration errors on this thread.
    GibbsSampler probe(data, prior, config.classes, config.hyper);

    PosteriorDraws result;
    result.variant = prior.variant;
    result.grid = data.grid();
    result.working_grid = probe.working_grid();
    result.classes = config.classes;
    result.symptoms = probe.working_symptoms();
    result.symptom_names = probe.working_symptom_names();
    result.stratum_counts = StratumGrid::from(data).counts;
    result.chains = config.chains;

    int verified[2] = {0, 0};
    std::size_t unverified = 0;
    for (const auto& r : data.records()) {
        if (r.verified) ++verified[*r.cause];
        else ++unverified;
    }
    if (unverified == data.size())
        result.warnings.push_back("no verified records: causes are identified only through the prior and initialization");
    else if (verified[0] == 0 || verified[1] == 0)
        result.warnings.push_back("verified records cover only one cause");

    std::vector<ChainOutput> outputs(config.chains);
    if (config.chains == 1) {
        outputs[0] = run_single_chain(data, prior, config, 0);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(config.chains);
        for (int c = 0; c < config.chains; ++c)
            workers.emplace_back([&, c] {
                try {
                    outputs[c] = run_single_chain(data, prior, config, c);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        for (auto& w : workers) w.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    result.phi_mean.assign(outputs[0].phi_sum.size(), 0.0);
    result.lambda_mean.assign(outputs[0].lambda_sum.size(), 0.0);
    for (auto& o : outputs) {
        for (std::size_t q = 0; q < o.phi_sum.size(); ++q) result.phi_mean[q] += o.phi_sum[q];
        for (std::size_t q = 0; q < o.lambda_sum.size(); ++q) result.lambda_mean[q] += o.lambda_sum[q];
        std::move(o.draws.begin(), o.draws.end(), std::back_inserter(result.draws));
    }
    const double total = static_cast<double>(result.draws.size());
    if (total > 0) {
        for (double& v : result.phi_mean) v /= total;
        for (double& v : result.lambda_mean) v /= total;
    }
    return result;
}

} // namespace hlcm
