#include "hlcm/priors.hpp"
#include "hlcm/error.hpp"

namespace hlcm {

std::string_view variant_name(PriorVariant v) {
    switch (v) {
    case PriorVariant::FixedEffect: return "fixed";
    case PriorVariant::IndependentRE: return "indep";
    case PriorVariant::RW1: return "rw1";
    case PriorVariant::UnstructuredBaseline: return "unstructured";
    case PriorVariant::Unstratified: return "unstratified";
    case PriorVariant::TimeOnly: return "time-only";
    }
    return "unknown";
}

PriorVariant parse_variant(std::string_view name) {
    for (auto v : {PriorVariant::FixedEffect, PriorVariant::IndependentRE, PriorVariant::RW1,
                   PriorVariant::UnstructuredBaseline, PriorVariant::Unstratified, PriorVariant::TimeOnly})
        if (variant_name(v) == name) return v;
    throw InvalidArgument("unknown model variant '" + std::string(name) +
                          "' (expected fixed|indep|rw1|unstructured|unstratified|time-only)");
}

void PriorSpec::validate() const {
    auto positive = [](const InvGamma& g) { return g.shape > 0.0 && g.rate > 0.0; };
    if (!(fixed_effect_variance > 0.0)) throw InvalidArgument("fixed-effect variance must be positive");
    if (!positive(independent) || !positive(random_walk) || !positive(epsilon))
        throw InvalidArgument("Inverse-Gamma hyperparameters must be positive");
}

bool PriorSpec::uses_regression() const {
    return variant != PriorVariant::UnstructuredBaseline && variant != PriorVariant::Unstratified;
}

EtaLayout EtaLayout::full(int times, int ages) {
    if (times < 1 || ages < 1) throw InvalidArgument("grid dimensions must be >= 1");
    return EtaLayout{GridDims{2, times, ages}, true, true};
}

EtaLayout EtaLayout::time_only(int times) {
    if (times < 1) throw InvalidArgument("grid dimensions must be >= 1");
    return EtaLayout{GridDims{1, times, 1}, false, false};
}

Eigen::MatrixXd build_design_matrix(const EtaLayout& layout) {
    const int G = layout.grid.size();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(G, layout.size());
    for (int g = 0; g < G; ++g) {
        const auto [s, t, a] = layout.grid.unflat(g);
        P(g, 0) = 1.0;
        if (layout.sex_effect && s == 1) P(g, layout.sex_index()) = 1.0;
        P(g, layout.time_offset() + t - 1) = 1.0;
        if (layout.age_effect) P(g, layout.age_offset() + a - 1) = 1.0;
        P(g, layout.eps_offset() + g) = 1.0;
    }
    return P;
}

Eigen::MatrixXd build_design_matrix(int times, int ages) {
    return build_design_matrix(EtaLayout::full(times, ages));
}

Eigen::MatrixXd rw1_precision(int n, double sigma2, double anchor_variance) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    const double w = 1.0 / sigma2;
    for (int i = 1; i < n; ++i) {
        Q(i - 1, i - 1) += w;
        Q(i, i) += w;
        Q(i - 1, i) -= w;
        Q(i, i - 1) -= w;
    }
    Q(0, 0) += 1.0 / anchor_variance;
    return Q;
}

namespace {

Eigen::MatrixXd effect_block(const PriorSpec& spec, int n, double sigma2) {
    switch (spec.variant) {
    case PriorVariant::FixedEffect:
        return Eigen::MatrixXd::Identity(n, n) / spec.fixed_effect_variance;
    case PriorVariant::IndependentRE:
        return Eigen::MatrixXd::Identity(n, n) / sigma2;
    case PriorVariant::RW1:
    case PriorVariant::TimeOnly:
        return rw1_precision(n, sigma2, spec.fixed_effect_variance);
    default:
        throw InvalidArgument("variant has no regression prior");
    }
}

double sum_sq(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

} // namespace

Eigen::MatrixXd build_prior_precision(const PriorSpec& spec, const EtaLayout& layout,
                                      double sigma2_time, double sigma2_age, double sigma2_eps) {
    if (!spec.uses_regression())
        throw InvalidArgument(std::string("variant '") + std::string(variant_name(spec.variant)) +
                              "' does not use the regression prior");
    if (!(sigma2_time > 0.0 && sigma2_age > 0.0 && sigma2_eps > 0.0))
        throw InvalidArgument("variances must be positive");
    const int D = layout.size();
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(D, D);
    Q(0, 0) = 1.0 / spec.fixed_effect_variance;
    if (layout.sex_effect) Q(1, 1) = 1.0 / spec.fixed_effect_variance;
    const int T = layout.grid.times;
    Q.block(layout.time_offset(), layout.time_offset(), T, T) = effect_block(spec, T, sigma2_time);
    if (layout.age_effect) {
        const int A = layout.grid.ages;
        Q.block(layout.age_offset(), layout.age_offset(), A, A) = effect_block(spec, A, sigma2_age);
    }
    const int G = layout.grid.size();
    Q.block(layout.eps_offset(), layout.eps_offset(), G, G) = Eigen::MatrixXd::Identity(G, G) / sigma2_eps;
    return Q;
}

InvGamma rw1_variance_posterior(std::span<const double> alpha, InvGamma prior) {
    if (alpha.size() < 2) throw InvalidArgument("random-walk variance update needs at least 2 effects");
    double ss = 0.0;
    for (std::size_t i = 1; i < alpha.size(); ++i) {
        const double d = alpha[i] - alpha[i - 1];
        ss += d * d;
    }
    return {prior.shape + 0.5 * static_cast<double>(alpha.size() - 1), prior.rate + 0.5 * ss};
}

InvGamma independent_variance_posterior(std::span<const double> alpha, InvGamma prior) {
    if (alpha.empty()) throw InvalidArgument("variance update needs at least 1 effect");
    return {prior.shape + 0.5 * static_cast<double>(alpha.size()), prior.rate + 0.5 * sum_sq(alpha)};
}

InvGamma epsilon_variance_posterior(std::span<const double> eps, int expected_length, InvGamma prior) {
    if (static_cast<int>(eps.size()) != expected_length)
        throw InvalidArgument("interaction vector length " + std::to_string(eps.size()) +
                              " != " + std::to_string(expected_length));
    return {prior.shape + 0.5 * static_cast<double>(eps.size()), prior.rate + 0.5 * sum_sq(eps)};
}

double sample_variance_rw1(std::span<const double> alpha, Rng& rng, InvGamma prior) {
    const auto post = rw1_variance_posterior(alpha, prior);
    return rng.inverse_gamma(post.shape, post.rate);
}

double sample_variance_independent(std::span<const double> alpha, Rng& rng, InvGamma prior) {
    const auto post = independent_variance_posterior(alpha, prior);
    return rng.inverse_gamma(post.shape, post.rate);
}

double sample_variance_epsilon(std::span<const double> eps, int expected_length, Rng& rng, InvGamma prior) {
    const auto post = epsilon_variance_posterior(eps, expected_length, prior);
    return rng.inverse_gamma(post.shape, post.rate);
}

} // namespace hlcm
