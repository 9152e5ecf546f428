#include "doctest.h"

#include "helpers.hpp"
#include "oracles.hpp"
#include "hlcm/error.hpp"
#include "hlcm/evaluation.hpp"
#include "hlcm/gibbs.hpp"
#include "hlcm/pipeline.hpp"

#include <cmath>

using namespace hlcm;

namespace {

LatentClassParams one_symptom_params(int K, double phi1, double phi0) {
    LatentClassParams par(K, 1, 1);
    for (int k = 0; k < K; ++k) {
        par.phi_at(1, k, 0) = phi1;
        par.phi_at(0, k, 0) = phi0;
    }
    par.refresh_weights();
    return par;
}

Dataset small_masked(int T, int A, int p, int n, int K, std::uint64_t seed,
                     VerificationCase kind = VerificationCase::Ignorable) {
    Rng rng(seed);
    const GridDims grid{2, T, A};
    const TrueModel m = draw_true_model(grid, generate_true_csmf(T, A), std::vector<int>(grid.size(), n), K, p, rng);
    return simulate_synthetic(m, kind, seed, 0).masked.data;
}

ChainConfig short_config(int iters, int burn, int K = 3, std::uint64_t seed = 5) {
    ChainConfig c;
    c.iterations = iters;
    c.burn_in = burn;
    c.classes = K;
    c.seed = seed;
    return c;
}

} // namespace

TEST_SUITE("gibbs") {

TEST_CASE("cause probability examples") {
    const auto par = one_symptom_params(1, 0.9, 0.1);
    const std::vector<std::int8_t> x1{1};
    CHECK(cause_probability(x1, 0, par, 0.5) == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(cause_probability(x1, 0, par, 1.0) == 1.0);
    const std::vector<std::int8_t> miss{kMissing};
    CHECK(cause_probability(miss, 0, par, 0.37) == doctest::Approx(0.37).epsilon(1e-14));

    Rng rng(1);
    for (int i = 0; i < 1000; ++i) REQUIRE(sample_cause(x1, 0, par, 1.0, rng) == 1);
    int ones = 0;
    const int N = 100000;
    for (int i = 0; i < N; ++i) ones += sample_cause(x1, 0, par, 0.5, rng);
    CHECK(std::abs(ones / double(N) - 0.9) < 3.0 * std::sqrt(0.09 / N));
}

TEST_CASE("latent class examples") {
    Rng rng(2);
    const auto one = one_symptom_params(1, 0.3, 0.3);
    const std::vector<std::int8_t> x1{1};
    for (int i = 0; i < 100; ++i) REQUIRE(sample_latent_class(x1, 1, 0, one, rng) == 0);

    LatentClassParams par(2, 1, 1);
    for (int c = 0; c < 2; ++c) {
        par.phi_at(c, 0, 0) = 0.2;
        par.phi_at(c, 1, 0) = 0.6;
        par.sticks_of(c, 0)[0] = 0.5;
    }
    par.refresh_weights();
    std::vector<double> ll(2);
    class_logliks(x1, 1, 0, par, ll);
    CHECK(std::exp(ll[1]) / (std::exp(ll[0]) + std::exp(ll[1])) == doctest::Approx(0.75).epsilon(1e-14));
    const int N = 100000;
    int second = 0;
    for (int i = 0; i < N; ++i) second += sample_latent_class(x1, 1, 0, par, rng);
    CHECK(std::abs(second / double(N) - 0.75) < 3.0 * std::sqrt(0.75 * 0.25 / N));

    // All symptoms missing: draws follow lambda.
    par.sticks_of(0, 0)[0] = 0.3;
    par.refresh_weights();
    const std::vector<std::int8_t> miss{kMissing};
    second = 0;
    for (int i = 0; i < N; ++i) second += sample_latent_class(miss, 0, 0, par, rng);
    CHECK(std::abs(second / double(N) - 0.7) < 3.0 * std::sqrt(0.21 / N));
}

TEST_CASE("sample_eta prior-only and symmetric cases") {
    Rng rng(3);
    Eigen::MatrixXd P(1, 1);
    P(0, 0) = 1.0;
    Eigen::MatrixXd Om(1, 1);
    Om(0, 0) = 4.0;
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(1);
    const std::vector<int> z0{0}, n0{0};
    std::vector<double> d(50000);
    for (double& x : d) x = sample_eta(z0, n0, P, Om, eta, rng)[0];
    CHECK(std::abs(th::mean(d)) < 3.0 * th::se_mean(d));
    CHECK(std::abs(th::variance(d) - 0.25) < 3.0 * th::se_variance(d));

    // z = n/2 everywhere: the posterior is symmetric about 0.
    const auto Pd = build_design_matrix(2, 2);
    PriorSpec spec;
    const EtaLayout L = EtaLayout::full(2, 2);
    const auto Omega = build_prior_precision(spec, L, 0.5, 0.5, 0.25);
    const std::vector<int> z(8, 20), n(8, 40);
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(14);
    std::vector<double> m0;
    for (int it = 0; it < 20000; ++it) {
        cur = sample_eta(z, n, Pd, Omega, cur, rng);
        m0.push_back((Pd * cur)[0]);
    }
    CHECK(std::abs(th::mean(m0)) < 3.0 * batch_means_se(m0));

    const std::vector<int> zbad{5}, nbad{4};
    CHECK_THROWS_AS(sample_eta(zbad, nbad, P, Om, eta, rng), InvalidArgument);
}

TEST_CASE("sample_eta matches an independent Metropolis oracle") {
    const int T = 2, A = 2;
    const EtaLayout L = EtaLayout::full(T, A);
    const auto P = build_design_matrix(L);
    PriorSpec spec;
    const auto Omega = build_prior_precision(spec, L, 0.5, 0.5, 0.25);
    const std::vector<int> n(8, 50);
    const std::vector<int> z{12, 20, 31, 40, 9, 25, 27, 44};

    Rng rng(11);
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(L.size());
    for (int it = 0; it < 500; ++it) cur = sample_eta(z, n, P, Omega, cur, rng);
    std::vector<std::vector<double>> gibbs(8);
    for (int it = 0; it < 10000; ++it) {
        cur = sample_eta(z, n, P, Omega, cur, rng);
        const Eigen::VectorXd m = P * cur;
        for (int l = 0; l < 8; ++l) gibbs[l].push_back(m[l]);
    }

    // Laplace-style proposal: prior precision plus binomial information at the empirical logits.
    Eigen::MatrixXd H = Omega;
    for (int l = 0; l < 8; ++l) {
        const double p = static_cast<double>(z[l]) / n[l];
        H += n[l] * p * (1 - p) * P.row(l).transpose() * P.row(l);
    }
    const Eigen::MatrixXd cov = (2.38 * 2.38 / L.size()) * H.inverse();
    const auto mh = oracle::metropolis(P, Omega, z, n, cov, 1500000, 50000, 10, 99);
    CHECK(mh.acceptance > 0.1);
    for (int l = 0; l < 8; ++l) {
        std::vector<double> ref;
        ref.reserve(mh.draws.size());
        for (const auto& e : mh.draws) ref.push_back((P * e)[l]);
        const double se = std::sqrt(std::pow(batch_means_se(gibbs[l]), 2) + std::pow(batch_means_se(ref), 2));
        CAPTURE(l);
        CHECK(std::abs(th::mean(gibbs[l]) - th::mean(ref)) < 3.0 * se);
        CHECK(std::sqrt(th::variance(gibbs[l])) == doctest::Approx(std::sqrt(th::variance(ref))).epsilon(0.08));
    }
}

TEST_CASE("phi draws") {
    Rng rng(4);
    PhiCounts counts(1, 2);
    counts.ones[counts.index(1, 0, 0)] = 3;
    counts.zeros[counts.index(1, 0, 0)] = 1;
    LatentClassParams par(1, 2, 1);
    std::vector<double> a, b;
    for (int i = 0; i < 50000; ++i) {
        sample_phi(counts, 1.0, 1.0, rng, par);
        a.push_back(par.phi_at(1, 0, 0));
        b.push_back(par.phi_at(1, 0, 1));
    }
    // Beta(4, 2) and Beta(1, 1).
    CHECK(std::abs(th::mean(a) - 4.0 / 6.0) < 3.0 * th::se_mean(a));
    CHECK(std::abs(th::variance(a) - 8.0 / (36.0 * 7.0)) < 3.0 * th::se_variance(a));
    CHECK(std::abs(th::mean(b) - 0.5) < 3.0 * th::se_mean(b));
}

TEST_CASE("missing symptoms contribute to neither phi count") {
    // Symptom 1 is never observed, so its phi draws follow the Beta(1, 1) prior.
    std::vector<SurveyRecord> recs;
    for (int i = 0; i < 60; ++i) recs.push_back(th::record(std::to_string(i), 1, 1, 1, 1, {1, kMissing}));
    const Dataset data(GridDims{2, 1, 1}, 2, recs);
    PriorSpec spec;
    spec.variant = PriorVariant::UnstructuredBaseline;
    GibbsSampler s(data, spec, 1);
    Rng rng(6);
    s.initialize(rng);
    std::vector<double> miss, seen;
    for (int it = 0; it < 20000; ++it) {
        s.sweep(rng);
        miss.push_back(s.state().latent.phi_at(1, 0, 1));
        seen.push_back(s.state().latent.phi_at(1, 0, 0));
    }
    CHECK(std::abs(th::mean(miss) - 0.5) < 3.0 * th::se_mean(miss));
    CHECK(std::abs(th::variance(miss) - 1.0 / 12.0) < 3.0 * th::se_variance(miss));
    CHECK(th::mean(seen) == doctest::Approx(61.0 / 62.0).epsilon(1e-3));
}

TEST_CASE("stick draws") {
    Rng rng(7);
    std::vector<double> v1, v2;
    const std::vector<int> empty{0, 0, 0};
    const std::vector<int> counts{2, 3};
    for (int i = 0; i < 50000; ++i) {
        const auto a = sample_sticks(empty, 2.0, rng);
        REQUIRE(a.back() == 1.0);
        v1.push_back(a[0]);
        const auto b = sample_sticks(counts, 2.0, rng);
        REQUIRE(b.back() == 1.0);
        v2.push_back(b[0]);
    }
    CHECK(std::abs(th::mean(v1) - 1.0 / 3.0) < 3.0 * th::se_mean(v1));
    CHECK(std::abs(th::mean(v2) - 3.0 / 8.0) < 3.0 * th::se_mean(v2));  // Beta(3, 5)
    CHECK(std::abs(th::variance(v2) - 15.0 / (64.0 * 9.0)) < 3.0 * th::se_variance(v2));
}

TEST_CASE("stick-breaking concentration draws") {
    Rng rng(8);
    const std::vector<double> v{0.5, 1.0};
    const std::vector<double> k1{1.0};
    std::vector<double> a, b;
    for (int i = 0; i < 50000; ++i) {
        a.push_back(sample_sb_concentration(v, 1.0, 1.0, rng));
        b.push_back(sample_sb_concentration(k1, 2.0, 3.0, rng));
    }
    const double rate = 1.0 - std::log(0.5);
    CHECK(rate == doctest::Approx(1.693).epsilon(1e-3));
    CHECK(std::abs(th::mean(a) - 2.0 / rate) < 3.0 * th::se_mean(a));
    CHECK(std::abs(th::variance(a) - 2.0 / (rate * rate)) < 3.0 * th::se_variance(a));
    CHECK(std::abs(th::mean(b) - 2.0 / 3.0) < 3.0 * th::se_mean(b));
    CHECK_THROWS_AS(sample_sb_concentration(std::vector<double>{1.0, 1.0}, 1, 1, rng), InvalidArgument);
}

TEST_CASE("conjugate pi draws") {
    Rng rng(9);
    std::vector<double> a, b, c;
    const std::vector<int> z0{0, 30}, n0{0, 100};
    const std::vector<int> zp{10, 5}, np{20, 30};
    for (int i = 0; i < 50000; ++i) {
        const auto u = sample_pi_unstructured(z0, n0, rng);
        a.push_back(u[0]);
        b.push_back(u[1]);
        c.push_back(sample_pi_pooled(zp, np, rng));
    }
    CHECK(std::abs(th::mean(a) - 0.5) < 3.0 * th::se_mean(a));
    CHECK(std::abs(th::variance(a) - 1.0 / 12.0) < 3.0 * th::se_variance(a));
    CHECK(std::abs(th::mean(b) - 31.0 / 102.0) < 3.0 * th::se_mean(b));
    CHECK(std::abs(th::mean(c) - 16.0 / 52.0) < 3.0 * th::se_mean(c));
    CHECK_THROWS_AS(sample_pi_unstructured(std::vector<int>{3}, std::vector<int>{2}, rng), InvalidArgument);
}

TEST_CASE("verified causes are never overwritten and lambda stays a simplex") {
    const Dataset data = small_masked(3, 2, 4, 25, 3, 17);
    for (auto v : {PriorVariant::RW1, PriorVariant::UnstructuredBaseline, PriorVariant::TimeOnly}) {
        PriorSpec spec;
        spec.variant = v;
        GibbsSampler s(data, spec, 3);
        Rng rng(1);
        s.initialize(rng);
        for (int it = 0; it < 50; ++it) {
            s.sweep(rng);
            for (std::size_t i = 0; i < data.size(); ++i)
                if (data.records()[i].verified) REQUIRE(s.state().causes[i] == *data.records()[i].cause);
            for (double p : s.state().pi) REQUIRE((p > 0.0 && p < 1.0));
            REQUIRE_NOTHROW(s.state().latent.validate());
            for (int z : s.state().classes) REQUIRE((z >= 0 && z < 3));
        }
    }
}

TEST_CASE("run_chain draw bookkeeping") {
    const Dataset data = small_masked(2, 2, 3, 15, 2, 3);
    PriorSpec spec;
    ChainConfig cfg = short_config(60, 20, 2);
    cfg.thinning = 3;
    cfg.chains = 2;
    const auto out = run_chain(data, spec, cfg);
    CHECK(cfg.retained_per_chain() == 13);
    CHECK(out.draws.size() == 26);
    CHECK(out.draws.front().iteration == 23);
    CHECK(out.draws[13].chain == 1);
    CHECK(out.grid == data.grid());
    for (const auto& d : out.draws) {
        REQUIRE(d.pi.size() == 8u);
        for (double p : d.pi) REQUIRE((p > 0.0 && p < 1.0));
        REQUIRE(d.eta.size() == static_cast<std::size_t>(EtaLayout::full(2, 2).size()));
        REQUIRE(d.sigma2_time > 0.0);
        REQUIRE(d.phi.size() == 2u * 2 * 3);
        REQUIRE(d.lambda.size() == 2u * 8 * 2);
    }
    CHECK(out.phi_mean.size() == 12u);
}

TEST_CASE("fixed seeds give bit-identical draws, and chain 0 does not depend on the chain count") {
    const Dataset data = small_masked(2, 3, 4, 20, 2, 8);
    PriorSpec spec;
    const auto cfg = short_config(80, 30, 2, 1234);
    const auto a = run_chain(data, spec, cfg);
    const auto b = run_chain(data, spec, cfg);
    REQUIRE(a.draws.size() == b.draws.size());
    for (std::size_t i = 0; i < a.draws.size(); ++i) {
        CHECK(a.draws[i].pi == b.draws[i].pi);
        CHECK(a.draws[i].eta == b.draws[i].eta);
        CHECK(a.draws[i].phi == b.draws[i].phi);
    }
    auto cfg2 = cfg;
    cfg2.chains = 3;
    const auto c = run_chain(data, spec, cfg2);
    for (std::size_t i = 0; i < a.draws.size(); ++i) CHECK(c.draws[i].pi == a.draws[i].pi);
    CHECK(c.draws[a.draws.size()].pi != a.draws[0].pi);
}

TEST_CASE("configuration errors and warnings") {
    const Dataset data = small_masked(2, 2, 3, 10, 2, 4);
    PriorSpec spec;
    auto cfg = short_config(10, 10);
    CHECK_THROWS_AS(run_chain(data, spec, cfg), InvalidArgument);
    cfg = short_config(10, 2, 0);
    CHECK_THROWS_AS(run_chain(data, spec, cfg), InvalidArgument);
    cfg = short_config(10, 2);
    CHECK_THROWS_AS(run_chain(Dataset(GridDims{2, 1, 1}, 1, {}), spec, cfg), InvalidArgument);

    std::vector<SurveyRecord> recs;
    for (const auto& r : data.records()) {
        auto q = r;
        q.verified = false;
        q.cause.reset();
        recs.push_back(q);
    }
    const auto none = run_chain(Dataset(data.grid(), 3, recs), spec, cfg);
    CHECK(none.warnings.size() == 1u);
    for (auto& q : recs) {
        q.verified = true;
        q.cause = 1;
    }
    const auto single = run_chain(Dataset(data.grid(), 3, recs), spec, cfg);
    REQUIRE(single.warnings.size() == 1u);
    CHECK(single.warnings[0].find("one cause") != std::string::npos);
}

TEST_CASE("all records verified: causes fixed and K = 1 pooled posterior is the Beta posterior") {
    Rng rng(12);
    std::vector<SurveyRecord> recs;
    int ones = 0;
    for (int i = 0; i < 2000; ++i) {
        const int y = rng.bernoulli(0.3) ? 1 : 0;
        ones += y;
        recs.push_back(th::record(std::to_string(i), rng.uniform_int(1, 2), rng.uniform_int(1, 3), rng.uniform_int(1, 2), y,
                                  {static_cast<std::int8_t>(rng.bernoulli(0.5)), static_cast<std::int8_t>(rng.bernoulli(0.2))}));
    }
    const Dataset data(GridDims{2, 3, 2}, 2, recs);
    PriorSpec spec;
    spec.variant = PriorVariant::Unstratified;
    const auto out = run_chain(data, spec, short_config(20200, 200, 1));
    std::vector<double> pi;
    for (const auto& d : out.draws) {
        for (double p : d.pi) REQUIRE(p == d.pi[0]);
        pi.push_back(d.pi[0]);
    }
    const double a = 1.0 + ones, b = 1.0 + 2000 - ones;
    CHECK(std::abs(th::mean(pi) - a / (a + b)) < 3.0 * batch_means_se(pi));
    CHECK(out.working_grid == GridDims{1, 1, 1});
}

TEST_CASE("time-only variant works on the time grid with dummy symptoms") {
    const Dataset data = small_masked(4, 3, 3, 15, 2, 21);
    PriorSpec spec;
    spec.variant = PriorVariant::TimeOnly;
    const auto out = run_chain(data, spec, short_config(40, 10, 2));
    CHECK(out.working_grid == GridDims{1, 4, 1});
    CHECK(out.symptoms == 3 + 1 + 2);
    CHECK(out.symptom_names == std::vector<std::string>{"x1", "x2", "x3", "sex_1", "age_2", "age_3"});
    const GridDims& g = out.grid;
    for (const auto& d : out.draws) {
        REQUIRE(d.eta.size() == 1u + 4 + 4);
        REQUIRE(std::isnan(d.sigma2_age));
        for (int i = 0; i < g.size(); ++i) {
            const auto [s, t, a] = g.unflat(i);
            REQUIRE(d.pi[i] == d.pi[g.flat(1, t, 1)]);
        }
    }

    GibbsSampler s(data, spec, 2);
    for (std::size_t i = 0; i < s.num_records(); ++i) {
        const auto& r = data.records()[i];
        const auto x = s.record_symptoms(i);
        REQUIRE(x[3] == (r.sex == 1 ? 1 : 0));
        REQUIRE(x[4] == (r.age == 2 ? 1 : 0));
        REQUIRE(x[5] == (r.age == 3 ? 1 : 0));
        REQUIRE(s.record_stratum(i) == r.time - 1);
    }
}

TEST_CASE("fixed-effect variant reports no effect variances") {
    const Dataset data = small_masked(2, 2, 3, 10, 2, 22);
    PriorSpec spec;
    spec.variant = PriorVariant::FixedEffect;
    const auto out = run_chain(data, spec, short_config(20, 5, 2));
    for (const auto& d : out.draws) {
        CHECK(std::isnan(d.sigma2_time));
        CHECK(std::isnan(d.sigma2_age));
        CHECK(d.sigma2_eps > 0.0);
    }
    spec.variant = PriorVariant::UnstructuredBaseline;
    const auto un = run_chain(data, spec, short_config(20, 5, 2));
    CHECK(un.draws[0].eta.empty());
    CHECK(std::isnan(un.draws[0].sigma2_eps));
}

}
