#include "hlcm/synthetic.hpp"
#include "hlcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hlcm {

namespace {

double standardized(int i, int n) {
    if (n < 2) return 0.0;
    return (2.0 * i - n - 1.0) / (n - 1.0);
}

// Partial Fisher-Yates: `count` distinct picks from `pool`, in pick order.
std::vector<int> choose_without_replacement(std::vector<int> pool, int count, Rng& rng) {
    const int n = static_cast<int>(pool.size());
    for (int i = 0; i < count; ++i) {
        const int j = rng.uniform_int(i, n - 1);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

} // namespace

std::vector<double> generate_true_csmf(int times, int ages, const TrendCoefficients& coef) {
    if (times < 1 || ages < 1) throw InvalidArgument("grid dimensions must be >= 1");
    GridDims grid{2, times, ages};
    std::vector<double> pi(grid.size());
    for (int g = 0; g < grid.size(); ++g) {
        const auto [s, t, a] = grid.unflat(g);
        const double u = standardized(t, times);
        const double v = standardized(a, ages);
        pi[g] = inv_logit(coef.intercept + coef.time_linear * u + coef.time_quadratic * u * u +
                          coef.age_linear * v + coef.age_quadratic * v * v);
    }
    return pi;
}

void TrueModel::validate() const {
    if (static_cast<int>(pi.size()) != grid.size() || static_cast<int>(stratum_sizes.size()) != grid.size())
        throw InvalidArgument("true model grids do not match its dimensions");
    for (double p : pi)
        if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("true CSMFs must lie in (0, 1)");
    for (int n : stratum_sizes)
        if (n < 0) throw InvalidArgument("stratum sizes must be non-negative");
    if (latent.classes != classes || latent.symptoms != symptoms || latent.strata != grid.size())
        throw InvalidArgument("latent parameter dimensions do not match the true model");
    latent.validate();
}

TrueModel draw_true_model(GridDims grid, std::vector<double> pi, std::vector<int> stratum_sizes,
                          int classes, int symptoms, Rng& rng,
                          double a_phi, double b_phi, double a_omega, double b_omega) {
    TrueModel m;
    m.grid = grid;
    m.classes = classes;
    m.symptoms = symptoms;
    m.pi = std::move(pi);
    m.stratum_sizes = std::move(stratum_sizes);
    m.latent = LatentClassParams(classes, symptoms, grid.size());
    for (double& f : m.latent.phi) f = rng.beta(a_phi, b_phi);
    for (int c = 0; c < 2; ++c)
        for (int g = 0; g < grid.size(); ++g) {
            const double w = rng.gamma(a_omega, b_omega);
            m.latent.concentration_at(c, g) = w;
            auto v = m.latent.sticks_of(c, g);
            for (int k = 0; k + 1 < classes; ++k) v[k] = rng.beta(1.0, w);
            v[classes - 1] = 1.0;
        }
    m.latent.refresh_weights();
    m.validate();
    return m;
}

TrueModel default_true_model(int times, int ages, int symptoms, int classes, int per_stratum,
                             std::uint64_t seed) {
    GridDims grid{2, times, ages};
    Rng rng(seed);
    return draw_true_model(grid, generate_true_csmf(times, ages), std::vector<int>(grid.size(), per_stratum),
                           classes, symptoms, rng);
}

Dataset generate_population(const TrueModel& model, Rng& rng) {
    model.validate();
    std::vector<SurveyRecord> records;
    records.reserve(std::accumulate(model.stratum_sizes.begin(), model.stratum_sizes.end(), std::size_t{0}));
    std::vector<double> logw(model.classes);
    std::size_t next_id = 1;
    for (int g = 0; g < model.grid.size(); ++g) {
        const auto [s, t, a] = model.grid.unflat(g);
        for (int i = 0; i < model.stratum_sizes[g]; ++i) {
            SurveyRecord r;
            r.id = std::to_string(next_id++);
            r.sex = s;
            r.time = t;
            r.age = a;
            const int y = rng.bernoulli(model.pi[g]) ? 1 : 0;
            auto w = model.latent.weights_of(y, g);
            for (int k = 0; k < model.classes; ++k) logw[k] = std::log(w[k]);
            const int z = rng.categorical_log(logw);
            r.verified = true;
            r.cause = y;
            r.symptoms.resize(model.symptoms);
            for (int j = 0; j < model.symptoms; ++j)
                r.symptoms[j] = rng.bernoulli(model.latent.phi_at(y, z, j)) ? 1 : 0;
            records.push_back(std::move(r));
        }
    }
    return Dataset(model.grid, model.symptoms, std::move(records));
}

void VerificationMechanism::validate() const {
    const std::size_t T = time_effect.size(), A = age_effect.size();
    if (T == 0 || A == 0 || symptoms < 0 || symptom_effect.size() != T * A * symptoms)
        throw InvalidArgument("verification mechanism dimensions are inconsistent");
    if (kind == VerificationCase::Ignorable && (cause_effect != 0.0 || noncause_effect != 0.0))
        throw InvalidArgument("case (i) mechanisms must have c1 = c2 = 0");
    if (kind == VerificationCase::CauseDependent &&
        !(cause_effect > -0.4 && cause_effect <= 0.0 && noncause_effect == -cause_effect))
        throw InvalidArgument("case (ii) mechanisms need c1 in (-0.4, 0] and c2 = -c1");
}

VerificationMechanism build_mechanism(int times, int ages, int symptoms, VerificationCase kind, Rng& rng) {
    if (times < 1 || ages < 1) throw InvalidArgument("grid dimensions must be >= 1");
    if (symptoms < 3) throw InvalidArgument("verification mechanism needs at least 3 symptoms");
    VerificationMechanism m;
    m.kind = kind;
    m.symptoms = symptoms;
    m.time_effect.assign(times, 0.1);
    m.time_effect.front() = 1.2;
    m.time_effect.back() = 1.2;
    m.age_effect.assign(ages, -1.6);
    for (int a = 1; a <= ages; ++a)
        if (a <= 2 || a >= ages - 1) m.age_effect[a - 1] = 0.4;

    std::vector<int> all(symptoms);
    std::iota(all.begin(), all.end(), 0);
    m.symptom_effect.assign(static_cast<std::size_t>(times) * ages * symptoms, 0.0);
    for (int t = 1; t <= times; ++t) {
        auto active = choose_without_replacement(all, 3, rng);
        std::sort(active.begin(), active.end());
        for (int a = 1; a <= ages; ++a)
            for (int j : active)
                m.symptom_effect[((t - 1) * ages + (a - 1)) * symptoms + j] = 0.1;
        m.active_symptoms.push_back(std::move(active));
    }
    if (kind == VerificationCase::CauseDependent) {
        // Unif(-0.4, 0): 1 - U lies in (0, 1].
        m.cause_effect = -0.4 * (1.0 - rng.uniform());
        if (m.cause_effect <= -0.4) m.cause_effect = std::nextafter(-0.4, 0.0);
        m.noncause_effect = -m.cause_effect;
    }
    return m;
}

double verification_probability(std::span<const std::int8_t> x, int age, int time, int cause,
                                const VerificationMechanism& mech) {
    if (time < 1 || time > static_cast<int>(mech.time_effect.size()) || age < 1 ||
        age > static_cast<int>(mech.age_effect.size()))
        throw InvalidArgument("stratum index outside the verification mechanism");
    if (static_cast<int>(x.size()) != mech.symptoms)
        throw InvalidArgument("symptom vector length does not match the verification mechanism");
    double r = mech.time_effect[time - 1] + mech.age_effect[age - 1];
    for (int j = 0; j < mech.symptoms; ++j)
        if (x[j] == 1) r += mech.symptom_coef(time, age, j);
    r += cause == 1 ? mech.cause_effect : mech.noncause_effect;
    return inv_logit(r);
}

MaskedDataset apply_verification(const Dataset& labeled, const VerificationMechanism& mech, Rng& rng) {
    mech.validate();
    MaskedDataset out;
    std::vector<SurveyRecord> records = labeled.records();
    out.true_causes.reserve(records.size());
    for (auto& r : records) {
        if (!r.cause) throw InvalidArgument("apply_verification needs every record labelled (id " + r.id + ")");
        const int y = *r.cause;
        out.true_causes.push_back(y);
        r.verified = rng.uniform() < verification_probability(r.symptoms, r.age, r.time, y, mech);
        if (!r.verified) r.cause.reset();
    }
    out.data = Dataset(labeled.grid(), labeled.num_symptoms(), std::move(records), labeled.symptom_names());
    return out;
}

Dataset resample_semisynthetic(const Dataset& labeled, double fraction, Rng& rng) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("resampling fraction must lie in (0, 1]");
    const GridDims& grid = labeled.grid();
    std::vector<std::vector<int>> by_cause[2];
    by_cause[0].resize(grid.size());
    by_cause[1].resize(grid.size());
    const auto& recs = labeled.records();
    for (int i = 0; i < static_cast<int>(recs.size()); ++i) {
        if (!recs[i].cause) throw InvalidArgument("semi-synthetic resampling needs a fully labelled dataset");
        by_cause[*recs[i].cause][labeled.stratum_of(recs[i])].push_back(i);
    }
    std::vector<int> keep;
    for (int g = 0; g < grid.size(); ++g) {
        const int n1 = static_cast<int>(by_cause[1][g].size());
        const int n0 = static_cast<int>(by_cause[0][g].size());
        const int n = n0 + n1;
        if (n == 0) continue;
        const int m = static_cast<int>(std::floor(fraction * n + 1e-9));
        int k1 = static_cast<int>(std::lround(static_cast<double>(m) * n1 / n));
        k1 = std::clamp(k1, std::max(0, m - n0), std::min(n1, m));
        const int k0 = m - k1;
        for (int i : choose_without_replacement(by_cause[1][g], k1, rng)) keep.push_back(i);
        for (int i : choose_without_replacement(by_cause[0][g], k0, rng)) keep.push_back(i);
    }
    std::sort(keep.begin(), keep.end());
    std::vector<SurveyRecord> out;
    out.reserve(keep.size());
    for (int i : keep) out.push_back(recs[i]);
    return Dataset(grid, labeled.num_symptoms(), std::move(out), labeled.symptom_names());
}

std::vector<double> empirical_csmf(const Dataset& labeled) {
    const int G = labeled.grid().size();
    std::vector<double> z(G, 0.0), n(G, 0.0);
    for (const auto& r : labeled.records()) {
        if (!r.cause) throw InvalidArgument("empirical CSMF needs a fully labelled dataset");
        const int g = labeled.stratum_of(r);
        n[g] += 1.0;
        z[g] += *r.cause;
    }
    std::vector<double> out(G, 0.0);
    for (int g = 0; g < G; ++g)
        if (n[g] > 0) out[g] = z[g] / n[g];
    return out;
}

} // namespace hlcm
