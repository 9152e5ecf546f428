#include "hlcm/polya_gamma.hpp"
#include "hlcm/error.hpp"

#include <cmath>
#include <numbers>

namespace hlcm {
namespace {

constexpr double kPi = std::numbers::pi;
// Truncation point splitting the left (inverse Gaussian) and right
// (exponential) proposals of J*(1, z).
constexpr double kTrunc = 0.64;

double log_norm_cdf(double x) {
    if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
    // Mills-ratio asymptote.
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * kPi);
}

// n-th coefficient of the alternating series for the J*(1, 0) density.
double series_coef(int n, double x) {
    const double k = (n + 0.5) * kPi;
    if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
    if (x <= 0.0) return 0.0;
    const double e = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) -
                     2.0 * (n + 0.5) * (n + 0.5) / x;
    return std::exp(e);
}

// Probability of taking the exponential branch.
double right_mass(double z) {
    const double t = kTrunc;
    const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
    const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
    const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
    const double x0 = std::log(fz) + fz * t;
    const double xb = x0 - z + log_norm_cdf(b);
    const double xa = x0 + z + log_norm_cdf(a);
    const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
    return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian IG(1/z, 1) truncated to (0, kTrunc).
double truncated_inverse_gaussian(double z, Rng& rng) {
    const double t = kTrunc;
    double x = t + 1.0;
    if (1.0 / t > z) {
        // Mean beyond the truncation point: propose from the truncated
        // Levy distribution and accept with exp(-z^2 x / 2).
        double alpha = 0.0;
        while (rng.uniform() > alpha) {
            double e1 = rng.exponential();
            double e2 = rng.exponential();
            while (e1 * e1 > 2.0 * e2 / t) {
                e1 = rng.exponential();
                e2 = rng.exponential();
            }
            x = 1.0 + e1 * t;
            x = t / (x * x);
            alpha = std::exp(-0.5 * z * z * x);
        }
    } else {
        const double mu = 1.0 / z;
        while (x > t) {
            double y = rng.normal();
            y *= y;
            const double half_mu = 0.5 * mu;
            const double mu_y = mu * y;
            x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
            if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
        }
    }
    return x;
}

} // namespace

double sample_pg1(double c, Rng& rng) {
    // PG(1, c) = J*(1, c/2) / 4.
    const double z = std::abs(c) * 0.5;
    const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
    const double p_right = right_mass(z);
    for (;;) {
        double x = 0.0;
        if (rng.uniform() < p_right)
            x = kTrunc + rng.exponential() / fz;
        else
            x = truncated_inverse_gaussian(z, rng);

        double s = series_coef(0, x);
        const double y = rng.uniform() * s;
        for (int n = 1;; ++n) {
            if (n % 2 == 1) {
                s -= series_coef(n, x);
                if (y <= s) return 0.25 * x;
            } else {
                s += series_coef(n, x);
                if (y > s) break;
            }
        }
    }
}

double pg_mean(PgParams params) {
    const double c = std::abs(params.c);
    if (c < 1e-4) return params.b * (0.25 - c * c / 48.0);
    return params.b / (2.0 * c) * std::tanh(0.5 * c);
}

double pg_variance(PgParams params) {
    const double c = std::abs(params.c);
    if (c < 1e-3) return params.b * (1.0 / 24.0 - c * c / 120.0);
    const double ch = std::cosh(0.5 * c);
    return params.b * (std::sinh(c) - c) / (4.0 * c * c * c * ch * ch);
}

double sample_pg(PgParams params, Rng& rng) {
    if (params.b < 1) throw InvalidArgument("PG shape b must be >= 1");
    if (!std::isfinite(params.c)) throw InvalidArgument("PG tilt c must be finite");
    if (params.b <= kPgExactSumLimit) {
        double s = 0.0;
        for (int i = 0; i < params.b; ++i) s += sample_pg1(params.c, rng);
        return s;
    }
    const double m = pg_mean(params);
    const double sd = std::sqrt(pg_variance(params));
    for (;;) {
        const double w = m + sd * rng.normal();
        if (w > 0.0) return w;
    }
}

} // namespace hlcm
