#include "hlcm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hlcm {

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index) {
    return mix_seed(master ^ mix_seed((tag << 32) + index));
}

double Rng::uniform() {
    return std::generate_canonical<double, 53>(engine_);
}

double Rng::uniform_open() {
    double u = 0.0;
    do {
        u = uniform();
    } while (u <= 0.0);
    return u;
}

double Rng::normal() { return normal_(engine_); }

double Rng::exponential() { return -std::log(uniform_open()); }

double Rng::gamma(double shape, double rate) {
    using P = std::gamma_distribution<double>::param_type;
    return gamma_(engine_, P(shape, 1.0 / rate));
}

double Rng::beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    double v = x / (x + y);
    if (!(v > 0.0)) v = std::numeric_limits<double>::min();
    if (!(v < 1.0)) v = std::nextafter(1.0, 0.0);
    return v;
}

double Rng::inverse_gamma(double shape, double rate) {
    return 1.0 / gamma(shape, rate);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

int Rng::uniform_int(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(engine_);
}

int Rng::categorical_log(std::span<const double> log_weights) {
    const double mx = *std::max_element(log_weights.begin(), log_weights.end());
    double total = 0.0;
    for (double w : log_weights) total += std::exp(w - mx);
    double u = uniform() * total;
    const int n = static_cast<int>(log_weights.size());
    for (int k = 0; k < n; ++k) {
        u -= std::exp(log_weights[k] - mx);
        if (u < 0.0) return k;
    }
    // Rounding left a sliver of mass; return the last index with positive weight.
    for (int k = n - 1; k >= 0; --k)
        if (std::isfinite(log_weights[k])) return k;
    return n - 1;
}

} // namespace hlcm
