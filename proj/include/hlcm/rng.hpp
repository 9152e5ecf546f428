#ifndef HLCM_RNG_HPP
#define HLCM_RNG_HPP

#include <cstdint>
#include <random>
#include <span>

namespace hlcm {

/// splitmix64 finalizer. Used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed of stream `index` under `master`: mix_seed(master ^ mix_seed(tag + index)).
/// Chains use tag 1, replicates tag 2, mechanism draws tag 3.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index);

/// Seedable random source used by every sampler in the library.
///
/// Wraps a 64-bit Mersenne twister. Not thread-safe; give each thread its own
/// instance (see derive_seed).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    double uniform();                 // [0, 1)
    double uniform_open();            // (0, 1)
    double normal();                  // N(0, 1)
    double exponential();             // Exp(1)
    double gamma(double shape, double rate);
    double beta(double a, double b);  // clamped into the open interval (0, 1)
    double inverse_gamma(double shape, double rate);
    bool bernoulli(double p);
    int uniform_int(int lo, int hi);  // inclusive

    /// Draw an index with probability proportional to exp(log_weights[k]).
    int categorical_log(std::span<const double> log_weights);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::gamma_distribution<double> gamma_;
};

} // namespace hlcm

#endif
