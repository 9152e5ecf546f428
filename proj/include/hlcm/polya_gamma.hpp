#ifndef HLCM_POLYA_GAMMA_HPP
#define HLCM_POLYA_GAMMA_HPP

#include "hlcm/rng.hpp"

namespace hlcm {

/// Parameters of PG(b, c). b is a stratum count, so integral and >= 1.
struct PgParams {
    int b = 1;
    double c = 0.0;
};

/// Counts above this are drawn from a moment-matched normal instead of a sum
/// of exact PG(1, c) variates.
inline constexpr int kPgExactSumLimit = 30;

/// Draw from PG(b, c). Exact for b <= kPgExactSumLimit.
double sample_pg(PgParams params, Rng& rng);

/// Exact PG(1, c) draw by the alternating-series accept/reject scheme.
double sample_pg1(double c, Rng& rng);

/// E[PG(b, c)] = b / (2c) * tanh(c / 2), with limit b / 4 at c = 0.
double pg_mean(PgParams params);

/// Var[PG(b, c)] = b (sinh c - c) / (4 c^3 cosh^2(c / 2)), with limit b / 24 at c = 0.
double pg_variance(PgParams params);

} // namespace hlcm

#endif
