#include "hlcm/evaluation.hpp"
#include "hlcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hlcm {

double quantile(std::span<const double> samples, double q) {
    if (samples.empty()) throw InvalidArgument("quantile of an empty sample");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double h = (static_cast<double>(s.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

IntervalSummary summarize(std::span<const double> samples, double level) {
    if (samples.empty()) throw InvalidArgument("summary of an empty sample");
    const double tail = 0.5 * (1.0 - level);
    IntervalSummary out;
    out.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    out.lower = quantile(samples, tail);
    out.upper = quantile(samples, 1.0 - tail);
    // Guard lower <= mean <= upper against rounding on near-degenerate samples.
    out.lower = std::min(out.lower, out.mean);
    out.upper = std::max(out.upper, out.mean);
    return out;
}

std::vector<IntervalSummary> summarize_columns(const Eigen::MatrixXd& draws, double level) {
    std::vector<IntervalSummary> out;
    out.reserve(draws.cols());
    std::vector<double> col(draws.rows());
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
        for (Eigen::Index i = 0; i < draws.rows(); ++i) col[i] = draws(i, j);
        out.push_back(summarize(col, level));
    }
    return out;
}

Eigen::VectorXd aggregate_overall(const Eigen::MatrixXd& pi_draws, std::span<const int> sizes) {
    if (static_cast<Eigen::Index>(sizes.size()) != pi_draws.cols())
        throw InvalidArgument("stratum size grid does not match the draw grid");
    Eigen::VectorXd w(pi_draws.cols());
    double total = 0.0;
    for (Eigen::Index g = 0; g < w.size(); ++g) {
        w[g] = sizes[g];
        total += sizes[g];
    }
    if (!(total > 0.0)) throw InvalidArgument("aggregation needs a positive total count");
    return pi_draws * (w / total);
}

Eigen::MatrixXd aggregate_by_time(const Eigen::MatrixXd& pi_draws, const GridDims& grid, std::span<const int> sizes) {
    if (static_cast<Eigen::Index>(sizes.size()) != pi_draws.cols() || grid.size() != pi_draws.cols())
        throw InvalidArgument("stratum size grid does not match the draw grid");
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(grid.size(), grid.times);
    std::vector<double> totals(grid.times, 0.0);
    for (int g = 0; g < grid.size(); ++g) totals[grid.unflat(g)[1] - 1] += sizes[g];
    for (int g = 0; g < grid.size(); ++g) {
        const int t = grid.unflat(g)[1] - 1;
        if (totals[t] > 0.0) W(g, t) = sizes[g] / totals[t];
    }
    Eigen::MatrixXd out = pi_draws * W;
    for (int t = 0; t < grid.times; ++t)
        if (!(totals[t] > 0.0)) out.col(t).setConstant(std::numeric_limits<double>::quiet_NaN());
    return out;
}

CsmfEstimate estimate_csmf(const Eigen::MatrixXd& pi_draws, const GridDims& grid, std::span<const int> sizes) {
    CsmfEstimate est;
    est.strata = summarize_columns(pi_draws);
    const Eigen::VectorXd overall = aggregate_overall(pi_draws, sizes);
    est.overall = summarize({overall.data(), static_cast<std::size_t>(overall.size())});
    const Eigen::MatrixXd by_time = aggregate_by_time(pi_draws, grid, sizes);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> col(by_time.rows());
    for (Eigen::Index t = 0; t < by_time.cols(); ++t) {
        if (by_time.rows() == 0 || std::isnan(by_time(0, t))) {
            est.by_time.push_back({nan, nan, nan});
            continue;
        }
        for (Eigen::Index i = 0; i < by_time.rows(); ++i) col[i] = by_time(i, t);
        est.by_time.push_back(summarize(col));
    }
    return est;
}

double aggregate_truth(std::span<const double> truth, std::span<const int> sizes) {
    if (truth.size() != sizes.size()) throw InvalidArgument("truth grid does not match the size grid");
    double num = 0.0, den = 0.0;
    for (std::size_t g = 0; g < truth.size(); ++g) {
        num += sizes[g] * truth[g];
        den += sizes[g];
    }
    if (!(den > 0.0)) throw InvalidArgument("aggregation needs a positive total count");
    return num / den;
}

std::vector<double> aggregate_truth_by_time(std::span<const double> truth, const GridDims& grid,
                                            std::span<const int> sizes) {
    if (static_cast<int>(truth.size()) != grid.size() || truth.size() != sizes.size())
        throw InvalidArgument("truth grid does not match the size grid");
    std::vector<double> num(grid.times, 0.0), den(grid.times, 0.0);
    for (int g = 0; g < grid.size(); ++g) {
        const int t = grid.unflat(g)[1] - 1;
        num[t] += sizes[g] * truth[g];
        den[t] += sizes[g];
    }
    for (int t = 0; t < grid.times; ++t)
        num[t] = den[t] > 0.0 ? num[t] / den[t] : std::numeric_limits<double>::quiet_NaN();
    return num;
}

double crps(std::span<const double> samples, double truth) {
    if (samples.empty()) throw InvalidArgument("CRPS of an empty sample");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double M = static_cast<double>(s.size());
    double abs_dev = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        abs_dev += std::abs(s[i] - truth);
        // sum_{i,j} |x_i - x_j| = 2 sum_i (2i - M - 1) x_(i) with 1-based i.
        spread += (2.0 * static_cast<double>(i + 1) - M - 1.0) * s[i];
    }
    return std::max(0.0, abs_dev / M - spread / (M * M));
}

double crps_improvement(std::span<const double> model, std::span<const double> baseline, double truth) {
    return crps(baseline, truth) - crps(model, truth);
}

std::optional<double> mcc_from_counts(long tp, long fn, long fp, long tn) {
    const double a = static_cast<double>(tp + fp), b = static_cast<double>(tp + fn);
    const double c = static_cast<double>(tn + fp), d = static_cast<double>(tn + fn);
    if (a == 0 || b == 0 || c == 0 || d == 0) return std::nullopt;
    return (static_cast<double>(tp) * tn - static_cast<double>(fp) * fn) / std::sqrt(a * b * c * d);
}

std::optional<double> mcc(std::span<const std::int8_t> a, std::span<const std::int8_t> b) {
    if (a.size() != b.size()) throw InvalidArgument("MCC columns differ in length");
    long tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == kMissing || b[i] == kMissing) continue;
        if (a[i] == 1 && b[i] == 1) ++tp;
        else if (a[i] == 0 && b[i] == 0) ++tn;
        else if (a[i] == 0 && b[i] == 1) ++fp;
        else ++fn;
    }
    if (tp + tn + fp + fn < 2) throw InvalidArgument("MCC needs at least 2 complete pairs");
    return mcc_from_counts(tp, fn, fp, tn);
}

LatentProfileReport latent_profile_report(std::span<const double> phi_mean, std::span<const double> lambda_mean,
                                          int classes, int symptoms, const GridDims& working_grid) {
    const int K = classes, p = symptoms, G = working_grid.size();
    if (static_cast<int>(phi_mean.size()) != 2 * K * p || static_cast<int>(lambda_mean.size()) != 2 * G * K)
        throw InvalidArgument("latent posterior means have unexpected dimensions");
    LatentProfileReport rep;
    for (int c = 0; c < 2; ++c) {
        std::vector<double> expected(K, 0.0);
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < p; ++j) expected[k] += phi_mean[(c * K + k) * p + j];
        auto& ord = rep.order[c];
        ord.resize(K);
        std::iota(ord.begin(), ord.end(), 0);
        std::stable_sort(ord.begin(), ord.end(), [&](int l, int r) { return expected[l] < expected[r]; });
        for (int rank = 0; rank < K; ++rank) {
            const int k = ord[rank];
            for (int j = 0; j < p; ++j) rep.phi.push_back({c, rank + 1, k + 1, j + 1, phi_mean[(c * K + k) * p + j]});
        }
        for (int g = 0; g < G; ++g) {
            const auto [s, t, a] = working_grid.unflat(g);
            for (int rank = 0; rank < K; ++rank) {
                const int k = ord[rank];
                rep.lambda.push_back({c, s, t, a, rank + 1, k + 1, lambda_mean[(c * G + g) * K + k]});
            }
        }
    }
    return rep;
}

LatentProfileReport latent_profile_report(const PosteriorDraws& draws) {
    return latent_profile_report(draws.phi_mean, draws.lambda_mean, draws.classes, draws.symptoms, draws.working_grid);
}

double coverage(const Eigen::MatrixXd& pi_draws, std::span<const double> truth, double level) {
    if (static_cast<Eigen::Index>(truth.size()) != pi_draws.cols())
        throw InvalidArgument("truth grid does not match the draw grid");
    if (truth.empty()) throw InvalidArgument("coverage over zero strata");
    const auto summaries = summarize_columns(pi_draws, level);
    int hit = 0;
    for (std::size_t g = 0; g < truth.size(); ++g)
        if (summaries[g].lower <= truth[g] && truth[g] <= summaries[g].upper) ++hit;
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double batch_means_se(std::span<const double> series, int batches) {
    const std::size_t n = series.size();
    if (batches < 2 || n < static_cast<std::size_t>(2 * batches)) throw InvalidArgument("series too short for batch means");
    const std::size_t len = n / batches;
    std::vector<double> means(batches);
    for (int b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += series[b * len + i];
        means[b] = s / static_cast<double>(len);
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / batches;
    double ss = 0.0;
    for (double m : means) ss += (m - grand) * (m - grand);
    return std::sqrt(ss / (batches - 1) / batches);
}

} // namespace hlcm
