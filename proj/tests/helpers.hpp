#ifndef HLCM_TESTS_HELPERS_HPP
#define HLCM_TESTS_HELPERS_HPP

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hlcm/model.hpp"
#include "hlcm/synthetic.hpp"

namespace th {

inline hlcm::SurveyRecord record(std::string id, int s, int t, int a, std::optional<int> cause,
                                 std::vector<std::int8_t> x) {
    hlcm::SurveyRecord r;
    r.id = std::move(id);
    r.sex = s;
    r.time = t;
    r.age = a;
    r.verified = cause.has_value();
    r.cause = cause;
    r.symptoms = std::move(x);
    return r;
}

inline double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// Standard error of the sample mean of iid draws.
inline double se_mean(std::span<const double> v) { return std::sqrt(variance(v) / static_cast<double>(v.size())); }

// Standard error of the sample variance of iid draws, from the fourth central moment.
inline double se_variance(std::span<const double> v) {
    const double m = mean(v);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = (x - m) * (x - m);
        m2 += d;
        m4 += d * d;
    }
    const double n = static_cast<double>(v.size());
    m2 /= n;
    m4 /= n;
    return std::sqrt((m4 - m2 * m2) / n);
}

} // namespace th

#endif
