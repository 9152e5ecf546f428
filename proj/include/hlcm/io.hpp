#ifndef HLCM_IO_HPP
#define HLCM_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hlcm/gibbs.hpp"
#include "hlcm/model.hpp"
#include "hlcm/synthetic.hpp"

namespace hlcm {

/// Grid overrides for parsing; 0 infers the dimension from the data maxima.
struct DatasetReadOptions {
    int times = 0;
    int ages = 0;
};

/// CSV with header id,sex,time,age,verified,cause,<symptom columns>.
/// Symptom and cause cells take 0, 1 or NA. Errors name the offending line.
Dataset parse_dataset(std::istream& in, const DatasetReadOptions& opts = {}, const std::string& source = "<input>");
Dataset read_dataset(const std::filesystem::path& path, const DatasetReadOptions& opts = {});
void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// Shortest round-trip decimal, "NA" for NaN.
std::string format_number(double x);

/// Truth sidecar: the CSMF surface an evaluation compares against.
struct TruthSidecar {
    std::string kind;  // "synthetic" or "semisynthetic"
    GridDims grid;
    std::vector<double> pi;
    std::vector<int> stratum_sizes;
    std::vector<double> empirical_pi;
    std::vector<int> true_causes;  // per record of the replicate, may be empty
};

void write_truth(const std::filesystem::path& path, const TruthSidecar& truth);
TruthSidecar read_truth(const std::filesystem::path& path);

void write_true_model(const std::filesystem::path& path, const TrueModel& model);
TrueModel read_true_model(const std::filesystem::path& path);

void write_mechanism(const std::filesystem::path& path, const VerificationMechanism& mech);
VerificationMechanism read_mechanism(const std::filesystem::path& path);

/// Fit directory: draws.csv (chain,iter,s,t,a,pi), variances.csv, summary.csv,
/// summary_aggregate.csv and latent.json.
void save_fit(const std::filesystem::path& dir, const PosteriorDraws& draws);
/// Reads draws.csv and latent.json. Per-draw phi/lambda are not restored.
PosteriorDraws load_fit(const std::filesystem::path& dir);

void write_pi_draws(std::ostream& out, const PosteriorDraws& draws);

} // namespace hlcm

#endif
