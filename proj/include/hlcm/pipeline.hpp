#ifndef HLCM_PIPELINE_HPP
#define HLCM_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hlcm/io.hpp"
#include "hlcm/synthetic.hpp"

namespace hlcm {

struct SimulateOptions {
    VerificationCase kind = VerificationCase::Ignorable;
    int replicates = 1;
    std::uint64_t seed = 1;
    int times = 10;
    int ages = 8;
    int symptoms = 10;
    int per_stratum = 100;
    int classes = 10;
    std::optional<std::filesystem::path> truth_model;  // TrueModel JSON; default truth otherwise
    std::optional<std::filesystem::path> labeled;      // semi-synthetic source population
    double fraction = 0.5;
    bool write_labeled = false;  // also write the fully labelled replicate

    void validate() const;
};

struct SimulatedReplicate {
    MaskedDataset masked;
    Dataset labeled;
    VerificationMechanism mechanism;
    TruthSidecar truth;
};

/// Replicate r of a synthetic study: population from `model`, then verification.
SimulatedReplicate simulate_synthetic(const TrueModel& model, VerificationCase kind, std::uint64_t seed, int replicate);

/// Replicate r of a semi-synthetic study: stratified resample of `population`,
/// then verification. Truth is the full population's empirical CSMF.
SimulatedReplicate simulate_semisynthetic(const Dataset& population, double fraction, VerificationCase kind,
                                          std::uint64_t seed, int replicate);

/// Writes truth.json (or population_truth.json) and rep_NNN.csv with
/// rep_NNN.mechanism.json and rep_NNN.truth.json per replicate. Returns the dataset paths.
std::vector<std::filesystem::path> simulate_to_directory(const SimulateOptions& opts, const std::filesystem::path& dir);

struct ManifestEntry {
    std::string replicate;
    std::string model;
    std::filesystem::path fit;
    std::filesystem::path dataset;  // may be empty
    std::filesystem::path truth;
};

/// CSV with header replicate,model,fit,dataset,truth. Relative paths resolve
/// against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Writes bias_overall.csv, bias_time.csv, crps.csv, crps_improvement.csv and coverage.csv.
void evaluate_manifest(const std::vector<ManifestEntry>& entries, const std::string& baseline,
                       const std::filesystem::path& out_dir);

/// Writes phi_heatmap.csv, lambda_stack.csv and csmf_trajectories.csv, plus
/// symptom_mcc.csv when a dataset is supplied.
void write_report(const PosteriorDraws& fit, const std::filesystem::path& out_dir,
                  const std::optional<TruthSidecar>& truth = std::nullopt,
                  const std::optional<Dataset>& data = std::nullopt);

/// Per-stratum fraction of records without a verified cause (NaN where empty).
std::vector<double> unverified_fraction(const Dataset& data);

} // namespace hlcm

#endif
