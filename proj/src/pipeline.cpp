#include "hlcm/pipeline.hpp"
#include "hlcm/error.hpp"
#include "hlcm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hlcm {

namespace fs = std::filesystem;

namespace {

std::ofstream open_table(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::string replicate_stem(int r, int total) {
    const std::size_t width = std::max<std::size_t>(3, std::to_string(total).size());
    std::string n = std::to_string(r + 1);
    return "rep_" + std::string(width - std::min(width, n.size()), '0') + n;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<double> column(const Eigen::MatrixXd& m, int j) {
    return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

std::string na_or(const std::vector<double>& v, int g) {
    return v.empty() ? std::string("NA") : format_number(v[g]);
}

} // namespace

void SimulateOptions::validate() const {
    if (replicates < 1) throw InvalidArgument("--replicates must be >= 1");
    if (!labeled) {
        if (!truth_model) {
            if (times < 1 || ages < 1) throw InvalidArgument("--t and --a must be >= 1");
            if (symptoms < 3) throw InvalidArgument("--p must be >= 3");
            if (per_stratum < 1) throw InvalidArgument("--n-per-stratum must be >= 1");
            if (classes < 1) throw InvalidArgument("--k must be >= 1");
        }
    } else if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw InvalidArgument("--fraction must lie in (0, 1]");
    }
}

SimulatedReplicate simulate_synthetic(const TrueModel& model, VerificationCase kind, std::uint64_t seed, int replicate) {
    Rng rng(derive_seed(seed, 2, replicate));
    Rng mech_rng(derive_seed(seed, 3, replicate));
    SimulatedReplicate out;
    out.labeled = generate_population(model, rng);
    out.mechanism = build_mechanism(model.grid.times, model.grid.ages, model.symptoms, kind, mech_rng);
    out.masked = apply_verification(out.labeled, out.mechanism, rng);
    out.truth.kind = "synthetic";
    out.truth.grid = model.grid;
    out.truth.pi = model.pi;
    out.truth.stratum_sizes = model.stratum_sizes;
    out.truth.empirical_pi = empirical_csmf(out.labeled);
    out.truth.true_causes = out.masked.true_causes;
    return out;
}

SimulatedReplicate simulate_semisynthetic(const Dataset& population, double fraction, VerificationCase kind,
                                          std::uint64_t seed, int replicate) {
    Rng rng(derive_seed(seed, 2, replicate));
    Rng mech_rng(derive_seed(seed, 3, replicate));
    SimulatedReplicate out;
    out.labeled = resample_semisynthetic(population, fraction, rng);
    const GridDims& grid = population.grid();
    out.mechanism = build_mechanism(grid.times, grid.ages, population.num_symptoms(), kind, mech_rng);
    out.masked = apply_verification(out.labeled, out.mechanism, rng);
    out.truth.kind = "semisynthetic";
    out.truth.grid = grid;
    out.truth.pi = empirical_csmf(population);
    out.truth.stratum_sizes = StratumGrid::from(out.labeled).counts;
    out.truth.empirical_pi = empirical_csmf(out.labeled);
    out.truth.true_causes = out.masked.true_causes;
    return out;
}

std::vector<fs::path> simulate_to_directory(const SimulateOptions& opts, const fs::path& dir) {
    opts.validate();
    fs::create_directories(dir);
    std::vector<fs::path> written;
    std::optional<Dataset> population;
    TrueModel model;
    if (opts.labeled) {
        population = read_dataset(*opts.labeled);
        for (const auto& r : population->records())
            if (!r.verified) throw InvalidArgument("semi-synthetic source must be fully labelled (record " + r.id + ")");
    } else {
        model = opts.truth_model ? read_true_model(*opts.truth_model)
                                 : default_true_model(opts.times, opts.ages, opts.symptoms, opts.classes, opts.per_stratum);
        write_true_model(dir / "true_model.json", model);
    }
    for (int r = 0; r < opts.replicates; ++r) {
        const SimulatedReplicate rep = population
            ? simulate_semisynthetic(*population, opts.fraction, opts.kind, opts.seed, r)
            : simulate_synthetic(model, opts.kind, opts.seed, r);
        const std::string stem = replicate_stem(r, opts.replicates);
        const fs::path data_path = dir / (stem + ".csv");
        write_dataset(data_path, rep.masked.data);
        write_mechanism(dir / (stem + ".mechanism.json"), rep.mechanism);
        write_truth(dir / (stem + ".truth.json"), rep.truth);
        if (opts.write_labeled) write_dataset(dir / (stem + ".labeled.csv"), rep.labeled);
        written.push_back(data_path);
    }
    return written;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) -> fs::path {
        if (p.empty() || p == "NA") return {};
        fs::path q(p);
        return q.is_absolute() ? q : base / q;
    };
    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos) header = split_fields(line);
    }
    if (header != std::vector<std::string>{"replicate", "model", "fit", "dataset", "truth"})
        throw ParseError(path.string() + ": expected header replicate,model,fit,dataset,truth");
    std::vector<ManifestEntry> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_fields(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != 5) throw ParseError(where + ": expected 5 fields");
        if (f[0].empty() || f[1].empty() || f[2].empty() || f[4].empty())
            throw ParseError(where + ": replicate, model, fit and truth are required");
        out.push_back({f[0], f[1], resolve(f[2]), resolve(f[3]), resolve(f[4])});
    }
    if (out.empty()) throw ParseError(path.string() + ": manifest lists no fits");
    return out;
}

std::vector<double> unverified_fraction(const Dataset& data) {
    const int G = data.grid().size();
    std::vector<double> n(G, 0.0), u(G, 0.0);
    for (const auto& r : data.records()) {
        const int g = data.stratum_of(r);
        n[g] += 1.0;
        if (!r.verified) u[g] += 1.0;
    }
    std::vector<double> out(G, std::nan(""));
    for (int g = 0; g < G; ++g)
        if (n[g] > 0) out[g] = u[g] / n[g];
    return out;
}

void evaluate_manifest(const std::vector<ManifestEntry>& entries, const std::string& baseline, const fs::path& out_dir) {
    if (entries.empty()) throw InvalidArgument("nothing to evaluate");
    fs::create_directories(out_dir);
    auto bias_overall = open_table(out_dir / "bias_overall.csv");
    auto bias_time = open_table(out_dir / "bias_time.csv");
    auto crps_out = open_table(out_dir / "crps.csv");
    auto improve_out = open_table(out_dir / "crps_improvement.csv");
    auto coverage_out = open_table(out_dir / "coverage.csv");
    bias_overall << "replicate,model,estimate,lower,upper,truth,bias\n";
    bias_time << "replicate,model,t,n,estimate,lower,upper,truth,bias\n";
    crps_out << "replicate,model,level,s,t,a,n,unverified_fraction,truth,crps\n";
    improve_out << "replicate,model,baseline,level,s,t,a,n,unverified_fraction,truth,improvement\n";
    coverage_out << "replicate,model,strata,coverage\n";

    // Per entry: CRPS by stratum, then per time, then overall.
    struct Scored {
        GridDims grid;
        std::vector<int> sizes;
        std::vector<double> unverified;
        std::vector<double> truth;
        std::vector<double> crps;
    };
    std::map<std::pair<std::string, std::string>, Scored> scored;
    std::vector<std::pair<std::string, std::string>> order;

    for (const auto& e : entries) {
        const PosteriorDraws fit = load_fit(e.fit);
        const TruthSidecar truth = read_truth(e.truth);
        if (!(truth.grid == fit.grid))
            throw InvalidArgument("truth grid of '" + e.truth.string() + "' does not match fit '" + e.fit.string() + "'");
        std::vector<double> unverified;
        if (!e.dataset.empty()) {
            const Dataset data = read_dataset(e.dataset, {fit.grid.times, fit.grid.ages});
            unverified = unverified_fraction(data);
        }
        const GridDims& grid = fit.grid;
        const auto& sizes = fit.stratum_counts;
        const Eigen::MatrixXd pi = fit.pi_matrix();
        const std::string key = e.replicate + "," + e.model;

        const Eigen::VectorXd overall = aggregate_overall(pi, sizes);
        const std::vector<double> overall_v(overall.data(), overall.data() + overall.size());
        const IntervalSummary os = summarize(overall_v);
        const double overall_truth = aggregate_truth(truth.pi, sizes);
        bias_overall << key << ',' << format_number(os.mean) << ',' << format_number(os.lower) << ','
                     << format_number(os.upper) << ',' << format_number(overall_truth) << ','
                     << format_number(bias(os.mean, overall_truth)) << '\n';

        const Eigen::MatrixXd by_time = aggregate_by_time(pi, grid, sizes);
        const std::vector<double> time_truth = aggregate_truth_by_time(truth.pi, grid, sizes);
        std::vector<int> n_time(grid.times, 0);
        std::vector<double> u_time(grid.times, 0.0);
        for (int g = 0; g < grid.size(); ++g) {
            const int t = grid.unflat(g)[1] - 1;
            n_time[t] += sizes[g];
            if (!unverified.empty() && sizes[g] > 0) u_time[t] += unverified[g] * sizes[g];
        }

        Scored sc{grid, sizes, unverified, truth.pi, std::vector<double>(grid.size() + grid.times + 1, std::nan(""))};
        std::vector<double> covered_truth;
        std::vector<int> covered_cols;
        for (int g = 0; g < grid.size(); ++g) {
            if (sizes[g] == 0) continue;
            const auto [s, t, a] = grid.unflat(g);
            const double c = crps(column(pi, g), truth.pi[g]);
            sc.crps[g] = c;
            crps_out << key << ",stratum," << s << ',' << t << ',' << a << ',' << sizes[g] << ',' << na_or(unverified, g)
                     << ',' << format_number(truth.pi[g]) << ',' << format_number(c) << '\n';
            covered_truth.push_back(truth.pi[g]);
            covered_cols.push_back(g);
        }
        for (int t = 0; t < grid.times; ++t) {
            if (n_time[t] == 0) continue;
            const auto draws_t = column(by_time, t);
            const IntervalSummary ts = summarize(draws_t);
            bias_time << key << ',' << t + 1 << ',' << n_time[t] << ',' << format_number(ts.mean) << ','
                      << format_number(ts.lower) << ',' << format_number(ts.upper) << ',' << format_number(time_truth[t])
                      << ',' << format_number(bias(ts.mean, time_truth[t])) << '\n';
            const double c = crps(draws_t, time_truth[t]);
            sc.crps[grid.size() + t] = c;
            crps_out << key << ",time,NA," << t + 1 << ",NA," << n_time[t] << ','
                     << (unverified.empty() ? std::string("NA") : format_number(u_time[t] / n_time[t])) << ','
                     << format_number(time_truth[t]) << ',' << format_number(c) << '\n';
        }
        {
            const double c = crps(overall_v, overall_truth);
            sc.crps.back() = c;
            int n = 0;
            double u = 0.0;
            for (int t = 0; t < grid.times; ++t) {
                n += n_time[t];
                u += u_time[t];
            }
            crps_out << key << ",overall,NA,NA,NA," << n << ','
                     << (unverified.empty() ? std::string("NA") : format_number(u / n)) << ','
                     << format_number(overall_truth) << ',' << format_number(c) << '\n';
        }

        Eigen::MatrixXd sub(pi.rows(), static_cast<Eigen::Index>(covered_cols.size()));
        for (std::size_t j = 0; j < covered_cols.size(); ++j) sub.col(j) = pi.col(covered_cols[j]);
        coverage_out << key << ',' << covered_cols.size() << ',' << format_number(coverage(sub, covered_truth)) << '\n';

        const auto id = std::make_pair(e.replicate, e.model);
        if (scored.count(id)) throw InvalidArgument("manifest lists replicate " + e.replicate + ", model " + e.model + " twice");
        scored.emplace(id, std::move(sc));
        order.push_back(id);
    }

    if (std::none_of(order.begin(), order.end(), [&](const auto& id) { return id.second == baseline; }))
        throw InvalidArgument("baseline model '" + baseline + "' does not appear in the manifest");
    for (const auto& id : order) {
        if (id.second == baseline) continue;
        auto base = scored.find({id.first, baseline});
        if (base == scored.end()) continue;
        const Scored& m = scored.at(id);
        const Scored& b = base->second;
        if (!(m.grid == b.grid) || m.truth != b.truth)
            throw InvalidArgument("replicate " + id.first + ": model and baseline disagree on grid or truth");
        const GridDims& grid = m.grid;
        const std::string key = id.first + "," + id.second + "," + baseline;
        for (int g = 0; g < grid.size(); ++g) {
            if (std::isnan(m.crps[g]) || std::isnan(b.crps[g])) continue;
            const auto [s, t, a] = grid.unflat(g);
            improve_out << key << ",stratum," << s << ',' << t << ',' << a << ',' << m.sizes[g] << ','
                        << na_or(m.unverified, g) << ',' << format_number(m.truth[g]) << ','
                        << format_number(b.crps[g] - m.crps[g]) << '\n';
        }
        for (int t = 0; t < grid.times; ++t) {
            const int k = grid.size() + t;
            if (std::isnan(m.crps[k]) || std::isnan(b.crps[k])) continue;
            improve_out << key << ",time,NA," << t + 1 << ",NA,NA,NA,NA," << format_number(b.crps[k] - m.crps[k]) << '\n';
        }
        improve_out << key << ",overall,NA,NA,NA,NA,NA,NA," << format_number(b.crps.back() - m.crps.back()) << '\n';
    }

    for (auto* out : {&bias_overall, &bias_time, &crps_out, &improve_out, &coverage_out})
        if (!*out) throw IoError("failed writing evaluation tables in '" + out_dir.string() + "'");
}

void write_report(const PosteriorDraws& fit, const fs::path& out_dir, const std::optional<TruthSidecar>& truth,
                  const std::optional<Dataset>& data) {
    if (fit.draws.empty()) throw InvalidArgument("fit has no retained draws");
    if (truth && !(truth->grid == fit.grid)) throw InvalidArgument("truth grid does not match the fit");
    fs::create_directories(out_dir);

    const LatentProfileReport rep = latent_profile_report(fit);
    {
        auto out = open_table(out_dir / "phi_heatmap.csv");
        out << "cause,rank,class,symptom,value\n";
        for (const auto& c : rep.phi)
            out << c.cause << ',' << c.rank << ',' << c.latent_class << ',' << fit.symptom_names.at(c.symptom - 1) << ','
                << format_number(c.value) << '\n';
    }
    {
        auto out = open_table(out_dir / "lambda_stack.csv");
        out << "cause,s,t,a,rank,class,value\n";
        for (const auto& c : rep.lambda)
            out << c.cause << ',' << c.sex << ',' << c.time << ',' << c.age << ',' << c.rank << ',' << c.latent_class
                << ',' << format_number(c.value) << '\n';
    }
    {
        const GridDims& grid = fit.grid;
        const auto& sizes = fit.stratum_counts;
        const Eigen::MatrixXd pi = fit.pi_matrix();
        const CsmfEstimate est = estimate_csmf(pi, grid, sizes);
        std::vector<double> time_truth;
        double overall_truth = std::nan("");
        if (truth) {
            time_truth = aggregate_truth_by_time(truth->pi, grid, sizes);
            overall_truth = aggregate_truth(truth->pi, sizes);
        }
        std::vector<int> n_time(grid.times, 0);
        for (int g = 0; g < grid.size(); ++g) n_time[grid.unflat(g)[1] - 1] += sizes[g];
        auto out = open_table(out_dir / "csmf_trajectories.csv");
        out << "level,s,t,a,n,mean,lower,upper" << (truth ? ",truth" : "") << '\n';
        auto row = [&](const IntervalSummary& e) {
            out << format_number(e.mean) << ',' << format_number(e.lower) << ',' << format_number(e.upper);
        };
        for (int g = 0; g < grid.size(); ++g) {
            const auto [s, t, a] = grid.unflat(g);
            out << "stratum," << s << ',' << t << ',' << a << ',' << sizes[g] << ',';
            row(est.strata[g]);
            if (truth) out << ',' << format_number(truth->pi[g]);
            out << '\n';
        }
        for (int t = 0; t < grid.times; ++t) {
            out << "time,NA," << t + 1 << ",NA," << n_time[t] << ',';
            row(est.by_time[t]);
            if (truth) out << ',' << format_number(time_truth[t]);
            out << '\n';
        }
        int n = 0;
        for (int s : sizes) n += s;
        out << "overall,NA,NA,NA," << n << ',';
        row(est.overall);
        if (truth) out << ',' << format_number(overall_truth);
        out << '\n';
    }
    if (data) {
        const GridDims& grid = data->grid();
        const int p = data->num_symptoms();
        auto out = open_table(out_dir / "symptom_mcc.csv");
        out << "cause,t,a,symptom_i,symptom_j,pairs,mcc\n";
        // Verified records grouped by (cause, t, a), pooled over sex.
        std::vector<std::vector<const SurveyRecord*>> cells(2 * grid.times * grid.ages);
        for (const auto& r : data->records())
            if (r.verified) cells[(*r.cause * grid.times + (r.time - 1)) * grid.ages + (r.age - 1)].push_back(&r);
        std::vector<std::int8_t> xi, xj;
        for (int c = 0; c < 2; ++c)
            for (int t = 1; t <= grid.times; ++t)
                for (int a = 1; a <= grid.ages; ++a) {
                    const auto& recs = cells[(c * grid.times + (t - 1)) * grid.ages + (a - 1)];
                    for (int i = 0; i < p; ++i)
                        for (int j = i + 1; j < p; ++j) {
                            xi.clear();
                            xj.clear();
                            int pairs = 0;
                            for (const auto* r : recs) {
                                xi.push_back(r->symptoms[i]);
                                xj.push_back(r->symptoms[j]);
                                if (r->symptoms[i] != kMissing && r->symptoms[j] != kMissing) ++pairs;
                            }
                            std::optional<double> v;
                            if (pairs >= 2) v = mcc(xi, xj);
                            out << c << ',' << t << ',' << a << ',' << data->symptom_names()[i] << ','
                                << data->symptom_names()[j] << ',' << pairs << ','
                                << (v ? format_number(*v) : std::string("NA")) << '\n';
                        }
                }
    }
}

} // namespace hlcm
