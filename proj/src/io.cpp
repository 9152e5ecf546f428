#include "hlcm/io.hpp"
#include "hlcm/error.hpp"
#include "hlcm/evaluation.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace hlcm {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
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

int parse_int(const std::string& cell, const std::string& where, const char* column) {
    int v = 0;
    const auto* end = cell.data() + cell.size();
    auto [p, ec] = std::from_chars(cell.data(), end, v);
    if (ec != std::errc{} || p != end)
        throw ParseError(where + ": column '" + column + "' is not an integer: '" + cell + "'");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

json read_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json grid_json(const GridDims& g) { return {{"sexes", g.sexes}, {"times", g.times}, {"ages", g.ages}}; }
GridDims grid_from(const json& j) {
    return GridDims{j.at("sexes").get<int>(), j.at("times").get<int>(), j.at("ages").get<int>()};
}

// NaN is not representable in JSON; store null.
json number_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) {
        if (std::isnan(x)) a.push_back(nullptr);
        else a.push_back(x);
    }
    return a;
}
std::vector<double> numbers_from(const json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.is_null() ? std::nan("") : x.get<double>());
    return v;
}

} // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "NA";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

Dataset parse_dataset(std::istream& in, const DatasetReadOptions& opts, const std::string& source) {
    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw ParseError(source + ": no records (empty file)");
    static const char* required[] = {"id", "sex", "time", "age", "verified", "cause"};
    if (header.size() < 7) throw ParseError(source + ":" + std::to_string(line_no) + ": header needs id,sex,time,age,verified,cause and at least one symptom column");
    for (int c = 0; c < 6; ++c)
        if (header[c] != required[c])
            throw ParseError(source + ":" + std::to_string(line_no) + ": expected header column '" + required[c] +
                             "', found '" + header[c] + "'");
    const std::vector<std::string> names(header.begin() + 6, header.end());
    const int p = static_cast<int>(names.size());

    std::vector<SurveyRecord> records;
    int max_t = 0, max_a = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != 6 + p)
            throw ParseError(where + ": expected " + std::to_string(6 + p) + " fields, found " + std::to_string(cells.size()));
        SurveyRecord r;
        r.id = cells[0];
        if (r.id.empty()) throw ParseError(where + ": empty id");
        r.sex = parse_int(cells[1], where, "sex");
        r.time = parse_int(cells[2], where, "time");
        r.age = parse_int(cells[3], where, "age");
        if (r.sex != 1 && r.sex != 2) throw ParseError(where + ": sex must be 1 or 2");
        if (r.time < 1) throw ParseError(where + ": time index must be >= 1");
        if (r.age < 1) throw ParseError(where + ": age index must be >= 1");
        const int verified = parse_int(cells[4], where, "verified");
        if (verified != 0 && verified != 1) throw ParseError(where + ": verified must be 0 or 1");
        r.verified = verified == 1;
        if (cells[5] != "NA") {
            const int c = parse_int(cells[5], where, "cause");
            if (c != 0 && c != 1) throw ParseError(where + ": cause must be 0, 1 or NA");
            r.cause = c;
        }
        if (r.verified && !r.cause) throw ParseError(where + ": verified row (id " + r.id + ") has cause NA");
        if (!r.verified && r.cause) throw ParseError(where + ": unverified row (id " + r.id + ") carries a cause");
        r.symptoms.resize(p);
        for (int j = 0; j < p; ++j) {
            const auto& cell = cells[6 + j];
            if (cell == "NA") r.symptoms[j] = kMissing;
            else if (cell == "0") r.symptoms[j] = 0;
            else if (cell == "1") r.symptoms[j] = 1;
            else throw ParseError(where + ": symptom '" + names[j] + "' must be 0, 1 or NA, found '" + cell + "'");
        }
        max_t = std::max(max_t, r.time);
        max_a = std::max(max_a, r.age);
        records.push_back(std::move(r));
    }
    if (records.empty()) throw ParseError(source + ": no records");
    if (opts.times != 0 && opts.times < max_t)
        throw ParseError(source + ": time index " + std::to_string(max_t) + " out of range for T = " + std::to_string(opts.times));
    if (opts.ages != 0 && opts.ages < max_a)
        throw ParseError(source + ": age index " + std::to_string(max_a) + " out of range for A = " + std::to_string(opts.ages));
    const GridDims grid{2, opts.times ? opts.times : max_t, opts.ages ? opts.ages : max_a};
    try {
        return Dataset(grid, p, std::move(records), names);
    } catch (const InvalidArgument& e) {
        throw ParseError(source + ": " + e.what());
    }
}

Dataset read_dataset(const std::filesystem::path& path, const DatasetReadOptions& opts) {
    auto in = open_in(path);
    return parse_dataset(in, opts, path.string());
}

void write_dataset(std::ostream& out, const Dataset& data) {
    out << "id,sex,time,age,verified,cause";
    for (const auto& n : data.symptom_names()) out << ',' << n;
    out << '\n';
    for (const auto& r : data.records()) {
        out << r.id << ',' << r.sex << ',' << r.time << ',' << r.age << ',' << (r.verified ? 1 : 0) << ',';
        if (r.cause) out << *r.cause;
        else out << "NA";
        for (auto x : r.symptoms) {
            out << ',';
            if (x == kMissing) out << "NA";
            else out << static_cast<int>(x);
        }
        out << '\n';
    }
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
    auto out = open_out(path);
    write_dataset(out, data);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_truth(const std::filesystem::path& path, const TruthSidecar& truth) {
    json j;
    j["kind"] = truth.kind;
    j["grid"] = grid_json(truth.grid);
    j["pi"] = number_array(truth.pi);
    j["stratum_sizes"] = truth.stratum_sizes;
    j["empirical_pi"] = number_array(truth.empirical_pi);
    j["true_causes"] = truth.true_causes;
    write_json(path, j);
}

TruthSidecar read_truth(const std::filesystem::path& path) {
    const json j = read_json(path);
    try {
        TruthSidecar t;
        t.kind = j.value("kind", "synthetic");
        t.grid = grid_from(j.at("grid"));
        t.pi = numbers_from(j.at("pi"));
        if (j.contains("stratum_sizes")) t.stratum_sizes = j.at("stratum_sizes").get<std::vector<int>>();
        if (j.contains("empirical_pi")) t.empirical_pi = numbers_from(j.at("empirical_pi"));
        if (j.contains("true_causes")) t.true_causes = j.at("true_causes").get<std::vector<int>>();
        if (static_cast<int>(t.pi.size()) != t.grid.size())
            throw ParseError(path.string() + ": pi grid has " + std::to_string(t.pi.size()) + " entries, expected " +
                             std::to_string(t.grid.size()));
        return t;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_true_model(const std::filesystem::path& path, const TrueModel& m) {
    json j;
    j["grid"] = grid_json(m.grid);
    j["classes"] = m.classes;
    j["symptoms"] = m.symptoms;
    j["pi"] = m.pi;
    j["stratum_sizes"] = m.stratum_sizes;
    j["phi"] = m.latent.phi;
    j["sticks"] = m.latent.sticks;
    j["concentration"] = m.latent.concentration;
    write_json(path, j);
}

TrueModel read_true_model(const std::filesystem::path& path) {
    const json j = read_json(path);
    try {
        TrueModel m;
        m.grid = grid_from(j.at("grid"));
        m.classes = j.at("classes").get<int>();
        m.symptoms = j.at("symptoms").get<int>();
        m.pi = j.at("pi").get<std::vector<double>>();
        m.stratum_sizes = j.at("stratum_sizes").get<std::vector<int>>();
        m.latent = LatentClassParams(m.classes, m.symptoms, m.grid.size());
        m.latent.phi = j.at("phi").get<std::vector<double>>();
        m.latent.sticks = j.at("sticks").get<std::vector<double>>();
        m.latent.concentration = j.at("concentration").get<std::vector<double>>();
        if (m.latent.phi.size() != static_cast<std::size_t>(2 * m.classes * m.symptoms) ||
            m.latent.sticks.size() != static_cast<std::size_t>(2 * m.grid.size() * m.classes) ||
            m.latent.concentration.size() != static_cast<std::size_t>(2 * m.grid.size()))
            throw ParseError(path.string() + ": latent parameter arrays have unexpected sizes");
        m.latent.refresh_weights();
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_mechanism(const std::filesystem::path& path, const VerificationMechanism& m) {
    json j;
    j["case"] = m.kind == VerificationCase::Ignorable ? "i" : "ii";
    j["time_effect"] = m.time_effect;
    j["age_effect"] = m.age_effect;
    j["symptoms"] = m.symptoms;
    j["symptom_effect"] = m.symptom_effect;
    j["c1"] = m.cause_effect;
    j["c2"] = m.noncause_effect;
    j["active_symptoms"] = m.active_symptoms;
    write_json(path, j);
}

VerificationMechanism read_mechanism(const std::filesystem::path& path) {
    const json j = read_json(path);
    try {
        VerificationMechanism m;
        m.kind = j.at("case").get<std::string>() == "ii" ? VerificationCase::CauseDependent : VerificationCase::Ignorable;
        m.time_effect = j.at("time_effect").get<std::vector<double>>();
        m.age_effect = j.at("age_effect").get<std::vector<double>>();
        m.symptoms = j.at("symptoms").get<int>();
        m.symptom_effect = j.at("symptom_effect").get<std::vector<double>>();
        m.cause_effect = j.at("c1").get<double>();
        m.noncause_effect = j.at("c2").get<double>();
        m.active_symptoms = j.at("active_symptoms").get<std::vector<std::vector<int>>>();
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_pi_draws(std::ostream& out, const PosteriorDraws& draws) {
    out << "chain,iter,s,t,a,pi\n";
    const GridDims& grid = draws.grid;
    for (const auto& d : draws.draws)
        for (int g = 0; g < grid.size(); ++g) {
            const auto [s, t, a] = grid.unflat(g);
            out << d.chain << ',' << d.iteration << ',' << s << ',' << t << ',' << a << ',' << format_number(d.pi[g]) << '\n';
        }
}

void save_fit(const std::filesystem::path& dir, const PosteriorDraws& draws) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "draws.csv");
        write_pi_draws(out, draws);
        if (!out) throw IoError("failed writing draws.csv");
    }
    {
        auto out = open_out(dir / "variances.csv");
        out << "chain,iter,sigma2_time,sigma2_age,sigma2_eps\n";
        for (const auto& d : draws.draws)
            out << d.chain << ',' << d.iteration << ',' << format_number(d.sigma2_time) << ','
                << format_number(d.sigma2_age) << ',' << format_number(d.sigma2_eps) << '\n';
    }
    if (draws.draws.empty()) throw InvalidArgument("fit has no retained draws");
    const Eigen::MatrixXd pi = draws.pi_matrix();
    const CsmfEstimate est = estimate_csmf(pi, draws.grid, draws.stratum_counts);
    {
        auto out = open_out(dir / "summary.csv");
        out << "s,t,a,n,mean,lower,upper\n";
        for (int g = 0; g < draws.grid.size(); ++g) {
            const auto [s, t, a] = draws.grid.unflat(g);
            const auto& e = est.strata[g];
            out << s << ',' << t << ',' << a << ',' << draws.stratum_counts[g] << ',' << format_number(e.mean) << ','
                << format_number(e.lower) << ',' << format_number(e.upper) << '\n';
        }
    }
    {
        auto out = open_out(dir / "summary_aggregate.csv");
        out << "level,t,mean,lower,upper\n";
        out << "overall,NA," << format_number(est.overall.mean) << ',' << format_number(est.overall.lower) << ','
            << format_number(est.overall.upper) << '\n';
        for (int t = 0; t < draws.grid.times; ++t) {
            const auto& e = est.by_time[t];
            out << "time," << t + 1 << ',' << format_number(e.mean) << ',' << format_number(e.lower) << ','
                << format_number(e.upper) << '\n';
        }
    }
    json j;
    j["variant"] = std::string(variant_name(draws.variant));
    j["grid"] = grid_json(draws.grid);
    j["working_grid"] = grid_json(draws.working_grid);
    j["classes"] = draws.classes;
    j["symptoms"] = draws.symptoms;
    j["symptom_names"] = draws.symptom_names;
    j["stratum_counts"] = draws.stratum_counts;
    j["chains"] = draws.chains;
    j["retained_draws"] = draws.draws.size();
    j["phi_mean"] = draws.phi_mean;
    j["lambda_mean"] = draws.lambda_mean;
    j["warnings"] = draws.warnings;
    write_json(dir / "latent.json", j);
}

PosteriorDraws load_fit(const std::filesystem::path& dir) {
    const json j = read_json(dir / "latent.json");
    PosteriorDraws d;
    try {
        d.variant = parse_variant(j.at("variant").get<std::string>());
        d.grid = grid_from(j.at("grid"));
        d.working_grid = grid_from(j.at("working_grid"));
        d.classes = j.at("classes").get<int>();
        d.symptoms = j.at("symptoms").get<int>();
        d.symptom_names = j.at("symptom_names").get<std::vector<std::string>>();
        d.stratum_counts = j.at("stratum_counts").get<std::vector<int>>();
        d.chains = j.at("chains").get<int>();
        d.phi_mean = j.at("phi_mean").get<std::vector<double>>();
        d.lambda_mean = j.at("lambda_mean").get<std::vector<double>>();
        d.warnings = j.at("warnings").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ParseError((dir / "latent.json").string() + ": " + e.what());
    }

    const auto path = dir / "draws.csv";
    auto in = open_in(path);
    std::string line;
    int line_no = 1;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"chain", "iter", "s", "t", "a", "pi"})
        throw ParseError(path.string() + ":1: expected header chain,iter,s,t,a,pi");
    const int G = d.grid.size();
    std::map<std::pair<int, int>, std::size_t> index;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        const auto cells = split_csv_line(line);
        if (cells.size() != 6) throw ParseError(where + ": expected 6 fields");
        const int chain = parse_int(cells[0], where, "chain");
        const int iter = parse_int(cells[1], where, "iter");
        const int s = parse_int(cells[2], where, "s"), t = parse_int(cells[3], where, "t"), a = parse_int(cells[4], where, "a");
        if (!d.grid.contains(s, t, a)) throw ParseError(where + ": stratum index out of range");
        double v = 0.0;
        auto [p, ec] = std::from_chars(cells[5].data(), cells[5].data() + cells[5].size(), v);
        if (ec != std::errc{} || p != cells[5].data() + cells[5].size()) throw ParseError(where + ": pi is not a number");
        auto [it, inserted] = index.try_emplace({chain, iter}, d.draws.size());
        if (inserted) {
            Draw dr;
            dr.chain = chain;
            dr.iteration = iter;
            dr.pi.assign(G, std::nan(""));
            d.draws.push_back(std::move(dr));
        }
        d.draws[it->second].pi[d.grid.flat(s, t, a)] = v;
    }
    for (const auto& dr : d.draws)
        for (double v : dr.pi)
            if (std::isnan(v)) throw ParseError(path.string() + ": draw (chain " + std::to_string(dr.chain) + ", iter " +
                                                std::to_string(dr.iteration) + ") is missing strata");
    if (d.draws.empty()) throw ParseError(path.string() + ": no draws");
    return d;
}

} // namespace hlcm
