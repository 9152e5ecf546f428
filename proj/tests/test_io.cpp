#include "doctest.h"

#include "helpers.hpp"
#include "hlcm/error.hpp"
#include "hlcm/io.hpp"
#include "hlcm/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hlcm;
namespace fs = std::filesystem;

namespace {

Dataset parse(const std::string& text, DatasetReadOptions opts = {}) {
    std::istringstream in(text);
    return parse_dataset(in, opts, "t.csv");
}

std::string parse_error(const std::string& text, DatasetReadOptions opts = {}) {
    try {
        parse(text, opts);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("hlcm_test_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("parse the worked row") {
    const auto d = parse("id,sex,time,age,verified,cause,x1,x2,x3\n7,1,3,2,1,1,0,NA,1\n");
    REQUIRE(d.size() == 1u);
    const auto& r = d.records()[0];
    CHECK(r.id == "7");
    CHECK(r.sex == 1);
    CHECK(r.time == 3);
    CHECK(r.age == 2);
    CHECK(r.verified);
    CHECK(*r.cause == 1);
    CHECK(r.symptoms == std::vector<std::int8_t>{0, kMissing, 1});
    CHECK(d.grid() == GridDims{2, 3, 2});
    CHECK(d.num_symptoms() == 3);
    CHECK(d.symptom_names() == std::vector<std::string>{"x1", "x2", "x3"});
}

TEST_CASE("overrides and whitespace") {
    const auto d = parse("id,sex,time,age,verified,cause,a\r\n q , 2 , 1 , 1 , 0 , NA , 1 \r\n\n", {5, 4});
    CHECK(d.grid() == GridDims{2, 5, 4});
    CHECK(d.records()[0].id == "q");
    CHECK_FALSE(d.records()[0].cause.has_value());
}

TEST_CASE("parse errors name the offending line") {
    const std::string h = "id,sex,time,age,verified,cause,x1\n";
    CHECK(parse_error("") == "t.csv: no records (empty file)");
    CHECK(parse_error(h) == "t.csv: no records");
    const auto na = parse_error(h + "a,1,1,1,0,NA,0\nb,1,1,1,1,NA,0\n");
    CHECK(na.find("t.csv:3") != std::string::npos);
    CHECK(na.find("(id b) has cause NA") != std::string::npos);
    CHECK(parse_error(h + "a,1,1,1,0,1,0\n").find("carries a cause") != std::string::npos);
    CHECK(parse_error(h + "a,1,1,1,0,NA\n").find("t.csv:2: expected 7 fields") == 0);
    CHECK(parse_error(h + "a,3,1,1,0,NA,0\n").find("sex") != std::string::npos);
    CHECK(parse_error(h + "a,1,0,1,0,NA,0\n").find("time") != std::string::npos);
    CHECK(parse_error(h + "a,1,x,1,0,NA,0\n").find("not an integer") != std::string::npos);
    CHECK(parse_error(h + "a,1,1,1,0,NA,2\n").find("must be 0, 1 or NA") != std::string::npos);
    CHECK(parse_error(h + "a,1,4,1,0,NA,0\n", {3, 0}).find("out of range") != std::string::npos);
    CHECK(parse_error("id,sex,time,age,verified,cause\na,1,1,1,0,NA\n").find("header") != std::string::npos);
    CHECK(parse_error("id,sex,time,age,cause,verified,x\n").find("expected header column 'verified'") !=
          std::string::npos);
    CHECK_THROWS_AS(read_dataset("/nonexistent/none.csv"), IoError);
}

TEST_CASE("dataset CSV round trip") {
    std::vector<SurveyRecord> recs{th::record("a", 1, 2, 3, 1, {1, 0, kMissing}),
                                   th::record("b", 2, 1, 1, std::nullopt, {kMissing, kMissing, kMissing}),
                                   th::record("c", 2, 4, 3, 0, {0, 0, 1})};
    const Dataset d(GridDims{2, 4, 3}, 3, recs, {"fever", "cough", "x3"});
    std::ostringstream out;
    write_dataset(out, d);
    std::istringstream in(out.str());
    CHECK(parse_dataset(in) == d);
}

TEST_CASE("simulated replicates round trip through CSV") {
    const auto dir = scratch("sim");
    SimulateOptions o;
    o.replicates = 2;
    o.times = 3;
    o.ages = 3;
    o.symptoms = 4;
    o.per_stratum = 15;
    o.classes = 2;
    o.seed = 17;
    o.write_labeled = true;
    const auto paths = simulate_to_directory(o, dir);
    REQUIRE(paths.size() == 2u);
    CHECK(fs::exists(dir / "rep_001.csv"));
    CHECK(fs::exists(dir / "rep_002.mechanism.json"));
    CHECK(fs::exists(dir / "rep_002.truth.json"));
    CHECK(fs::exists(dir / "rep_001.labeled.csv"));
    const auto model = read_true_model(dir / "true_model.json");
    const auto rep = simulate_synthetic(model, VerificationCase::Ignorable, 17, 1);
    CHECK(read_dataset(paths[1], {3, 3}) == rep.masked.data);
    CHECK(read_dataset(dir / "rep_002.labeled.csv", {3, 3}) == rep.labeled);
    const auto t = read_truth(dir / "rep_002.truth.json");
    CHECK(t.pi == rep.truth.pi);
    CHECK(t.true_causes == rep.masked.true_causes);
    const auto m = read_mechanism(dir / "rep_002.mechanism.json");
    CHECK(m.time_effect == rep.mechanism.time_effect);
    CHECK(m.active_symptoms == rep.mechanism.active_symptoms);
}

TEST_CASE("sidecar JSON round trips") {
    const auto dir = scratch("json");
    TruthSidecar t{"synthetic", GridDims{2, 1, 2}, {0.1, 0.2, 0.3, 0.4}, {1, 2, 3, 4},
                   {0.0, std::nan(""), 1.0 / 3.0, 0.5}, {0, 1, 1}};
    write_truth(dir / "t.json", t);
    const auto u = read_truth(dir / "t.json");
    CHECK(u.pi == t.pi);
    CHECK(u.stratum_sizes == t.stratum_sizes);
    CHECK(std::isnan(u.empirical_pi[1]));
    CHECK(u.empirical_pi[2] == t.empirical_pi[2]);

    Rng rng(3);
    const auto mech = build_mechanism(4, 5, 6, VerificationCase::CauseDependent, rng);
    write_mechanism(dir / "m.json", mech);
    const auto m = read_mechanism(dir / "m.json");
    CHECK(m.kind == mech.kind);
    CHECK(m.cause_effect == mech.cause_effect);
    CHECK(m.symptom_effect == mech.symptom_effect);

    std::ofstream(dir / "bad.json") << "{\"grid\": 3";
    CHECK_THROWS_AS(read_truth(dir / "bad.json"), ParseError);
    std::ofstream(dir / "short.json") << R"({"grid":{"sexes":2,"times":1,"ages":1},"pi":[0.5]})";
    CHECK_THROWS_AS(read_truth(dir / "short.json"), ParseError);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(std::nan("")) == "NA");
    CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
    CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("fit directory round trip and byte stability") {
    const auto dir = scratch("fit");
    Rng rng(5);
    const GridDims g{2, 2, 2};
    const auto tm = draw_true_model(g, generate_true_csmf(2, 2), std::vector<int>(g.size(), 20), 2, 3, rng);
    const auto rep = simulate_synthetic(tm, VerificationCase::Ignorable, 5, 1);
    ChainConfig cfg;
    cfg.iterations = 60;
    cfg.burn_in = 20;
    cfg.chains = 2;
    cfg.classes = 2;
    cfg.seed = 9;
    PriorSpec prior;
    prior.variant = PriorVariant::RW1;
    const auto fit = run_chain(rep.masked.data, prior, cfg);
    save_fit(dir / "a", fit);
    save_fit(dir / "b", run_chain(rep.masked.data, prior, cfg));
    for (const char* f : {"draws.csv", "summary.csv", "summary_aggregate.csv", "variances.csv", "latent.json"}) {
        CAPTURE(f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    const auto back = load_fit(dir / "a");
    CHECK(back.grid == fit.grid);
    CHECK(back.working_grid == fit.working_grid);
    CHECK(back.chains == 2);
    CHECK(back.stratum_counts == fit.stratum_counts);
    CHECK(back.pi_matrix() == fit.pi_matrix());
    CHECK(back.phi_mean == fit.phi_mean);
    CHECK(back.lambda_mean == fit.lambda_mean);

    const auto head = slurp(dir / "a" / "draws.csv").substr(0, 22);
    CHECK(head == "chain,iter,s,t,a,pi\n0,");
    CHECK_THROWS_AS(load_fit(dir / "missing"), IoError);
}

TEST_CASE("manifest parsing") {
    const auto dir = scratch("manifest");
    std::ofstream(dir / "m.csv") << "replicate,model,fit,dataset,truth\n1,rw1,fits/r1,NA,/abs/t.json\n2,unstructured,f2,d.csv,t2.json\n";
    const auto e = read_manifest(dir / "m.csv");
    REQUIRE(e.size() == 2u);
    CHECK(e[0].fit == dir / "fits/r1");
    CHECK(e[0].dataset.empty());
    CHECK(e[0].truth == fs::path("/abs/t.json"));
    CHECK(e[1].dataset == dir / "d.csv");
    std::ofstream(dir / "bad.csv") << "replicate,model,fit,truth\n";
    CHECK_THROWS_AS(read_manifest(dir / "bad.csv"), ParseError);
}

}
