#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hlcm/hlcm.h"

namespace {

enum Exit { kOk = 0, kUsage = 2, kInvalid = 3, kParse = 4, kIo = 5, kRuntime = 6 };

int report(hlcm_status st) {
    if (st == HLCM_OK) return kOk;
    const char* category = "runtime";
    int code = kRuntime;
    switch (st) {
    case HLCM_ERR_INVALID_ARGUMENT: category = "invalid-argument"; code = kInvalid; break;
    case HLCM_ERR_PARSE: category = "parse"; code = kParse; break;
    case HLCM_ERR_IO: category = "io"; code = kIo; break;
    default: break;
    }
    std::cerr << "hlcm: error[" << category << "]: " << hlcm_last_error() << '\n';
    return code;
}

std::string default_out(const char* sub) {
    const char* env = std::getenv("HLCM_OUTPUT_DIR");
    std::string base = env && *env ? env : "hlcm-out";
    return base + "/" + sub;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cause-specific mortality fractions from partially verified verbal autopsies"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(hlcm_version()));

    // simulate
    hlcm_simulate_options sim;
    hlcm_simulate_options_init(&sim);
    std::string sim_case = "i", sim_out, sim_truth, sim_labeled;
    unsigned long long sim_seed = sim.seed;
    bool sim_write_labeled = false;
    auto* simulate = app.add_subcommand("simulate", "Write synthetic replicate datasets with truth sidecars");
    simulate->add_option("--case", sim_case, "Verification mechanism: i (ignorable) or ii (cause-dependent)")
        ->check(CLI::IsMember({"i", "ii"}));
    simulate->add_option("--replicates", sim.replicates, "Number of replicate datasets")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
    simulate->add_option("--t", sim.times, "Time periods T")->capture_default_str();
    simulate->add_option("--a", sim.ages, "Age groups A")->capture_default_str();
    simulate->add_option("--p", sim.symptoms, "Symptoms p")->capture_default_str();
    simulate->add_option("--n-per-stratum", sim.per_stratum, "Deaths per stratum")->capture_default_str();
    simulate->add_option("--k", sim.classes, "Latent classes of the generating model")->capture_default_str();
    simulate->add_option("--true-model", sim_truth, "Generating model JSON (replaces the default truth)");
    simulate->add_option("--labeled", sim_labeled, "Fully labelled population CSV for semi-synthetic resampling");
    simulate->add_option("--fraction", sim.fraction, "Resampling fraction for --labeled")->capture_default_str();
    simulate->add_flag("--write-labeled", sim_write_labeled, "Also write each replicate before masking");
    simulate->add_option("--out", sim_out, "Output directory (default $HLCM_OUTPUT_DIR/simulate)");

    // fit
    hlcm_fit_options fit;
    hlcm_fit_options_init(&fit);
    std::string fit_model = fit.model, fit_data, fit_out;
    unsigned long long fit_seed = fit.seed;
    int fit_t = 0, fit_a = 0;
    auto* fitc = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
    fitc->add_option("--data", fit_data, "Dataset CSV")->required();
    fitc->add_option("--model", fit_model, "Prior variant")
        ->check(CLI::IsMember({"fixed", "indep", "rw1", "unstructured", "unstratified", "time-only"}))
        ->capture_default_str();
    fitc->add_option("--k", fit.classes, "Latent classes K")->capture_default_str();
    fitc->add_option("--iters", fit.iterations, "Total iterations per chain")->capture_default_str();
    fitc->add_option("--burnin", fit.burn_in, "Burn-in iterations")->capture_default_str();
    fitc->add_option("--thin", fit.thinning, "Keep every n-th post burn-in draw")->capture_default_str();
    fitc->add_option("--chains", fit.chains, "Independent chains")->capture_default_str();
    fitc->add_option("--seed", fit_seed, "Master seed")->capture_default_str();
    fitc->add_option("--t", fit_t, "Override the number of time periods");
    fitc->add_option("--a", fit_a, "Override the number of age groups");
    fitc->add_option("--a-phi", fit.a_phi)->capture_default_str();
    fitc->add_option("--b-phi", fit.b_phi)->capture_default_str();
    fitc->add_option("--a-omega", fit.a_omega)->capture_default_str();
    fitc->add_option("--b-omega", fit.b_omega)->capture_default_str();
    fitc->add_option("--fixed-variance", fit.fixed_variance)->capture_default_str();
    fitc->add_option("--indep-shape", fit.indep_shape)->capture_default_str();
    fitc->add_option("--indep-rate", fit.indep_rate)->capture_default_str();
    fitc->add_option("--rw1-shape", fit.rw1_shape)->capture_default_str();
    fitc->add_option("--rw1-rate", fit.rw1_rate)->capture_default_str();
    fitc->add_option("--eps-shape", fit.eps_shape)->capture_default_str();
    fitc->add_option("--eps-rate", fit.eps_rate)->capture_default_str();
    fitc->add_option("--out", fit_out, "Fit directory (default $HLCM_OUTPUT_DIR/fit)");

    // evaluate
    std::string eval_manifest, eval_baseline = "unstructured", eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "Bias, CRPS and coverage tables for a set of fits");
    evaluate->add_option("--manifest", eval_manifest, "CSV: replicate,model,fit,dataset,truth")->required();
    evaluate->add_option("--baseline", eval_baseline, "Model name used as the CRPS baseline")->capture_default_str();
    evaluate->add_option("--out", eval_out, "Output directory (default $HLCM_OUTPUT_DIR/evaluate)");

    // report
    std::string rep_fit, rep_truth, rep_data, rep_out;
    auto* reportc = app.add_subcommand("report", "Latent profile and CSMF trajectory tables for one fit");
    reportc->add_option("--fit", rep_fit, "Fit directory")->required();
    reportc->add_option("--truth", rep_truth, "Truth sidecar JSON");
    reportc->add_option("--data", rep_data, "Dataset CSV for symptom correlation tables");
    reportc->add_option("--out", rep_out, "Output directory (default $HLCM_OUTPUT_DIR/report)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    if (simulate->parsed()) {
        sim.verification_case = sim_case.c_str();
        sim.seed = sim_seed;
        sim.true_model_path = sim_truth.empty() ? nullptr : sim_truth.c_str();
        sim.labeled_path = sim_labeled.empty() ? nullptr : sim_labeled.c_str();
        sim.write_labeled = sim_write_labeled ? 1 : 0;
        if (sim_out.empty()) sim_out = default_out("simulate");
        const int rc = report(hlcm_simulate(&sim, sim_out.c_str()));
        if (rc == kOk) std::cout << sim_out << '\n';
        return rc;
    }

    if (fitc->parsed()) {
        fit.model = fit_model.c_str();
        fit.seed = fit_seed;
        if (fit_out.empty()) fit_out = default_out("fit");
        hlcm_dataset* data = nullptr;
        if (int rc = report(hlcm_dataset_read_csv(fit_data.c_str(), fit_t, fit_a, &data))) return rc;
        hlcm_fit* result = nullptr;
        int rc = report(hlcm_fit_run(data, &fit, &result));
        hlcm_dataset_free(data);
        if (rc != kOk) return rc;
        for (size_t i = 0; i < hlcm_fit_num_warnings(result); ++i)
            std::cerr << "hlcm: warning: " << hlcm_fit_warning(result, i) << '\n';
        rc = report(hlcm_fit_save(result, fit_out.c_str()));
        if (rc == kOk) {
            double mean = 0, lo = 0, hi = 0;
            hlcm_fit_overall_summary(result, &mean, &lo, &hi);
            std::printf("%s\noverall CSMF %.4f (95%% interval %.4f to %.4f)\n", fit_out.c_str(), mean, lo, hi);
        }
        hlcm_fit_free(result);
        return rc;
    }

    if (evaluate->parsed()) {
        if (eval_out.empty()) eval_out = default_out("evaluate");
        const int rc = report(hlcm_evaluate(eval_manifest.c_str(), eval_baseline.c_str(), eval_out.c_str()));
        if (rc == kOk) std::cout << eval_out << '\n';
        return rc;
    }

    if (reportc->parsed()) {
        if (rep_out.empty()) rep_out = default_out("report");
        hlcm_fit* result = nullptr;
        if (int rc = report(hlcm_fit_load(rep_fit.c_str(), &result))) return rc;
        const int rc = report(hlcm_fit_write_report(result, rep_out.c_str(), rep_truth.empty() ? nullptr : rep_truth.c_str(),
                                                    rep_data.empty() ? nullptr : rep_data.c_str()));
        hlcm_fit_free(result);
        if (rc == kOk) std::cout << rep_out << '\n';
        return rc;
    }
    return kUsage;
}
