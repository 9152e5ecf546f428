#include "hlcm/hlcm.h"

#include <exception>
#include <new>
#include <string>

#include "hlcm/error.hpp"
#include "hlcm/evaluation.hpp"
#include "hlcm/gibbs.hpp"
#include "hlcm/io.hpp"
#include "hlcm/pipeline.hpp"

struct hlcm_dataset {
    hlcm::Dataset data;
};

struct hlcm_fit {
    hlcm::PosteriorDraws draws;
    hlcm::CsmfEstimate estimate;
};

namespace {

thread_local std::string g_last_error;

template <class F>
hlcm_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return HLCM_OK;
    } catch (const hlcm::InvalidArgument& e) {
        g_last_error = e.what();
        return HLCM_ERR_INVALID_ARGUMENT;
    } catch (const hlcm::ParseError& e) {
        g_last_error = e.what();
        return HLCM_ERR_PARSE;
    } catch (const hlcm::IoError& e) {
        g_last_error = e.what();
        return HLCM_ERR_IO;
    } catch (const std::filesystem::filesystem_error& e) {
        g_last_error = e.what();
        return HLCM_ERR_IO;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return HLCM_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return HLCM_ERR_RUNTIME;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HLCM_ERR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown error";
        return HLCM_ERR_RUNTIME;
    }
}

void require(const void* p, const char* what) {
    if (!p) throw hlcm::InvalidArgument(std::string(what) + " must not be NULL");
}

hlcm_fit* make_fit(hlcm::PosteriorDraws draws) {
    auto* f = new hlcm_fit{std::move(draws), {}};
    f->estimate = hlcm::estimate_csmf(f->draws.pi_matrix(), f->draws.grid, f->draws.stratum_counts);
    return f;
}

} // namespace

extern "C" {

const char* hlcm_last_error(void) { return g_last_error.c_str(); }

const char* hlcm_status_string(hlcm_status status) {
    switch (status) {
    case HLCM_OK: return "ok";
    case HLCM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HLCM_ERR_PARSE: return "parse error";
    case HLCM_ERR_IO: return "io error";
    case HLCM_ERR_RUNTIME: return "runtime error";
    }
    return "unknown status";
}

const char* hlcm_version(void) { return "0.1.0"; }

hlcm_status hlcm_dataset_read_csv(const char* path, int times, int ages, hlcm_dataset** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        if (times < 0 || ages < 0) throw hlcm::InvalidArgument("grid overrides must be >= 0");
        *out = new hlcm_dataset{hlcm::read_dataset(path, {times, ages})};
    });
}

hlcm_status hlcm_dataset_write_csv(const hlcm_dataset* data, const char* path) {
    return guarded([&] {
        require(data, "dataset");
        require(path, "path");
        hlcm::write_dataset(std::filesystem::path(path), data->data);
    });
}

hlcm_status hlcm_dataset_size(const hlcm_dataset* data, size_t* records) {
    return guarded([&] {
        require(data, "dataset");
        require(records, "records");
        *records = data->data.size();
    });
}

hlcm_status hlcm_dataset_dims(const hlcm_dataset* data, int* sexes, int* times, int* ages, int* symptoms) {
    return guarded([&] {
        require(data, "dataset");
        const auto& g = data->data.grid();
        if (sexes) *sexes = g.sexes;
        if (times) *times = g.times;
        if (ages) *ages = g.ages;
        if (symptoms) *symptoms = data->data.num_symptoms();
    });
}

void hlcm_dataset_free(hlcm_dataset* data) { delete data; }

void hlcm_fit_options_init(hlcm_fit_options* opts) {
    if (!opts) return;
    const hlcm::ChainConfig cfg;
    const hlcm::PriorSpec prior;
    opts->model = "rw1";
    opts->classes = cfg.classes;
    opts->iterations = cfg.iterations;
    opts->burn_in = cfg.burn_in;
    opts->thinning = cfg.thinning;
    opts->chains = cfg.chains;
    opts->seed = cfg.seed;
    opts->a_phi = cfg.hyper.a_phi;
    opts->b_phi = cfg.hyper.b_phi;
    opts->a_omega = cfg.hyper.a_omega;
    opts->b_omega = cfg.hyper.b_omega;
    opts->fixed_variance = prior.fixed_effect_variance;
    opts->indep_shape = prior.independent.shape;
    opts->indep_rate = prior.independent.rate;
    opts->rw1_shape = prior.random_walk.shape;
    opts->rw1_rate = prior.random_walk.rate;
    opts->eps_shape = prior.epsilon.shape;
    opts->eps_rate = prior.epsilon.rate;
}

hlcm_status hlcm_fit_run(const hlcm_dataset* data, const hlcm_fit_options* opts, hlcm_fit** out) {
    return guarded([&] {
        require(data, "dataset");
        require(opts, "options");
        require(out, "out");
        *out = nullptr;
        hlcm::PriorSpec prior;
        prior.variant = hlcm::parse_variant(opts->model ? opts->model : "");
        prior.fixed_effect_variance = opts->fixed_variance;
        prior.independent = {opts->indep_shape, opts->indep_rate};
        prior.random_walk = {opts->rw1_shape, opts->rw1_rate};
        prior.epsilon = {opts->eps_shape, opts->eps_rate};
        prior.validate();
        hlcm::ChainConfig cfg;
        cfg.classes = opts->classes;
        cfg.iterations = opts->iterations;
        cfg.burn_in = opts->burn_in;
        cfg.thinning = opts->thinning;
        cfg.chains = opts->chains;
        cfg.seed = opts->seed;
        cfg.keep_latent_draws = false;
        cfg.hyper = {opts->a_phi, opts->b_phi, opts->a_omega, opts->b_omega};
        cfg.validate();
        *out = make_fit(hlcm::run_chain(data->data, prior, cfg));
    });
}

hlcm_status hlcm_fit_save(const hlcm_fit* fit, const char* dir) {
    return guarded([&] {
        require(fit, "fit");
        require(dir, "dir");
        hlcm::save_fit(dir, fit->draws);
    });
}

hlcm_status hlcm_fit_load(const char* dir, hlcm_fit** out) {
    return guarded([&] {
        require(dir, "dir");
        require(out, "out");
        *out = nullptr;
        *out = make_fit(hlcm::load_fit(dir));
    });
}

hlcm_status hlcm_fit_num_draws(const hlcm_fit* fit, size_t* draws) {
    return guarded([&] {
        require(fit, "fit");
        require(draws, "draws");
        *draws = fit->draws.draws.size();
    });
}

hlcm_status hlcm_fit_num_strata(const hlcm_fit* fit, size_t* strata) {
    return guarded([&] {
        require(fit, "fit");
        require(strata, "strata");
        *strata = static_cast<size_t>(fit->draws.grid.size());
    });
}

hlcm_status hlcm_fit_pi_summary(const hlcm_fit* fit, size_t stratum, double* mean, double* lower, double* upper) {
    return guarded([&] {
        require(fit, "fit");
        if (stratum >= fit->estimate.strata.size()) throw hlcm::InvalidArgument("stratum index out of range");
        const auto& e = fit->estimate.strata[stratum];
        if (mean) *mean = e.mean;
        if (lower) *lower = e.lower;
        if (upper) *upper = e.upper;
    });
}

hlcm_status hlcm_fit_overall_summary(const hlcm_fit* fit, double* mean, double* lower, double* upper) {
    return guarded([&] {
        require(fit, "fit");
        const auto& e = fit->estimate.overall;
        if (mean) *mean = e.mean;
        if (lower) *lower = e.lower;
        if (upper) *upper = e.upper;
    });
}

size_t hlcm_fit_num_warnings(const hlcm_fit* fit) { return fit ? fit->draws.warnings.size() : 0; }

const char* hlcm_fit_warning(const hlcm_fit* fit, size_t index) {
    if (!fit || index >= fit->draws.warnings.size()) return nullptr;
    return fit->draws.warnings[index].c_str();
}

hlcm_status hlcm_fit_write_report(const hlcm_fit* fit, const char* out_dir, const char* truth_path,
                                  const char* dataset_path) {
    return guarded([&] {
        require(fit, "fit");
        require(out_dir, "out_dir");
        std::optional<hlcm::TruthSidecar> truth;
        std::optional<hlcm::Dataset> data;
        if (truth_path) truth = hlcm::read_truth(truth_path);
        if (dataset_path) data = hlcm::read_dataset(dataset_path);
        hlcm::write_report(fit->draws, out_dir, truth, data);
    });
}

void hlcm_fit_free(hlcm_fit* fit) { delete fit; }

void hlcm_simulate_options_init(hlcm_simulate_options* opts) {
    if (!opts) return;
    const hlcm::SimulateOptions d;
    opts->verification_case = "i";
    opts->replicates = d.replicates;
    opts->seed = d.seed;
    opts->times = d.times;
    opts->ages = d.ages;
    opts->symptoms = d.symptoms;
    opts->per_stratum = d.per_stratum;
    opts->classes = d.classes;
    opts->true_model_path = nullptr;
    opts->labeled_path = nullptr;
    opts->fraction = d.fraction;
    opts->write_labeled = 0;
}

hlcm_status hlcm_simulate(const hlcm_simulate_options* opts, const char* out_dir) {
    return guarded([&] {
        require(opts, "options");
        require(out_dir, "out_dir");
        hlcm::SimulateOptions o;
        const std::string c = opts->verification_case ? opts->verification_case : "";
        if (c == "i") o.kind = hlcm::VerificationCase::Ignorable;
        else if (c == "ii") o.kind = hlcm::VerificationCase::CauseDependent;
        else throw hlcm::InvalidArgument("verification case must be 'i' or 'ii', got '" + c + "'");
        o.replicates = opts->replicates;
        o.seed = opts->seed;
        o.times = opts->times;
        o.ages = opts->ages;
        o.symptoms = opts->symptoms;
        o.per_stratum = opts->per_stratum;
        o.classes = opts->classes;
        if (opts->true_model_path) o.truth_model = opts->true_model_path;
        if (opts->labeled_path) o.labeled = opts->labeled_path;
        o.fraction = opts->fraction;
        o.write_labeled = opts->write_labeled != 0;
        hlcm::simulate_to_directory(o, out_dir);
    });
}

hlcm_status hlcm_evaluate(const char* manifest_path, const char* baseline, const char* out_dir) {
    return guarded([&] {
        require(manifest_path, "manifest_path");
        require(out_dir, "out_dir");
        const std::string base = baseline ? baseline : "unstructured";
        hlcm::evaluate_manifest(hlcm::read_manifest(manifest_path), base, out_dir);
    });
}

} // extern "C"
