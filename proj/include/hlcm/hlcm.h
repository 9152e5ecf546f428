#ifndef HLCM_H
#define HLCM_H

#include <stddef.h>
#include <stdint.h>

#if defined(HLCM_BUILDING_LIBRARY)
#define HLCM_API __attribute__((visibility("default")))
#else
#define HLCM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hlcm_status {
    HLCM_OK = 0,
    HLCM_ERR_INVALID_ARGUMENT = 1,
    HLCM_ERR_PARSE = 2,
    HLCM_ERR_IO = 3,
    HLCM_ERR_RUNTIME = 4
} hlcm_status;

/* Message of the last failed call on this thread; "" if none. */
HLCM_API const char* hlcm_last_error(void);
HLCM_API const char* hlcm_status_string(hlcm_status status);
HLCM_API const char* hlcm_version(void);

typedef struct hlcm_dataset hlcm_dataset;

/* times/ages of 0 infer the grid from the data. */
HLCM_API hlcm_status hlcm_dataset_read_csv(const char* path, int times, int ages, hlcm_dataset** out);
HLCM_API hlcm_status hlcm_dataset_write_csv(const hlcm_dataset* data, const char* path);
HLCM_API hlcm_status hlcm_dataset_size(const hlcm_dataset* data, size_t* records);
HLCM_API hlcm_status hlcm_dataset_dims(const hlcm_dataset* data, int* sexes, int* times, int* ages, int* symptoms);
HLCM_API void hlcm_dataset_free(hlcm_dataset* data);

typedef struct hlcm_fit_options {
    const char* model; /* fixed | indep | rw1 | unstructured | unstratified | time-only */
    int classes;
    int iterations;
    int burn_in;
    int thinning;
    int chains;
    uint64_t seed;
    double a_phi, b_phi;
    double a_omega, b_omega;
    double fixed_variance;
    double indep_shape, indep_rate;
    double rw1_shape, rw1_rate;
    double eps_shape, eps_rate;
} hlcm_fit_options;

HLCM_API void hlcm_fit_options_init(hlcm_fit_options* opts);

typedef struct hlcm_fit hlcm_fit;

HLCM_API hlcm_status hlcm_fit_run(const hlcm_dataset* data, const hlcm_fit_options* opts, hlcm_fit** out);
HLCM_API hlcm_status hlcm_fit_save(const hlcm_fit* fit, const char* dir);
HLCM_API hlcm_status hlcm_fit_load(const char* dir, hlcm_fit** out);
HLCM_API hlcm_status hlcm_fit_num_draws(const hlcm_fit* fit, size_t* draws);
HLCM_API hlcm_status hlcm_fit_num_strata(const hlcm_fit* fit, size_t* strata);
/* Posterior mean and equal-tailed 95% interval of one stratum (flat index). */
HLCM_API hlcm_status hlcm_fit_pi_summary(const hlcm_fit* fit, size_t stratum, double* mean, double* lower, double* upper);
HLCM_API hlcm_status hlcm_fit_overall_summary(const hlcm_fit* fit, double* mean, double* lower, double* upper);
HLCM_API size_t hlcm_fit_num_warnings(const hlcm_fit* fit);
HLCM_API const char* hlcm_fit_warning(const hlcm_fit* fit, size_t index);
/* truth_path and dataset_path may be NULL. */
HLCM_API hlcm_status hlcm_fit_write_report(const hlcm_fit* fit, const char* out_dir, const char* truth_path,
                                           const char* dataset_path);
HLCM_API void hlcm_fit_free(hlcm_fit* fit);

typedef struct hlcm_simulate_options {
    const char* verification_case; /* "i" or "ii" */
    int replicates;
    uint64_t seed;
    int times, ages, symptoms, per_stratum, classes;
    const char* true_model_path; /* NULL: default truth */
    const char* labeled_path;    /* non-NULL: semi-synthetic resampling of this population */
    double fraction;
    int write_labeled;
} hlcm_simulate_options;

HLCM_API void hlcm_simulate_options_init(hlcm_simulate_options* opts);
HLCM_API hlcm_status hlcm_simulate(const hlcm_simulate_options* opts, const char* out_dir);

/* baseline NULL means "unstructured". */
HLCM_API hlcm_status hlcm_evaluate(const char* manifest_path, const char* baseline, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
