/// C interface of the qcurv toolkit. Every function returns a qcurv_status; on
/// failure qcurv_last_error() describes the problem for the calling thread.
#ifndef QCURV_QCURV_H
#define QCURV_QCURV_H

#include <stddef.h>

#if defined(QCURV_BUILDING_LIBRARY)
#define QCURV_API __attribute__((visibility("default")))
#else
#define QCURV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qcurv_status {
    QCURV_OK = 0,
    QCURV_INVALID_ARGUMENT = 1,
    QCURV_DOMAIN_ERROR = 2,
    QCURV_NUMERICAL_ERROR = 3,
    QCURV_INTERNAL_ERROR = 4
} qcurv_status;

typedef enum qcurv_regime { QCURV_REGIME_POWER = 0, QCURV_REGIME_LOG = 1, QCURV_REGIME_BOUNDED = 2 } qcurv_regime;

/// Opaque run report produced by qcurv_run / qcurv_sweep.
typedef struct qcurv_report qcurv_report;

QCURV_API const char* qcurv_version(void);
/// Message of the last failed call on this thread ("" if none).
QCURV_API const char* qcurv_last_error(void);

QCURV_API qcurv_status qcurv_beta_integral(double p, double q, double* out);
QCURV_API qcurv_status qcurv_beta_integral_quadrature(double p, double q, double* out);
QCURV_API qcurv_status qcurv_beta_recursion_step(double p, double q, double prior, double* out);
QCURV_API qcurv_status qcurv_sphere_area(int n, double* out);
QCURV_API qcurv_status qcurv_best_sobolev_sq_inv(int n, double* out);

QCURV_API qcurv_status qcurv_giraud_classify(int n, double p, int j, qcurv_regime* regime, double* exponent);
QCURV_API qcurv_status qcurv_first_bounded_iterate(int n, double p, int* out);
/// Hölder class C^{k,β}: exponent = k + fraction, β ∈ (beta_lo, beta_hi).
QCURV_API qcurv_status qcurv_regularity_class(int n, double p, double* exponent, int* k, double* beta_lo,
                                              double* beta_hi);

QCURV_API qcurv_status qcurv_thresholds(int n, double alpha, double* rho1, double* rho2, double* rho3);
/// variant: "main", "corollary", "n6" or "expansion". *holds is 1 or 0.
QCURV_API qcurv_status qcurv_check_hypothesis(const char* variant, int n, double rg, double a, double f,
                                              double lap_f, int* holds, double* margin);

/// Runs one JSON configuration. A report is returned even when the run failed
/// (inspect qcurv_report_exit_code); the status is non-OK only when no report
/// could be produced at all.
QCURV_API qcurv_status qcurv_run(const char* config_json, qcurv_report** out);
/// Cartesian sweep of `axis_json` over a template config; the returned report is
/// the ordered aggregate.
QCURV_API qcurv_status qcurv_sweep(const char* template_json, const char* axis_json, int workers,
                                   qcurv_report** out);

QCURV_API int qcurv_report_exit_code(const qcurv_report* report);
/// Borrowed strings, valid until qcurv_report_free.
QCURV_API const char* qcurv_report_json(const qcurv_report* report);
QCURV_API const char* qcurv_report_payload_hash(const qcurv_report* report);
QCURV_API const char* qcurv_report_error(const qcurv_report* report);
QCURV_API size_t qcurv_report_warning_count(const qcurv_report* report);
QCURV_API const char* qcurv_report_warning(const qcurv_report* report, size_t index);
QCURV_API size_t qcurv_report_table_count(const qcurv_report* report);
QCURV_API const char* qcurv_report_table_name(const qcurv_report* report, size_t index);
QCURV_API const char* qcurv_report_table_csv(const qcurv_report* report, size_t index);
/// Writes report.json and one CSV per table into `dir`.
QCURV_API qcurv_status qcurv_report_write(const qcurv_report* report, const char* dir);
QCURV_API void qcurv_report_free(qcurv_report* report);

#ifdef __cplusplus
}
#endif

#endif
