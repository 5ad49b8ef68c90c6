/* C interface to the lurerad library: stability radii of positive Lur'e
 * systems, network sector bounds, and the command layer used by the CLI.
 *
 * Every function returns a lurerad_status. Objects are opaque handles that
 * the caller releases with the matching *_destroy function. On failure the
 * message is available from lurerad_last_error() on the calling thread. */
#ifndef LURERAD_LURERAD_H_
#define LURERAD_LURERAD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LURERAD_API __declspec(dllexport)
#else
#define LURERAD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lurerad_status {
  LURERAD_OK = 0,
  LURERAD_ERR_INVALID_ARGUMENT = 1,
  LURERAD_ERR_DIMENSION_MISMATCH = 2,
  LURERAD_ERR_NON_SQUARE = 3,
  LURERAD_ERR_NON_FINITE = 4,
  LURERAD_ERR_SINGULAR = 5,
  LURERAD_ERR_NO_CONVERGENCE = 6,
  LURERAD_ERR_NOT_METZLER = 7,
  LURERAD_ERR_NOT_HURWITZ = 8,
  LURERAD_ERR_NOT_METZLER_UPPER = 9,
  LURERAD_ERR_CERTIFICATION_FAILED = 10,
  LURERAD_ERR_MISSING_SCHUR_SCALE = 11,
  LURERAD_ERR_ZERO_SPECTRAL_RADIUS = 12,
  LURERAD_ERR_INFINITE_RADIUS = 13,
  LURERAD_ERR_ORDER_VIOLATED = 14,
  LURERAD_ERR_NONZERO_BIAS = 15,
  LURERAD_ERR_MIXED_ACTIVATIONS = 16,
  LURERAD_ERR_NOT_SISO = 17,
  LURERAD_ERR_NON_FINITE_STATE = 18,
  LURERAD_ERR_ZERO_INITIAL_STATE = 19,
  LURERAD_ERR_NO_INSTABILITY_FOUND = 20,
  LURERAD_ERR_UNSTABLE_AT_ZERO = 21,
  LURERAD_ERR_PARSE = 22,
  LURERAD_ERR_IO = 23,
  LURERAD_ERR_INTERNAL = 99
} lurerad_status;

typedef enum lurerad_norm {
  LURERAD_NORM_ONE = 0,
  LURERAD_NORM_TWO = 1,
  LURERAD_NORM_INF = 2,
  LURERAD_NORM_MAX_ABS = 3
} lurerad_norm;

typedef struct lurerad_matrix lurerad_matrix;
typedef struct lurerad_network lurerad_network;
typedef struct lurerad_problem lurerad_problem;
typedef struct lurerad_report lurerad_report;

LURERAD_API const char* lurerad_status_name(lurerad_status status);
/* Message of the last failure on this thread; empty string if none. */
LURERAD_API const char* lurerad_last_error(void);
LURERAD_API const char* lurerad_version(void);

/* ---- matrices ---------------------------------------------------------- */

LURERAD_API lurerad_status lurerad_matrix_create(size_t rows, size_t cols,
                                                 const double* row_major,
                                                 lurerad_matrix** out);
LURERAD_API void lurerad_matrix_destroy(lurerad_matrix* m);
LURERAD_API size_t lurerad_matrix_rows(const lurerad_matrix* m);
LURERAD_API size_t lurerad_matrix_cols(const lurerad_matrix* m);
/* Copies rows*cols entries (row-major) into buffer; len must be large enough. */
LURERAD_API lurerad_status lurerad_matrix_copy(const lurerad_matrix* m, double* buffer,
                                               size_t len);

LURERAD_API lurerad_status lurerad_is_metzler(const lurerad_matrix* m, int* out);
LURERAD_API lurerad_status lurerad_is_hurwitz(const lurerad_matrix* m, int* out);
LURERAD_API lurerad_status lurerad_spectral_abscissa(const lurerad_matrix* m, double* out);
LURERAD_API lurerad_status lurerad_spectral_radius(const lurerad_matrix* m, double* out);
LURERAD_API lurerad_status lurerad_operator_norm(const lurerad_matrix* m, lurerad_norm kind,
                                                 double* out);
LURERAD_API lurerad_status lurerad_inverse(const lurerad_matrix* m, lurerad_matrix** out);

/* ---- radii ------------------------------------------------------------- */

typedef struct lurerad_certificate {
  int b_nonneg;
  int c_nonneg;
  int sector_ordered;
  int metzler_at_lower;
  int hurwitz_at_upper;
  int metzler_at_upper;
  int verdict;
  double upper_abscissa;
} lurerad_certificate;

LURERAD_API lurerad_status lurerad_stability_radius_linear(const lurerad_matrix* a,
                                                           const lurerad_matrix* d,
                                                           const lurerad_matrix* e,
                                                           lurerad_norm norm, double* radius);
LURERAD_API lurerad_status lurerad_stability_radius_schur(const lurerad_matrix* a,
                                                          const lurerad_matrix* d,
                                                          const lurerad_matrix* e,
                                                          const lurerad_matrix* s,
                                                          double* radius);
/* cert may be NULL. It is filled even when the call fails certification. */
LURERAD_API lurerad_status lurerad_certify_positive_lure(
    const lurerad_matrix* a, const lurerad_matrix* b, const lurerad_matrix* c,
    const lurerad_matrix* sigma1, const lurerad_matrix* sigma2, lurerad_certificate* cert);
LURERAD_API lurerad_status lurerad_stability_radius_lure(
    const lurerad_matrix* a, const lurerad_matrix* b, const lurerad_matrix* c,
    const lurerad_matrix* sigma1, const lurerad_matrix* sigma2, const lurerad_matrix* d,
    const lurerad_matrix* e, lurerad_norm norm, int override_gates, double* radius,
    lurerad_certificate* cert);
LURERAD_API lurerad_status lurerad_refine_upper_sector(
    const lurerad_matrix* a, const lurerad_matrix* b, const lurerad_matrix* c,
    const lurerad_matrix* d, const lurerad_matrix* e, lurerad_norm norm, double delta_crit,
    double* magnitude);

/* ---- networks ---------------------------------------------------------- */

LURERAD_API lurerad_status lurerad_network_load(const char* path, lurerad_network** out);
LURERAD_API lurerad_status lurerad_network_parse(const char* json_text, lurerad_network** out);
LURERAD_API void lurerad_network_destroy(lurerad_network* net);
LURERAD_API lurerad_status lurerad_network_eval(const lurerad_network* net,
                                                const lurerad_matrix* z,
                                                lurerad_matrix** out);
LURERAD_API lurerad_status lurerad_network_sector_bound(const lurerad_network* net,
                                                        lurerad_matrix** gamma1,
                                                        lurerad_matrix** gamma2);
LURERAD_API lurerad_status lurerad_network_sector_violations(const lurerad_network* net,
                                                             const lurerad_matrix* gamma1,
                                                             const lurerad_matrix* gamma2,
                                                             size_t samples, double box_hi,
                                                             uint64_t seed, size_t* violations);

/* ---- problems and commands --------------------------------------------- */

typedef struct lurerad_options {
  /* -1 keeps the problem's norm; otherwise a lurerad_norm value. */
  int norm;
  int override_gates;
  int has_delta_crit;
  double delta_crit;
  const char* network; /* NULL: use the problem's */
  const char* out;     /* sweep CSV path, may be NULL */
  const char* dump_dir;
  int has_seed;
  uint64_t seed;
  int trials; /* <= 0: default */
  double dt;  /* <= 0: default */
  double horizon;
} lurerad_options;

LURERAD_API void lurerad_options_init(lurerad_options* opts);

LURERAD_API lurerad_status lurerad_problem_load(const char* path, lurerad_problem** out);
LURERAD_API void lurerad_problem_destroy(lurerad_problem* problem);

/* command: "check" | "radius" | "nn-bound" | "sweep" | "refine". problem may
 * be NULL for nn-bound. Analysis failures are reported inside the report (see
 * lurerad_report_exit_code); the call itself fails only on bad arguments. */
LURERAD_API lurerad_status lurerad_run(const char* command, const lurerad_problem* problem,
                                       const lurerad_options* opts, lurerad_report** out);
/* Like lurerad_run, but loads the problem first; load errors become exit-1
 * reports. problem_path may be NULL. */
LURERAD_API lurerad_status lurerad_run_file(const char* command, const char* problem_path,
                                            const lurerad_options* opts, lurerad_report** out);
LURERAD_API int lurerad_report_exit_code(const lurerad_report* report);
/* Strings stay valid until the report is destroyed. */
LURERAD_API const char* lurerad_report_text(const lurerad_report* report);
LURERAD_API const char* lurerad_report_json(const lurerad_report* report);
LURERAD_API void lurerad_report_destroy(lurerad_report* report);

#ifdef __cplusplus
}
#endif

#endif /* LURERAD_LURERAD_H_ */
