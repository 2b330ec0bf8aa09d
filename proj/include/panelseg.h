#ifndef PANELSEG_H
#define PANELSEG_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PS_API __declspec(dllexport)
#else
#define PS_API __attribute__((visibility("default")))
#endif

/* Status codes mirroring the library's error taxonomy.  Every failing call
   leaves a human-readable message retrievable via ps_last_error(). */
typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_IO = 1,
  PS_ERR_PARSE = 2,
  PS_ERR_DIMENSION = 3,
  PS_ERR_DOMAIN = 4,
  PS_ERR_DEGENERATE = 5,
  PS_ERR_CONFIG = 6,
  PS_ERR_INTERNAL = 7
} ps_status;

PS_API const char* ps_version(void);
/* Message of the last failing call on this thread ("" when none). */
PS_API const char* ps_last_error(void);
PS_API void ps_string_free(char* s);

/* ------------------------------------------------------------------ panels */
typedef struct ps_panel ps_panel;

/* values: row-major n x T, one series per row. */
PS_API ps_status ps_panel_create(long n, long T, const double* values, ps_panel** out);
PS_API ps_status ps_panel_read_csv(const char* path, int has_header, ps_panel** out);
PS_API ps_status ps_panel_write_csv(const ps_panel* panel, const char* path);
PS_API long ps_panel_rows(const ps_panel* panel);
PS_API long ps_panel_cols(const ps_panel* panel);
/* buffer must hold rows*cols doubles. */
PS_API ps_status ps_panel_values(const ps_panel* panel, double* buffer);
PS_API void ps_panel_free(ps_panel* panel);

/* ------------------------------------------------------------------ config */
typedef struct ps_config ps_config;

PS_API ps_status ps_config_create(ps_config** out);
PS_API ps_status ps_config_set_mode_exponent(ps_config* config, double phi);
/* gamma <= 0 resolves to log n at detection time. */
PS_API ps_status ps_config_set_mode_combined(ps_config* config, double gamma);
PS_API ps_status ps_config_set_alpha(ps_config* config, double alpha);
PS_API ps_status ps_config_set_boot_reps(ps_config* config, long B);
PS_API ps_status ps_config_set_trim(ps_config* config, long d_T);
PS_API ps_status ps_config_set_depth(ps_config* config, long depth);
PS_API ps_status ps_config_set_seed(ps_config* config, uint64_t seed);
PS_API ps_status ps_config_set_bonferroni(ps_config* config, int enabled);
PS_API ps_status ps_config_set_threads(ps_config* config, long threads);
PS_API void ps_config_free(ps_config* config);

/* --------------------------------------------------------------- detection */
typedef struct ps_report ps_report;

PS_API ps_status ps_detect(const ps_panel* panel, const ps_config* config, ps_report** out);
PS_API long ps_report_count(const ps_report* report);      /* recorded points */
PS_API long ps_report_surviving(const ps_report* report);  /* survived only */
/* index in [0, ps_report_count); output pointers may be NULL. */
PS_API ps_status ps_report_change_point(const ps_report* report, long index, long* eta,
                                        long* m, double* stat, double* threshold,
                                        int* survived);
PS_API ps_status ps_report_contributors(const ps_report* report, long index, long* buffer,
                                        long capacity, long* written);
/* JSON text; free with ps_string_free. */
PS_API ps_status ps_report_json(const ps_report* report, char** out);
PS_API void ps_report_free(ps_report* report);

/* Scan-statistic bootstrap threshold for one window length (0 = full span).
   When stats is non-NULL it receives the B replicate statistics (capacity
   must be >= B; stats_written reports the count). */
PS_API ps_status ps_bootstrap_threshold(const ps_panel* panel, const ps_config* config,
                                        long window_len, double* quantile, double* stats,
                                        long stats_capacity, long* stats_written);

/* ------------------------------------------------------------- simulation */
/* model: 1 (spatial MA panel) or 2 (adds one common factor); rho is the
   spatial scale for model 1 and the factor loading for model 2. */
PS_API ps_status ps_simulate_noise(int model, double rho, long n, long T, uint64_t seed,
                                   ps_panel** out);

/* ------------------------------------------------------------ experiments */
typedef struct ps_experiment ps_experiment;

PS_API ps_status ps_experiment_parse(const char* plan_text, ps_experiment** out);
PS_API ps_status ps_experiment_preset(const char* name, ps_experiment** out);
PS_API ps_status ps_experiment_set_reps(ps_experiment* exp, long reps);
PS_API ps_status ps_experiment_set_seed(ps_experiment* exp, uint64_t seed);
PS_API ps_status ps_experiment_set_threads(ps_experiment* exp, long threads);
/* Runs the plan; returns the CSV table and/or the JSON summary (free with
   ps_string_free).  Either output pointer may be NULL. */
PS_API ps_status ps_experiment_run(const ps_experiment* exp, char** csv_out, char** json_out);
PS_API void ps_experiment_free(ps_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif /* PANELSEG_H */
