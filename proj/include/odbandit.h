/* odbandit — warm-start bandit simulation and bound evaluation.
 *
 * C interface to the shared library. All functions return an odb_status;
 * on failure odb_last_error() holds a one-line message for the calling
 * thread. Strings returned through char** out-parameters are owned by
 * the caller and must be released with odb_text_free().
 */
#ifndef ODBANDIT_H
#define ODBANDIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum odb_status {
  ODB_OK = 0,
  ODB_EMPTY = 1, /* warning: nothing to do (e.g. plot of an empty summary) */
  ODB_ERR_USAGE = 2,
  ODB_ERR_PRECONDITION = 3,
  ODB_ERR_IO = 4,
  ODB_ERR_INTERNAL = 5
} odb_status;

const char* odb_version(void);
const char* odb_last_error(void);
void odb_text_free(char* text);

/* ---- instances -------------------------------------------------------
 * An instance bundles K arms (online/offline means, unit variance), the
 * per-arm offline sample counts, the online horizon, and a per-arm bias
 * bound (entries >= 0; HUGE_VAL encodes "no knowledge").
 */
typedef struct odb_instance odb_instance;

odb_status odb_instance_create(int64_t k, const double* mu_on,
                               const double* mu_off, const int64_t* t_s,
                               const double* v, int64_t horizon,
                               odb_instance** out);
odb_status odb_instance_load(const char* path, odb_instance** out);
odb_status odb_instance_save(const odb_instance* instance, const char* path);
void odb_instance_free(odb_instance* instance);

int64_t odb_instance_arms(const odb_instance* instance);
int64_t odb_instance_horizon(const odb_instance* instance);
odb_status odb_instance_arm(const odb_instance* instance, int64_t arm,
                            double* mu_on, double* mu_off, int64_t* t_s,
                            double* v);

/* ---- bound evaluation --------------------------------------------------
 * Emits the flat key=value report: discrepancies, saving terms, the
 * explicit dependent bound, the water-filling level with its allocation,
 * and the order-level independent profile. family_spec (nullable) adds
 * the combinatorial section; syntax topm:M | mpath:M |
 * influence:GRAPHFILE[:SEEDS] | explicit:ACTIONSFILE.
 */
odb_status odb_bounds_report(const odb_instance* instance, double epsilon,
                             double consistency_c, double consistency_p,
                             double delta, const char* family_spec,
                             char** out_text);

/* Water-filling level tau for sum_a max(tau - t_s[a], 0) = mass, plus
 * the per-arm allocation n_star (buffer of length k, nullable). */
odb_status odb_tau(const int64_t* t_s, int64_t k, double mass,
                   double* tau_star, double* n_star);
odb_status odb_tau_report(const int64_t* t_s, int64_t k, double mass,
                          char** out_text);

/* ---- adversarial pair --------------------------------------------------
 * Two-arm instances sharing offline laws but with flipped optima;
 * admissible only when c < T^eps / (4 log T) (the threshold is reported).
 * Buffers of length 2; any pointer may be NULL.
 */
odb_status odb_pair(double beta, double eps, double c, double horizon,
                    double* p_mu_on, double* q_mu_on, double* mu_off,
                    int64_t* t_s, double* threshold);
odb_status odb_pair_report(double beta, double eps, double c, double horizon,
                           char** out_text);
/* Writes impossibility_p.instance / impossibility_q.instance. */
odb_status odb_pair_write(double beta, double eps, double c, double horizon,
                          const char* out_dir);

/* ---- simulation --------------------------------------------------------
 * Writes raw.csv and summary.csv into out_dir (plus trajectories.csv and
 * per-experiment plot SVGs when requested). Outputs are byte-identical
 * for identical options, independent of the worker count.
 */
typedef struct odb_sim_options {
  int64_t trials;        /* default 50 */
  uint64_t seed;         /* default 1 */
  int32_t workers;       /* 0 = hardware concurrency */
  int32_t trajectories;  /* write trajectories.csv */
  int32_t plot;          /* render plot SVGs from the summary */
  int32_t fixed_dataset; /* one offline dataset for all trials */
  double global_delta;   /* > 0 switches to the delta/(2Kt^2) schedule */
  const char* label;     /* experiment name for instance runs */
} odb_sim_options;

void odb_sim_options_init(odb_sim_options* options);

/* Presets: fig1a | fig1b | fig2 | pricing | mpath | impossibility. */
odb_status odb_simulate_preset(const char* preset,
                               const odb_sim_options* options,
                               const char* out_dir);

/* policies_csv: comma-separated subset of min-ucb,pure-ucb,ucbs,monucb
 * (default all four). With family_spec the run is combinatorial and the
 * policy is min-comb-ucb. */
odb_status odb_simulate_instance(const odb_instance* instance,
                                 const char* family_spec,
                                 const char* policies_csv,
                                 const odb_sim_options* options,
                                 const char* out_dir);

/* Writes the preset's instance/action files; manifest_out (nullable)
 * receives one filename per line. */
odb_status odb_preset_materialize(const char* preset, const char* out_dir,
                                  char** manifest_out);

/* Renders summary CSV rows as SVG curves; multiple experiments fan out
 * to suffixed files. Returns ODB_EMPTY when the summary has no rows. */
odb_status odb_render_plot(const char* summary_csv_path,
                           const char* svg_path);

#ifdef __cplusplus
}
#endif

#endif /* ODBANDIT_H */
