#ifndef NORMINE_H
#define NORMINE_H

/* C interface to the norm mining library.  Every entry point returns an
 * nm_status; on failure nm_last_error() describes the problem for the
 * calling thread.  Returned strings are heap copies owned by the caller,
 * released with nm_string_free. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nm_status {
  NM_OK = 0,
  NM_ERR_INPUT = 2,   /* bad arguments, unreadable or malformed data */
  NM_ERR_INTERNAL = 3 /* invariant breach inside the library */
} nm_status;

const char* nm_version(void);
const char* nm_last_error(void);
void nm_string_free(char* s);

typedef struct nm_corpus nm_corpus;
typedef struct nm_bank nm_bank;
typedef struct nm_mine_result nm_mine_result;

/* -------------------------------------------------------------- ingest */

typedef struct nm_ingest_options {
  const char* events_dir;
  const char* mentions_dir;
  size_t clone_threshold;
  const char* const* source_filters;
  size_t n_source_filters; /* 0 with source_filters NULL selects {"BBC"} */
  unsigned window_start;   /* YYYYMMDD inclusive, 0 = open */
  unsigned window_end;
  unsigned long long seed;
} nm_ingest_options;

void nm_ingest_options_default(nm_ingest_options* opts);

/* report_out (optional) receives the diagnostics report text */
nm_status nm_ingest(const nm_ingest_options* opts, nm_corpus** corpus_out,
                    char** report_out);

/* -------------------------------------------------------------- corpus */

nm_status nm_corpus_read(const char* path, nm_corpus** corpus_out);
/* with_meta nonzero also writes the provenance sidecar at path + ".meta" */
nm_status nm_corpus_write(const nm_corpus* corpus, const char* path,
                          int with_meta);
size_t nm_corpus_size(const nm_corpus* corpus);
nm_status nm_corpus_stats_text(const nm_corpus* corpus, char** text_out);
void nm_corpus_free(nm_corpus* corpus);

/* -------------------------------------------------------------- models */

typedef struct nm_model_params {
  size_t max_depth;
  double discount;
  double strength;
} nm_model_params;

void nm_model_params_default(nm_model_params* params);

/* warnings_out (optional) receives newline-separated training warnings,
 * NULL when there are none */
nm_status nm_train(const nm_corpus* corpus, const nm_model_params* params,
                   nm_bank** bank_out, char** warnings_out);
nm_status nm_bank_save(const nm_bank* bank, const char* path);
nm_status nm_bank_load(const char* path, nm_bank** bank_out);
void nm_bank_free(nm_bank* bank);

/* -------------------------------------------------------------- mining */

typedef struct nm_mine_options {
  double prior_log_odds;
  int workers;
  int strict_sanction; /* sanction must immediately follow the violation */
  size_t block_sequences;
} nm_mine_options;

void nm_mine_options_default(nm_mine_options* opts);

nm_status nm_mine(const nm_corpus* corpus, const nm_bank* bank,
                  const nm_mine_options* opts, nm_mine_result** result_out);
size_t nm_mine_result_size(const nm_mine_result* result);
/* rank is 0-based from the best-scoring norm down */
nm_status nm_mine_result_entry(const nm_mine_result* result, size_t rank,
                               char** norm_out, double* log_odds_out);
nm_status nm_mine_result_write_csv(const nm_mine_result* result,
                                   const char* path);
nm_status nm_mine_result_write_report(const nm_mine_result* result,
                                      const nm_corpus* corpus,
                                      const char* path);
void nm_mine_result_free(nm_mine_result* result);

/* ---------------------------------------------------------- evaluation */

typedef struct nm_eval_options {
  size_t n_synth;
  size_t synth_size; /* 0: match the evaluated corpus */
  int reestimate;    /* re-fit parameters on each synthetic corpus */
  unsigned long long seed;
  int workers;
  int strict_sanction;
  size_t max_sample_length;
} nm_eval_options;

void nm_eval_options_default(nm_eval_options* opts);

/* norm_text e.g. "O(4)", "P(11)", "O(4,4,-)".  report_path and
 * hist_csv_path are optional output files; observed_out / p_value_out are
 * optional scalars. */
nm_status nm_evaluate(const char* norm_text, const nm_corpus* corpus,
                      const nm_bank* bank, const nm_eval_options* opts,
                      const char* report_path, const char* hist_csv_path,
                      double* observed_out, double* p_value_out);

/* ----------------------------------------------------------- synthesis */

nm_status nm_sample_corpus(const nm_bank* bank, size_t size,
                           unsigned long long seed, size_t max_length,
                           nm_corpus** corpus_out);

/* stats_out (optional) receives a short planting summary */
nm_status nm_plant_corpus(const nm_bank* bank, const char* norm_text,
                          double p_comp, double p_sanc, size_t size,
                          unsigned long long seed, size_t max_length,
                          nm_corpus** corpus_out, char** stats_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NORMINE_H */
