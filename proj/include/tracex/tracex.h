#ifndef TRACEX_TRACEX_H
#define TRACEX_TRACEX_H

/* C interface to the tracex shared library.
 *
 * Every fallible call returns a tracex_status; on failure the message is
 * available from tracex_last_error() on the same thread until the next call.
 * Strings returned through char** out-parameters are owned by the caller and
 * released with tracex_string_free(). Handles are released with their _free
 * function; passing NULL to any _free function is a no-op. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TRACEX_BUILDING_LIBRARY)
#    define TRACEX_API __declspec(dllexport)
#  else
#    define TRACEX_API __declspec(dllimport)
#  endif
#else
#  define TRACEX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tracex_status {
  TRACEX_OK = 0,
  TRACEX_ERR_CONFIG = 1,
  TRACEX_ERR_DATA = 2,
  TRACEX_ERR_NUMERIC = 3,
  TRACEX_ERR_IO = 4,
  TRACEX_ERR_INTERNAL = 5
} tracex_status;

typedef struct tracex_testbed tracex_testbed;
typedef struct tracex_result tracex_result;

/* Per-pair information measures in bits. The has_* flags are 0 when the
 * corresponding side is empty and the value is undefined. */
typedef struct tracex_info {
  double h_x, h_y, h_pool, mi, loss, noise, d1, d2, d3;
  double si, sx, overlap;
  int has_h_x, has_h_y, has_pair;
  int null_shared;
} tracex_info;

TRACEX_API const char* tracex_version(void);
TRACEX_API const char* tracex_last_error(void);
TRACEX_API void tracex_string_free(char* s);

/* Testbeds */
TRACEX_API tracex_status tracex_testbed_load(const char* manifest_path, tracex_testbed** out);
TRACEX_API tracex_status tracex_testbed_synthesize(uint64_t seed, size_t n_sources, size_t n_targets,
                                                   double overlap, tracex_testbed** out);
TRACEX_API tracex_status tracex_testbed_save(const tracex_testbed* tb, const char* dir);
TRACEX_API tracex_status tracex_testbed_counts(const tracex_testbed* tb, size_t* all, size_t* links,
                                               size_t* non_links);
/* {name, link_type, language_tag, sources, targets, counts, empty_artifacts} */
TRACEX_API tracex_status tracex_testbed_summary_json(const tracex_testbed* tb, char** out_json);
TRACEX_API void tracex_testbed_free(tracex_testbed* tb);

/* Analysis. config_json uses the keys accepted by `tracex analyze --config`;
 * NULL or "" selects defaults. */
TRACEX_API tracex_status tracex_analyze(const tracex_testbed* tb, const char* config_json, tracex_result** out);
TRACEX_API tracex_status tracex_result_size(const tracex_result* r, size_t* n);
TRACEX_API tracex_status tracex_result_pair(const tracex_result* r, size_t index, const char** source_id,
                                            const char** target_id, int* is_link);
/* metric: h_x h_y h_pool mi loss noise si sx d1 d2 d3 overlap wmd scm cos euc
 * wmd_sim cos_sim. *defined is 0 when the pair has no value. */
TRACEX_API tracex_status tracex_result_metric(const tracex_result* r, size_t index, const char* metric,
                                              double* value, int* defined);
/* Link-prediction scores for a metric (distances are negated). */
TRACEX_API tracex_status tracex_result_roc_auc(const tracex_result* r, const char* metric, double* out);
TRACEX_API tracex_status tracex_result_pr_auc(const tracex_result* r, const char* metric, double* out);
/* Writes the full report tree and run.json into dir. */
TRACEX_API tracex_status tracex_result_write(const tracex_result* r, const char* config_json, const char* dir);
/* {testbed, pairs, links, undefined:{...}, relaxed_wmd_pairs, bpe:{...}} */
TRACEX_API tracex_status tracex_result_summary_json(const tracex_result* r, char** out_json);
TRACEX_API void tracex_result_free(tracex_result* r);

/* Whole `analyze` run over the config's manifests. The summary lists each
 * written report directory and a human-readable log. */
TRACEX_API tracex_status tracex_run_analyze(const char* config_json, char** out_summary_json);

/* Loads a manifest and reports counts and empty artifacts as JSON. */
TRACEX_API tracex_status tracex_validate(const char* manifest_path, char** out_report_json);

/* Trains BPE over a corpus: a testbed manifest (*.json), a directory of text
 * files, or a single text file with one document per line. */
TRACEX_API tracex_status tracex_train_bpe(const char* corpus_path, size_t vocab_size, const char* out_path,
                                          char** out_summary_json);

/* Trains skip-gram vectors on the first manifest of config_json under its
 * preprocessing and writes the text format to out_path. */
TRACEX_API tracex_status tracex_train_embeddings(const char* config_json, const char* out_path,
                                                 char** out_summary_json);

/* Case listings (JSON lines) rebuilt from a pairs.csv record stream.
 * orphan_metric is "mi" or "si". */
TRACEX_API tracex_status tracex_cases(const char* pairs_csv_path, double orphan_quantile, const char* orphan_metric,
                                      size_t k, char** out_jsonl);

/* Information measures between two raw texts under conventional tokenization. */
TRACEX_API tracex_status tracex_info_texts(const char* source_text, const char* target_text, tracex_info* out);

#ifdef __cplusplus
}
#endif

#endif /* TRACEX_TRACEX_H */
