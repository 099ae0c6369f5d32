/* C interface to the cogkit shared library.
 *
 * Every function returns COGKIT_OK on success or a status describing the
 * failure class; cogkit_last_error() returns the matching message for the
 * calling thread. Strings handed back through `char**` out-parameters are
 * heap-allocated and must be released with cogkit_string_free().
 */
#ifndef COGKIT_H
#define COGKIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cogkit_status {
    COGKIT_OK = 0,
    COGKIT_ERR_IO = 1,
    COGKIT_ERR_PARSE = 2,
    COGKIT_ERR_INVALID_ARGUMENT = 3,
    COGKIT_ERR_NUMERICAL = 4,
    COGKIT_ERR_INSUFFICIENT_DATA = 5,
    COGKIT_ERR_INTERNAL = 6
} cogkit_status;

/* Library version string, e.g. "0.1.0". Static storage; do not free. */
const char* cogkit_version(void);

/* Message of the most recent failure on the calling thread; "" when the last
 * call succeeded. Valid until the next cogkit call on the same thread. */
const char* cogkit_last_error(void);

/* Releases a string returned through an out-parameter. NULL is a no-op. */
void cogkit_string_free(char* s);

/* Loads a pair corpus (plus optional synset contexts), optionally balances
 * the classes (seeded) and carves out a per-class gaze subset (seed + 1).
 * out_d1/out_d2 receive the remainder/subset pair TSVs when non-NULL; when
 * gaze_subset_n is 0, out_d1 receives the whole (possibly balanced) set.
 * summary_json_out receives a JSON description of every produced split. */
cogkit_status cogkit_ingest(const char* pairs_path,
                            const char* wordnet_path, /* NULL or "" to skip */
                            int balance, uint64_t seed, size_t gaze_subset_n,
                            const char* out_d1, const char* out_d2,
                            char** summary_json_out);

/* Edit-distance family for one word pair, as JSON:
 * {"levenshtein":L,"ned":N,"qgram_distance":Q,"wls":W}. */
cogkit_status cogkit_lexsim(const char* a, const char* b, int q, double alpha,
                            char** json_out);

/* Mean phonetic feature vector of one word under a codepoint table, as JSON:
 * {"word":...,"dim":P,"covered":0|1,"values":[...]}. */
cogkit_status cogkit_phonetic_word(const char* table_path, const char* word,
                                   char** json_out);

/* Fits an orthogonal map from the source space to the target space on a
 * bilingual dictionary, writes the mapped source table to out_path, and
 * reports {"dim":D,"dict_entries":n,"used":u,"skipped_oov":s} as JSON. */
cogkit_status cogkit_align(const char* src_path, const char* tgt_path,
                           const char* dict_path, const char* out_path,
                           char** json_out);

/* Per-(participant, trial) raw gaze feature vectors as CSV. */
cogkit_status cogkit_gaze_extract(const char* report_path,
                                  const char* trials_path,
                                  long min_fixation_ms, const char* out_csv);

/* Per-participant two-class fixation-duration statistics with a Welch
 * t-test, as CSV. norm is "ia_count" or "none". */
cogkit_status cogkit_gaze_analyze(const char* report_path,
                                  const char* trials_path,
                                  const char* pairs_path, long min_fixation_ms,
                                  const char* norm, const char* out_csv);

/* ANOVA-F + cross-validated selection of the best k gaze features over
 * k_grid; returns {"k":n,"indices":[...],"names":[...]} as JSON. */
cogkit_status cogkit_gaze_select(const char* report_path,
                                 const char* trials_path,
                                 const char* pairs_path, long min_fixation_ms,
                                 const int* k_grid, size_t k_grid_len,
                                 uint64_t seed, char** json_out);

/* Trains one model from an experiment config on the full selected dataset
 * and writes it to model_out_path as JSON. model is "logreg", "linear_svm",
 * "ffnn", or "gaze_regressor" (the latter ignores feature_set/dataset).
 * gaze_mode is "auto", "collected", or "predicted" (NULL for "auto").
 * json_out receives a short summary of the saved model. */
cogkit_status cogkit_train(const char* config_path, const char* model,
                           const char* feature_set, const char* dataset,
                           const char* gaze_mode, const char* model_out_path,
                           char** json_out);

/* Predicts gaze feature vectors for every pair of the selected dataset with
 * a saved gaze_regressor model; writes one CSV row per pair. */
cogkit_status cogkit_predict_gaze(const char* config_path,
                                  const char* model_path, const char* dataset,
                                  const char* out_csv);

/* Runs every experiment row of the config: cross-validated evaluation per
 * (feature set, model, dataset) plus report files in the output directory.
 * seed_override applies when has_seed_override is nonzero; out_dir, when
 * non-NULL, replaces the configured output directory. all_ok_out is set to 1
 * when every row evaluated cleanly, else 0. report_json_out receives the
 * full report document. */
cogkit_status cogkit_evaluate(const char* config_path, int has_seed_override,
                              uint64_t seed_override, const char* out_dir,
                              char** report_json_out, int* all_ok_out);

/* Converts a report.json written by cogkit_evaluate to the CSV form. */
cogkit_status cogkit_report_to_csv(const char* report_json_path,
                                   const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* COGKIT_H */
