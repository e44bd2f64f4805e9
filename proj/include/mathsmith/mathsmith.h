/* mathsmith C API: opaque handles + status codes over the pipeline core.
 *
 * Every function returns MS_OK on success or a status code; the matching
 * human-readable message is available from ms_last_error() until the next
 * call on the same thread. Strings returned through char** out-parameters
 * are heap-allocated and must be released with ms_string_free().
 */

#ifndef MATHSMITH_H
#define MATHSMITH_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ms_status {
    MS_OK = 0,
    MS_ERR_INVALID_ARGUMENT = 1,
    MS_ERR_PRECONDITION = 2,
    MS_ERR_PARSE = 3,
    MS_ERR_IO = 4,
    MS_ERR_AUTH = 5,
    MS_ERR_RATE_LIMITED = 6,
    MS_ERR_MALFORMED_RESPONSE = 7,
    MS_ERR_EMPTY_INVENTORY = 8,
    MS_ERR_ISOLATED_NODE = 9,
    MS_ERR_DEAD_END = 10,
    MS_ERR_POOL_TOO_SMALL = 11,
    MS_ERR_UNDEFINED_DISTANCE = 12,
    MS_ERR_MANIFEST_MISMATCH = 13,
    MS_ERR_MALFORMED_RECORD = 14,
    MS_ERR_BAD_TEMPLATE = 15,
    MS_ERR_UNKNOWN_DATASET = 16,
    MS_ERR_DRIVER = 17,
    MS_ERR_JUDGE_UNAVAILABLE = 18,
    MS_ERR_FILTER_REJECTED = 19,
    MS_ERR_UNKNOWN_LABEL = 20,
    MS_ERR_STAGE = 21,
    MS_ERR_UNKNOWN = 22
} ms_status;

const char* ms_version(void);
const char* ms_status_name(ms_status status);

/* Message for the most recent failure on this thread; empty when none. */
const char* ms_last_error(void);

void ms_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Pipeline                                                            */

typedef struct ms_pipeline ms_pipeline;

/* Loads a JSON config file and prepares a staged pipeline runner. */
ms_status ms_pipeline_open(const char* config_path, ms_pipeline** out);

/* Dotted-key override applied on top of the config file, e.g.
 * ("walk.seed", "42") or ("decontamination.threshold", "0.6"). */
ms_status ms_pipeline_set_option(ms_pipeline* pipeline, const char* key, const char* value);

/* Runs one stage: extract | build-graph | sample | generate |
 * decontaminate | emit | evaluate. Writes a JSON summary of the stage's
 * counters to *summary_out when non-NULL. Re-running a completed stage
 * with unchanged inputs is a no-op ("skipped": true in the summary). */
ms_status ms_pipeline_run_stage(ms_pipeline* pipeline, const char* stage, char** summary_out);

/* JSON stats over whatever artifacts exist: inventory sizes, graph degree
 * histograms, composition counts, yields, contamination counters. */
ms_status ms_pipeline_stats(ms_pipeline* pipeline, char** stats_out);

void ms_pipeline_close(ms_pipeline* pipeline);

/* ------------------------------------------------------------------ */
/* Stateless helpers                                                   */

/* Instruction-tuning prompt wrapper around a question. */
ms_status ms_render_alpaca(const char* question, char** out);

/* Answer extraction over a model completion; *out is NULL when no rule
 * fires (that is not an error). */
ms_status ms_extract_answer(const char* completion, char** out);

/* Tiered fuzzy equivalence of an extracted answer against the gold one;
 * *verdict_out is 1 or 0. */
ms_status ms_verify_answer(const char* extracted, const char* gold, int* verdict_out);

/* Canonical form used by the contamination screen. */
ms_status ms_normalize_for_matching(const char* text, char** out);

/* Multiple-choice keyword screen; *verdict_out is 1 when the question
 * depends on the multiple-choice format. */
ms_status ms_is_bad_question(const char* question, int* verdict_out);

/* Jaccard distance between two string sets (arrays may contain
 * duplicates; they are treated as sets). */
ms_status ms_jaccard_distance(const char* const* a, size_t a_len, const char* const* b,
                              size_t b_len, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MATHSMITH_H */
