#ifndef AESTHETICS_H
#define AESTHETICS_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AesStatus {
  AES_STATUS_OK = 0,
  AES_STATUS_NULL_POINTER = 1,
  AES_STATUS_INVALID_UTF8 = 2,
  AES_STATUS_PARSE_ERROR = 3,
  AES_STATUS_INVALID_DRAWING = 4,
  AES_STATUS_UNKNOWN_METRIC = 5,
  AES_STATUS_INVALID_ARGUMENT = 6,
  AES_STATUS_SESSION_FINISHED = 7,
  AES_STATUS_SESSION_ERROR = 8,
  AES_STATUS_PANIC = 9,
} AesStatus;

/**
 * Parsed, validated drawing.
 */
typedef struct AesDrawing AesDrawing;

/**
 * One interview.
 */
typedef struct AesSession AesSession;

/**
 * Element pool plus study configuration.
 */
typedef struct AesStudy AesStudy;

typedef struct AesMetricResult {
  double raw;
  double score;
  bool defined;
} AesMetricResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *aes_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void aes_string_free(char *s);

/**
 * Number of aesthetics in the catalog.
 */
size_t aes_catalog_len(void);

/**
 * Catalog id at `index` as a static string, or null when out of range.
 */
const char *aes_catalog_id(size_t index);

/**
 * Parses and validates a drawing from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum AesStatus aes_drawing_from_json(const char *json, struct AesDrawing **out);

/**
 * One random element drawing for `seed` with default generator settings.
 *
 * # Safety
 * `out` must be writable.
 */
enum AesStatus aes_drawing_generate(uint64_t seed, struct AesDrawing **out);

/**
 * # Safety
 * `d` must be null or a handle from this library, freed once.
 */
void aes_drawing_free(struct AesDrawing *d);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum AesStatus aes_drawing_to_json(const struct AesDrawing *d, char **out);

/**
 * # Safety
 * `d` must be a live handle; the outputs must be writable.
 */
enum AesStatus aes_drawing_size(const struct AesDrawing *d, size_t *nodes, size_t *edges);

/**
 * Number of edge crossings.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum AesStatus aes_drawing_crossings(const struct AesDrawing *d, size_t *out);

/**
 * Evaluates one metric by catalog id.
 *
 * # Safety
 * `d` must be a live handle, `metric` a NUL-terminated string and `out`
 * writable.
 */
enum AesStatus aes_metric_evaluate(const struct AesDrawing *d,
                                   const char *metric,
                                   struct AesMetricResult *out);

/**
 * Every metric as a JSON report.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum AesStatus aes_metrics_json(const struct AesDrawing *d, char **out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
enum AesStatus aes_render_svg(const struct AesDrawing *d, char **out);

/**
 * Lays out a graph (JSON) by simulated annealing. `objective_json` may be
 * null for uniform weights; `iterations` of 0 keeps the default budget.
 * `value` receives the final objective when not null.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum AesStatus aes_optimize(const char *graph_json,
                            const char *objective_json,
                            uint64_t seed,
                            size_t iterations,
                            struct AesDrawing **out,
                            double *value);

/**
 * Study over `count` generated elements with the default configuration.
 *
 * # Safety
 * `out` must be writable.
 */
enum AesStatus aes_study_generate(uint64_t seed, size_t count, struct AesStudy **out);

/**
 * # Safety
 * `s` must be null or a handle from this library, freed once.
 */
void aes_study_free(struct AesStudy *s);

/**
 * # Safety
 * `study` must be a live handle, strings NUL-terminated, `out` writable.
 */
enum AesStatus aes_session_start(const struct AesStudy *study,
                                 const char *session_id,
                                 const char *participant,
                                 uint64_t seed,
                                 struct AesSession **out);

/**
 * # Safety
 * `s` must be null or a handle from this library, freed once.
 */
void aes_session_free(struct AesSession *s);

/**
 * Presents the next triad; writes its JSON (`triad_id` and element ids).
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum AesStatus aes_session_next_triad(struct AesSession *s, char **out);

/**
 * Records a construct on the open triad and writes its id.
 *
 * # Safety
 * `s` must be a live handle, poles NUL-terminated, `out` writable.
 */
enum AesStatus aes_session_record_construct(struct AesSession *s,
                                            size_t triad_id,
                                            const char *pole_a,
                                            const char *pole_b,
                                            char **out);

/**
 * Closes the open triad; `finished` receives whether the session ended.
 *
 * # Safety
 * `s` must be a live handle; `finished` must be writable.
 */
enum AesStatus aes_session_complete_triad(struct AesSession *s, bool *finished);

/**
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum AesStatus aes_session_export_json(const struct AesSession *s, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AESTHETICS_H */
