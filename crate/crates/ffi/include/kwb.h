#ifndef KWB_H
#define KWB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum KwbStatus {
  KWB_STATUS_OK = 0,
  // A required pointer argument was null.
  KWB_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  KWB_STATUS_INVALID_UTF8 = 2,
  // Ink or configuration JSON violated its schema or invariants.
  KWB_STATUS_INVALID_INPUT = 3,
  // The sketch had no strokes to assess.
  KWB_STATUS_EMPTY_SKETCH = 4,
  // Unknown character label or metric id.
  KWB_STATUS_NOT_FOUND = 5,
  // The store could not be read.
  KWB_STATUS_IO = 6,
  // Engine panic; the handle arguments are still valid.
  KWB_STATUS_INTERNAL = 99,
} KwbStatus;

// Threshold configuration.
typedef struct KwbConfig KwbConfig;

// One assessment report.
typedef struct KwbReport KwbReport;

// Loaded template store.
typedef struct KwbStore KwbStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, e.g. "0.1.0". Static; do not free.
const char *kwb_version(void);

// Message describing the last failure on this thread, or null. Valid until
// the next kwb call on the same thread; do not free.
const char *kwb_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a pointer returned as `char *` by this library that
// has not been freed.
void kwb_string_free(char *s);

// Loads a preprocessed template store directory.
//
// # Safety
// `dir` must be a NUL-terminated string and `out` a valid pointer.
enum KwbStatus kwb_store_open(const char *dir, struct KwbStore **out);

// # Safety
// `store` must be null or a handle from [`kwb_store_open`] not yet freed.
void kwb_store_free(struct KwbStore *store);

// Number of templates in the store; 0 for a null handle.
//
// # Safety
// `store` must be null or a live store handle.
size_t kwb_store_len(const struct KwbStore *store);

// Content hash identifying the store. Free with [`kwb_string_free`].
//
// # Safety
// `store` must be null or a live store handle.
char *kwb_store_version(const struct KwbStore *store);

// Default thresholds. Never null.
struct KwbConfig *kwb_config_default(void);

// Parses a thresholds JSON document; omitted keys take their defaults.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum KwbStatus kwb_config_from_json(const char *json, struct KwbConfig **out);

// # Safety
// `config` must be null or a config handle not yet freed.
void kwb_config_free(struct KwbConfig *config);

// Assesses one ink JSON document against the template named by its label.
// A null `config` means the defaults.
//
// # Safety
// `store` must be a live store handle, `config` null or a live config
// handle, `ink_json` a NUL-terminated string and `out` a valid pointer.
enum KwbStatus kwb_assess(const struct KwbStore *store,
                          const struct KwbConfig *config,
                          const char *ink_json,
                          struct KwbReport **out);

// # Safety
// `report` must be null or a report handle not yet freed.
void kwb_report_free(struct KwbReport *report);

// Stars (1..3) for a metric id such as "stroke_order".
//
// # Safety
// `report` must be a live report handle, `metric_id` a NUL-terminated
// string and `out_stars` a valid pointer.
enum KwbStatus kwb_report_stars(const struct KwbReport *report,
                                const char *metric_id,
                                uint8_t *out_stars);

// Raw value of a metric. `*out_present` is false when the metric had
// nothing comparable, in which case `*out_value` is NaN.
//
// # Safety
// `report` must be a live report handle, `metric_id` a NUL-terminated
// string, and both out pointers valid.
enum KwbStatus kwb_report_raw(const struct KwbReport *report,
                              const char *metric_id,
                              double *out_value,
                              bool *out_present);

// The full report as JSON. Free with [`kwb_string_free`]; null for a null
// handle.
//
// # Safety
// `report` must be null or a live report handle.
char *kwb_report_to_json(const struct KwbReport *report);

// Stars for a raw metric value under `config` (null for defaults). Pass
// `has_raw = false` when the metric had nothing comparable.
//
// # Safety
// `metric_id` must be a NUL-terminated string, `config` null or a live
// config handle, and `out_stars` a valid pointer.
enum KwbStatus kwb_score_metric(const char *metric_id,
                                double raw,
                                bool has_raw,
                                const struct KwbConfig *config,
                                uint8_t *out_stars);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KWB_H */
