#ifndef SPS_FFI_H
#define SPS_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SpsStatus {
  SPS_STATUS_OK = 0,
  SPS_STATUS_NULL_ARGUMENT = 1,
  SPS_STATUS_INVALID_UTF8 = 2,
  SPS_STATUS_CONFIG = 3,
  /**
   * The response holds an exception report.
   */
  SPS_STATUS_SERVICE_EXCEPTION = 4,
  SPS_STATUS_CODEC = 5,
  SPS_STATUS_CLOCK_UNAVAILABLE = 6,
  SPS_STATUS_PANIC = 7,
} SpsStatus;

/**
 * A service instance. Safe to share between threads.
 */
typedef struct SpsService SpsService;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a service from a JSON configuration file, or from the built-in
 * configuration when `config_path` is null.
 *
 * # Safety
 * `config_path` is null or a NUL-terminated string; `out` is writable.
 */
enum SpsStatus sps_service_new(const char *config_path, struct SpsService **out);

/**
 * # Safety
 * `svc` is null or came from `sps_service_new` and is not used afterwards.
 */
void sps_service_free(struct SpsService *svc);

/**
 * Dispatches one operation document. The response document is written
 * to `out_response` for both success and exception reports;
 * `out_http_status` (optional) receives the HTTP status it maps to.
 *
 * # Safety
 * `svc` is a live handle, `request_xml` a NUL-terminated string,
 * `out_response` writable, `out_http_status` null or writable.
 */
enum SpsStatus sps_service_dispatch(const struct SpsService *svc,
                                    const char *request_xml,
                                    char **out_response,
                                    uint16_t *out_http_status);

/**
 * Advances the virtual clock and fires due timers. `out_now` (optional)
 * receives the new instant.
 *
 * # Safety
 * `svc` is a live handle; `out_now` is null or writable.
 */
enum SpsStatus sps_service_advance_clock(const struct SpsService *svc,
                                         int64_t seconds,
                                         char **out_now);

/**
 * The notification topic namespace document.
 *
 * # Safety
 * `out` is writable.
 */
enum SpsStatus sps_topic_namespace(char **out);

/**
 * Decodes `values` under a tasking description document and re-encodes
 * the result into `out_values`.
 *
 * # Safety
 * All string arguments are NUL-terminated; `out_values` is writable.
 */
enum SpsStatus sps_codec_roundtrip(const char *description_xml,
                                   const char *values,
                                   const char *token_separator,
                                   const char *block_separator,
                                   char **out_values);

/**
 * # Safety
 * `s` is null or a string returned by this library, freed once.
 */
void sps_string_free(char *s);

/**
 * Message for the last failed call on this thread; empty after success.
 * Valid until the next call into this library on the same thread.
 */
const char *sps_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPS_FFI_H */
