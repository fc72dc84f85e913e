#ifndef DSQLT_H
#define DSQLT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>

typedef enum DsqltStatus {
  DSQLT_STATUS_OK = 0,
  DSQLT_STATUS_NULL_ARGUMENT = 1,
  DSQLT_STATUS_INVALID_UTF8 = 2,
  // The script has ERROR diagnostics.
  DSQLT_STATUS_SCRIPT_ERROR = 3,
  DSQLT_STATUS_EMIT_FAILED = 4,
  DSQLT_STATUS_CONNECTION_FAILED = 5,
  DSQLT_STATUS_STATEMENT_FAILED = 6,
  DSQLT_STATUS_PANIC = 7,
} DsqltStatus;

typedef enum DsqltDialect {
  DSQLT_DIALECT_PORTABLE = 0,
  DSQLT_DIALECT_ORACLE = 1,
} DsqltDialect;

// Compiled script plus its diagnostics.
typedef struct DsqltScript DsqltScript;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until the
// next call into this library on the same thread.
const char *dsqlt_last_error(void);

// Library version as a static NUL-terminated string.
const char *dsqlt_version(void);

// Compiles `len` bytes of script text. `name` labels diagnostics.
//
// A handle is stored in `*out` whenever the status is `Ok` or `ScriptError`,
// so the diagnostics can be read either way.
//
// # Safety
// `name` must be a NUL-terminated string, `text` must point to `len`
// readable bytes and `out` must be writable.
enum DsqltStatus dsqlt_compile(const char *name,
                               const char *text,
                               size_t len,
                               struct DsqltScript **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `script` must come from [`dsqlt_compile`] and not be freed twice.
void dsqlt_script_free(struct DsqltScript *script);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void dsqlt_string_free(char *s);

// Number of ERROR diagnostics.
//
// # Safety
// `script` must be a live handle or NULL.
size_t dsqlt_script_error_count(const struct DsqltScript *script);

// All diagnostics, one rendered line each.
//
// # Safety
// `script` must be a live handle and `out` writable.
enum DsqltStatus dsqlt_script_diagnostics(const struct DsqltScript *script, char **out);

// Generated SQL, one statement per line.
//
// # Safety
// `script` must be a live handle and `out` writable.
enum DsqltStatus dsqlt_emit(const struct DsqltScript *script,
                            enum DsqltDialect dialect,
                            bool terminator,
                            char **out);

// Runs the script against `locator` (for example `sqlite::memory:`). The
// per-statement report is stored in `*report` as JSON lines whenever the
// session opened, even if a statement failed.
//
// # Safety
// `script` must be a live handle, `locator` NUL-terminated and `report`
// writable or NULL.
enum DsqltStatus dsqlt_run(const struct DsqltScript *script,
                           const char *locator,
                           enum DsqltDialect dialect,
                           bool stop_on_error,
                           char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSQLT_H */
