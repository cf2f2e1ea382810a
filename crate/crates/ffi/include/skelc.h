#ifndef SKELC_H
#define SKELC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkelcMode {
  SKELC_MODE_SEQUENTIAL = 0,
  SKELC_MODE_PARALLEL = 1,
} SkelcMode;

typedef enum SkelcChunking {
  SKELC_CHUNKING_ROUND_ROBIN = 0,
  SKELC_CHUNKING_BLOCK = 1,
} SkelcChunking;

typedef enum SkelcDirection {
  SKELC_DIRECTION_RIGHT = 0,
  SKELC_DIRECTION_LEFT = 1,
} SkelcDirection;

typedef enum SkelcStatus {
  SKELC_STATUS_OK = 0,
  SKELC_STATUS_NULL_ARGUMENT = 1,
  SKELC_STATUS_INVALID_UTF8 = 2,
  SKELC_STATUS_PARSE = 3,
  SKELC_STATUS_INVALID_PROGRAM = 4,
  SKELC_STATUS_NOT_ENCODABLE = 5,
  SKELC_STATUS_RUNTIME = 6,
  SKELC_STATUS_PANIC = 7,
} SkelcStatus;

/**
 * A parsed program.
 */
typedef struct SkelcProgram SkelcProgram;

typedef struct SkelcRunConfig {
  enum SkelcMode mode;
  /**
   * 0 means one worker per logical core.
   */
  uint32_t workers;
  enum SkelcChunking chunking;
  enum SkelcDirection direction;
  /**
   * 0 means the default budget.
   */
  uint64_t fuel;
} SkelcRunConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next skelc call on the same thread.
 */
const char *skelc_last_error(void);

/**
 * Library version as a static string.
 */
const char *skelc_version(void);

/**
 * Defaults: sequential, one worker per core, round-robin, right fold.
 */
struct SkelcRunConfig skelc_run_config_default(void);

/**
 * # Safety
 * `src` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SkelcStatus skelc_program_parse(const char *src, struct SkelcProgram **out);

/**
 * # Safety
 * `p` must be NULL or a handle not yet freed.
 */
void skelc_program_free(struct SkelcProgram *p);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void skelc_string_free(char *s);

/**
 * Pretty-prints a program.
 *
 * # Safety
 * `p` must be a live handle and `out` a writable pointer.
 */
enum SkelcStatus skelc_program_to_string(const struct SkelcProgram *p, char **out);

/**
 * Encodes the recursive functions of `p` into a new program.
 *
 * # Safety
 * `p` must be a live handle and `out` a writable pointer.
 */
enum SkelcStatus skelc_program_encode(const struct SkelcProgram *p, struct SkelcProgram **out);

/**
 * Replaces functions that walk encoded lists with skeleton calls.
 *
 * # Safety
 * `p` must be a live handle and `out` a writable pointer.
 */
enum SkelcStatus skelc_program_skeletonize(const struct SkelcProgram *p, struct SkelcProgram **out);

/**
 * One line per function walking an encoded list: the name, a tab, and the
 * skeleton name or `-`.
 *
 * # Safety
 * `p` must be a live handle and `out` a writable pointer.
 */
enum SkelcStatus skelc_program_identify(const struct SkelcProgram *p, char **out);

/**
 * Evaluates `main` on `nargs` arguments, each an expression in the
 * program's syntax, and writes the printed result to `out`. `cfg` may be
 * NULL for the defaults.
 *
 * # Safety
 * `p` must be a live handle, `args` must point to `nargs` NUL-terminated
 * strings (it may be NULL when `nargs` is 0), `cfg` must be NULL or valid
 * and `out` a writable pointer.
 */
enum SkelcStatus skelc_program_run(const struct SkelcProgram *p,
                                   const struct SkelcRunConfig *cfg,
                                   const char *const *args,
                                   size_t nargs,
                                   char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKELC_H */
