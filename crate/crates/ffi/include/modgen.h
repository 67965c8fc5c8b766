#ifndef MODGEN_H
#define MODGEN_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum {
  MODGEN_STATUS_OK = 0,
  MODGEN_STATUS_NULL_ARGUMENT = 1,
  MODGEN_STATUS_INVALID_UTF8 = 2,
  MODGEN_STATUS_PARSE_ERROR = 3,
  MODGEN_STATUS_UNKNOWN_TARGET = 4,
  MODGEN_STATUS_INVALID_CONFIG = 5,
  MODGEN_STATUS_OUT_OF_RANGE = 6,
  MODGEN_STATUS_INTERNAL = 7,
} ModgenStatus;

typedef enum {
  MODGEN_MODE_STRICT = 0,
  MODGEN_MODE_EMOTE = 1,
  MODGEN_MODE_WHOLE = 2,
} ModgenMode;

/**
 * Search settings.
 */
typedef struct ModgenConfig ModgenConfig;

/**
 * A type-checked MiniOO program.
 */
typedef struct ModgenProgram ModgenProgram;

/**
 * Outcome of one search.
 */
typedef struct ModgenResult ModgenResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *modgen_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *modgen_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void modgen_string_free(char *s);

/**
 * Parses and type-checks `source`.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be writable.
 */
ModgenStatus modgen_program_parse(const char *source, ModgenProgram **out);

/**
 * # Safety
 * `program` must be null or a handle from [`modgen_program_parse`].
 */
void modgen_program_free(ModgenProgram *program);

/**
 * Number of branch goals of `class.method`.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
ModgenStatus modgen_program_branch_count(const ModgenProgram *program,
                                         const char *class_,
                                         const char *method,
                                         uintptr_t *out);

/**
 * Default settings for `mode`: population 50, 10 s budget.
 */
ModgenConfig *modgen_config_new(ModgenMode mode, uint64_t seed);

/**
 * # Safety
 * `config` must be null or a handle from [`modgen_config_new`].
 */
void modgen_config_free(ModgenConfig *config);

/**
 * # Safety
 * `config` must be a live handle.
 */
ModgenStatus modgen_config_set_budget(ModgenConfig *config, double seconds);

/**
 * Caps the number of generations; 0 removes the cap.
 *
 * # Safety
 * `config` must be a live handle.
 */
ModgenStatus modgen_config_set_max_generations(ModgenConfig *config, uint64_t generations);

/**
 * # Safety
 * `config` must be a live handle.
 */
ModgenStatus modgen_config_set_population(ModgenConfig *config, uintptr_t size);

/**
 * Attributed fitness. Only honoured in WHOLE mode.
 *
 * # Safety
 * `config` must be a live handle.
 */
ModgenStatus modgen_config_set_attributed(ModgenConfig *config, bool on);

/**
 * Runs a search on `class.method`.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated; `out` writable.
 */
ModgenStatus modgen_evolve(const ModgenProgram *program,
                           const char *class_,
                           const char *method,
                           const ModgenConfig *config,
                           ModgenResult **out);

/**
 * # Safety
 * `result` must be null or a handle from [`modgen_evolve`].
 */
void modgen_result_free(ModgenResult *result);

/**
 * Number of branch goals of the target; 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
uintptr_t modgen_result_goal_count(const ModgenResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
uintptr_t modgen_result_covered_count(const ModgenResult *result);

/**
 * Branch coverage in percent; 100 when the target has no branches.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double modgen_result_coverage_pct(const ModgenResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
uint64_t modgen_result_evaluations(const ModgenResult *result);

/**
 * Name of goal `index` (e.g. `Album.getPrice/1#0:TRUE`) and whether it was
 * covered. The name is owned by the caller.
 *
 * # Safety
 * `result` must be a live handle; `name` and `covered` writable.
 */
ModgenStatus modgen_result_goal(const ModgenResult *result,
                                uintptr_t index,
                                char **name,
                                bool *covered);

/**
 * The archived tests as pseudocode; borrowed, valid while `result` lives.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
const char *modgen_result_tests(const ModgenResult *result);

/**
 * Diagnostic when the search could not start, or null.
 * The string is owned by the caller.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
char *modgen_result_diagnostic(const ModgenResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODGEN_H */
