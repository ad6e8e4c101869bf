#ifndef COVER_FORGE_H
#define COVER_FORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CfStatus {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_POINTER = 1,
  CF_STATUS_INVALID_ARGUMENT = 2,
  CF_STATUS_OUT_OF_BOUNDS = 3,
  CF_STATUS_INVALID_TRANSITION = 4,
  CF_STATUS_INVALID_PATH = 5,
  CF_STATUS_CONFIG = 6,
  CF_STATUS_PARSE = 7,
  CF_STATUS_GENERATION = 8,
  CF_STATUS_INVALID_STATE = 9,
  CF_STATUS_INCOMPATIBLE_CHECKPOINT = 10,
  CF_STATUS_INVALID_UTF8 = 11,
  CF_STATUS_NO_PATH = 12,
  CF_STATUS_PANIC = 13,
} CfStatus;

typedef enum CfEventKind {
  CF_EVENT_KIND_STATE_CHANGED = 0,
  CF_EVENT_KIND_MOVED = 1,
  CF_EVENT_KIND_SENSED = 2,
  CF_EVENT_KIND_REPLANNED = 3,
  CF_EVENT_KIND_COMPLETED = 4,
} CfEventKind;

typedef enum CfOpState {
  CF_OP_STATE_IDLE = 0,
  CF_OP_STATE_MAPPING_LOCALIZATION = 1,
  CF_OP_STATE_MAP_CONVERSION = 2,
  CF_OP_STATE_COVERING = 3,
  CF_OP_STATE_RECOVERING = 4,
  CF_OP_STATE_COMPLETE = 5,
} CfOpState;

/**
 * Values for [`CfConfig::planner`] and [`CfEvent::planner`].
 */
typedef enum CfPlanner {
  CF_PLANNER_A_STAR = 0,
  CF_PLANNER_DIJKSTRA = 1,
  CF_PLANNER_DFS = 2,
} CfPlanner;

/**
 * Values for [`CfConfig::mode`].
 */
typedef enum CfMode {
  CF_MODE_THREE_STATE = 0,
  CF_MODE_FOUR_STATE = 1,
} CfMode;

/**
 * Values for [`CfConfig::heuristic`].
 */
typedef enum CfHeuristic {
  CF_HEURISTIC_EUCLIDEAN = 0,
  CF_HEURISTIC_MANHATTAN = 1,
  CF_HEURISTIC_CHEBYSHEV = 2,
  CF_HEURISTIC_ZERO = 3,
} CfHeuristic;

/**
 * Values for the `kind` argument of [`cf_field_pattern`].
 */
typedef enum CfPattern {
  CF_PATTERN_VERTICAL = 0,
  CF_PATTERN_HORIZONTAL = 1,
  CF_PATTERN_DIAGONAL = 2,
  CF_PATTERN_SPIRAL = 3,
} CfPattern;

/**
 * Opaque ground-truth field.
 */
typedef struct CfField CfField;

/**
 * Opaque simulator.
 */
typedef struct CfSimulator CfSimulator;

/**
 * Coverage and planning settings. Enum-valued fields hold the numeric
 * values of [`CfMode`], [`CfPlanner`] and [`CfHeuristic`].
 */
typedef struct CfConfig {
  uint32_t mode;
  uint32_t planner;
  uint32_t heuristic;
  /**
   * 4 or 8.
   */
  uint32_t connectivity;
  bool unknown_passable;
  double partial_cost_factor;
  size_t sensor_radius;
  bool switch_on_replan;
  uint64_t max_ticks;
  double minutes_per_tick;
  uint64_t turn_penalty_ticks;
} CfConfig;

typedef struct CfFieldInfo {
  size_t rows;
  size_t cols;
  size_t k;
  double obstacle_fraction;
} CfFieldInfo;

typedef struct CfCell {
  size_t row;
  size_t col;
} CfCell;

typedef struct CfPlanResult {
  bool found;
  double cost;
  size_t expanded;
  /**
   * Number of cells on the path, including both endpoints.
   */
  size_t length;
} CfPlanResult;

typedef struct CfReport {
  double coverage_percent;
  uint64_t ticks;
  double minutes;
  double path_length;
  uint64_t turns;
  uint64_t replans;
  uint64_t planner_switches;
  uint64_t partial_cells_identified;
  uint64_t revisits;
  size_t trajectory_len;
  bool incomplete;
} CfReport;

/**
 * One simulator event. Only the fields relevant to `kind` are meaningful.
 */
typedef struct CfEvent {
  enum CfEventKind kind;
  enum CfOpState from;
  enum CfOpState to;
  struct CfCell cell;
  size_t revealed;
  enum CfPlanner planner;
} CfEvent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *cf_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void cf_string_free(char *s);

/**
 * Writes the library's default settings to `out`.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum CfStatus cf_config_default(struct CfConfig *out);

/**
 * Parses the ASCII field format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out_field` must be valid for writes.
 */
enum CfStatus cf_field_parse(const char *text, struct CfField **out_field);

/**
 * # Safety
 * `out_field` must be valid for writes.
 */
enum CfStatus cf_field_random(size_t rows,
                              size_t cols,
                              double threshold,
                              uint64_t seed,
                              size_t k,
                              struct CfField **out_field);

/**
 * # Safety
 * `out_field` must be valid for writes.
 */
enum CfStatus cf_field_irregular(size_t rows,
                                 size_t cols,
                                 size_t obstacles,
                                 uint64_t seed,
                                 size_t k,
                                 struct CfField **out_field);

/**
 * # Safety
 * `out_field` must be valid for writes.
 */
enum CfStatus cf_field_maze_backtracker(size_t rows,
                                        size_t cols,
                                        uint64_t seed,
                                        struct CfField **out_field);

/**
 * # Safety
 * `out_field` must be valid for writes.
 */
enum CfStatus cf_field_maze_dfs(size_t rows,
                                size_t cols,
                                uint64_t seed,
                                struct CfField **out_field);

/**
 * `kind` is a [`CfPattern`] value.
 *
 * # Safety
 * `out_field` must be valid for writes.
 */
enum CfStatus cf_field_pattern(uint32_t kind, size_t rows, size_t cols, struct CfField **out_field);

/**
 * # Safety
 * `field` must be a live field handle; `out_text` must be valid for writes.
 */
enum CfStatus cf_field_serialize(const struct CfField *field, char **out_text);

/**
 * # Safety
 * `field` must be a live field handle; `out` must be valid for writes.
 */
enum CfStatus cf_field_info(const struct CfField *field, struct CfFieldInfo *out);

/**
 * # Safety
 * `field` must be NULL or a handle not yet freed.
 */
void cf_field_free(struct CfField *field);

/**
 * Plans from `start` to `goal` on the fully known field with the config's
 * planner and traversal settings. Up to `cells_capacity` path cells are
 * copied to `out_cells` (which may be NULL when the capacity is 0).
 * Returns `NoPath` when the goal is unreachable.
 *
 * # Safety
 * Handles and out pointers must be valid; `out_cells` must hold
 * `cells_capacity` elements.
 */
enum CfStatus cf_plan(const struct CfField *field,
                      const struct CfConfig *config,
                      struct CfCell start,
                      struct CfCell goal,
                      struct CfPlanResult *out,
                      struct CfCell *out_cells,
                      size_t cells_capacity);

/**
 * Runs the coverage loop to completion without the simulator's mapping pass.
 *
 * # Safety
 * Handles and out pointers must be valid.
 */
enum CfStatus cf_run_coverage(const struct CfField *field,
                              struct CfCell start,
                              const struct CfConfig *config,
                              struct CfReport *out);

/**
 * Creates a simulator over a copy of `field`. With `known_field` set the
 * robot starts from a fully sensed map and skips mapping.
 *
 * # Safety
 * Handles and out pointers must be valid.
 */
enum CfStatus cf_sim_new(const struct CfField *field,
                         struct CfCell start,
                         const struct CfConfig *config,
                         bool known_field,
                         struct CfSimulator **out_sim);

/**
 * Advances one step. Fails with `InvalidState` once the run is complete.
 *
 * # Safety
 * `sim` must be a live handle; `out_event` must be NULL or valid for writes.
 */
enum CfStatus cf_sim_step(struct CfSimulator *sim, struct CfEvent *out_event);

/**
 * # Safety
 * `sim` must be a live handle; `out` must be valid for writes.
 */
enum CfStatus cf_sim_state(const struct CfSimulator *sim, enum CfOpState *out);

/**
 * Injects a restart; the next step resumes mapping or coverage.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum CfStatus cf_sim_restart(struct CfSimulator *sim);

/**
 * Steps until complete and writes the final report.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be valid for writes.
 */
enum CfStatus cf_sim_run(struct CfSimulator *sim, struct CfReport *out);

/**
 * Report for the run so far.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be valid for writes.
 */
enum CfStatus cf_sim_report(const struct CfSimulator *sim, struct CfReport *out);

/**
 * Copies up to `capacity` trajectory cells and writes the full length to
 * `out_len`.
 *
 * # Safety
 * `sim` must be a live handle; `out_cells` must hold `capacity` elements.
 */
enum CfStatus cf_sim_trajectory(const struct CfSimulator *sim,
                                struct CfCell *out_cells,
                                size_t capacity,
                                size_t *out_len);

/**
 * Serializes the full simulator state to checkpoint text.
 *
 * # Safety
 * `sim` must be a live handle; `out_text` must be valid for writes.
 */
enum CfStatus cf_sim_checkpoint(const struct CfSimulator *sim, char **out_text);

/**
 * Rebuilds a simulator from checkpoint text. The field and config must be
 * the ones the checkpoint was taken with.
 *
 * # Safety
 * `checkpoint` must be a NUL-terminated string; handles and out pointers
 * must be valid.
 */
enum CfStatus cf_sim_restore(const char *checkpoint,
                             const struct CfField *field,
                             const struct CfConfig *config,
                             struct CfSimulator **out_sim);

/**
 * # Safety
 * `sim` must be NULL or a handle not yet freed.
 */
void cf_sim_free(struct CfSimulator *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVER_FORGE_H */
