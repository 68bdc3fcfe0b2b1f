#ifndef PETRINV_H
#define PETRINV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PetrinvStatus {
  PETRINV_STATUS_OK = 0,
  PETRINV_STATUS_NULL_ARGUMENT = 1,
  PETRINV_STATUS_INVALID_UTF8 = 2,
  PETRINV_STATUS_INVALID_INPUT = 3,
  PETRINV_STATUS_RESOURCE_LIMIT = 4,
  PETRINV_STATUS_IO = 5,
  PETRINV_STATUS_PANIC = 6,
} PetrinvStatus;

typedef enum PetrinvSetKind {
  PETRINV_SET_KIND_MINIMAL_SUPPORTS = 0,
  PETRINV_SET_KIND_MINIMAL_SEMIFLOWS = 1,
  PETRINV_SET_KIND_RATIONAL_BASIS = 2,
} PetrinvSetKind;

/**
 * A reachability graph built from a net.
 */
typedef struct PetrinvGraph PetrinvGraph;

/**
 * A net with its initial marking.
 */
typedef struct PetrinvNet PetrinvNet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *petrinv_last_error(void);

/**
 * Parses `.pnet` text. `bindings_json` is a JSON object such as
 * `{"k": 2}` or null.
 *
 * # Safety
 * `text` and `bindings_json` must be null or NUL-terminated; `out` must be
 * writable.
 */
enum PetrinvStatus petrinv_net_parse(const char *text,
                                     const char *bindings_json,
                                     struct PetrinvNet **out);

/**
 * Instantiates a casebook entry (`tn`, `tel`, `tel2`, `twocycles`).
 *
 * # Safety
 * As for [`petrinv_net_parse`].
 */
enum PetrinvStatus petrinv_net_casebook(const char *name,
                                        const char *bindings_json,
                                        struct PetrinvNet **out);

/**
 * # Safety
 * `net` must come from this library and not be freed twice.
 */
void petrinv_net_free(struct PetrinvNet *net);

/**
 * # Safety
 * `net` must be a live handle or null (returns 0).
 */
uintptr_t petrinv_net_place_count(const struct PetrinvNet *net);

/**
 * # Safety
 * `net` must be a live handle or null (returns 0).
 */
uintptr_t petrinv_net_transition_count(const struct PetrinvNet *net);

/**
 * Serializes the net and its initial marking in `.pnet` form.
 *
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum PetrinvStatus petrinv_net_to_pnet(const struct PetrinvNet *net, char **out);

/**
 * Writes 1 to `out` iff `coords` (length `len`) is a semiflow.
 *
 * # Safety
 * `coords` must point to `len` integers; `out` must be writable.
 */
enum PetrinvStatus petrinv_verify_semiflow(const struct PetrinvNet *net,
                                           const int64_t *coords,
                                           uintptr_t len,
                                           bool *out);

/**
 * Generating set as JSON.
 *
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum PetrinvStatus petrinv_semiflows_json(const struct PetrinvNet *net,
                                          enum PetrinvSetKind kind,
                                          char **out);

/**
 * Place bounds, structural boundedness and threshold-dead transitions, as
 * JSON, from the minimal-support set.
 *
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum PetrinvStatus petrinv_bounds_json(const struct PetrinvNet *net, char **out);

/**
 * Explores at most `max_states` markings. A truncated graph is returned
 * with status `Ok`; queries on it report `ResourceLimit`.
 *
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum PetrinvStatus petrinv_graph_build(const struct PetrinvNet *net,
                                       uintptr_t max_states,
                                       struct PetrinvGraph **out);

/**
 * # Safety
 * `graph` must come from this library and not be freed twice.
 */
void petrinv_graph_free(struct PetrinvGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle or null (returns 0).
 */
uintptr_t petrinv_graph_node_count(const struct PetrinvGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle or null (returns false).
 */
bool petrinv_graph_is_complete(const struct PetrinvGraph *graph);

/**
 * Decides whether the markings satisfying `predicate` form a home space.
 * `counterexample` (nullable) receives a node index, or -1 when none.
 *
 * # Safety
 * `graph` must be a live handle; `predicate` NUL-terminated; `holds`
 * writable.
 */
enum PetrinvStatus petrinv_graph_is_home_space(const struct PetrinvGraph *graph,
                                               const char *predicate,
                                               bool *holds,
                                               intptr_t *counterexample);

/**
 * Live, quasi-live and dead transitions as JSON.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum PetrinvStatus petrinv_graph_live_json(const struct PetrinvGraph *graph, char **out);

/**
 * Graphviz rendering of the graph.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum PetrinvStatus petrinv_graph_dot(const struct PetrinvGraph *graph, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void petrinv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PETRINV_H */
