#ifndef HODGE_SCATTER_H
#define HODGE_SCATTER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HsStatus {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  HS_STATUS_INVALID_ARGUMENT = 2,
  HS_STATUS_MALFORMED_SIMPLEX = 3,
  HS_STATUS_DIMENSION_OUT_OF_RANGE = 4,
  HS_STATUS_EMPTY_COMPLEX = 5,
  HS_STATUS_SCALE_OUT_OF_RANGE = 6,
  HS_STATUS_LENGTH_MISMATCH = 7,
  HS_STATUS_BUFFER_TOO_SMALL = 8,
  HS_STATUS_NUMERICAL = 9,
  HS_STATUS_PANIC = 10,
} HsStatus;

typedef enum HsLaplacian {
  HS_LAPLACIAN_COMBINATORIAL = 0,
  HS_LAPLACIAN_NORMALIZED = 1,
} HsLaplacian;

typedef enum HsDictionaryKind {
  HS_DICTIONARY_KIND_HGLET = 0,
  HS_DICTIONARY_KIND_GHWT = 1,
} HsDictionaryKind;

typedef enum HsPooling {
  HS_POOLING_GLOBAL = 0,
  HS_POOLING_NONE = 1,
  /**
   * Each scale path pooled over the regions of its last scale.
   */
  HS_POOLING_LOCAL = 2,
  /**
   * Every path pooled over the regions of `pool_scale`.
   */
  HS_POOLING_LOCAL_FIXED = 3,
} HsPooling;

typedef struct HsComplex HsComplex;

typedef struct HsDictionary HsDictionary;

/**
 * Scale stack of a dictionary together with a scattering configuration.
 */
typedef struct HsScatterer HsScatterer;

typedef struct HsTree HsTree;

typedef struct HsScatterConfig {
  size_t max_scale;
  size_t max_order;
  size_t max_moment;
  enum HsPooling pooling;
  size_t pool_scale;
} HsScatterConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *hs_last_error(void);

/**
 * Builds the closure of a list of simplices, truncated at `max_dim`.
 * Simplex i has vertices `vertices[offsets[i]..offsets[i+1]]`; `offsets`
 * holds `simplex_count + 1` entries.
 *
 * # Safety
 * `vertices` must hold `offsets[simplex_count]` readable entries, `offsets`
 * `simplex_count + 1`, and `out` must be writable.
 */
enum HsStatus hs_complex_new(const size_t *vertices,
                             const size_t *offsets,
                             size_t simplex_count,
                             size_t max_dim,
                             struct HsComplex **out);

/**
 * Number of κ-simplices, 0 when κ is above the top dimension.
 *
 * # Safety
 * `c` must be a live complex handle or null.
 */
size_t hs_complex_count(const struct HsComplex *c, size_t kappa);

/**
 * Top dimension, or -1 for the empty complex or a null handle.
 *
 * # Safety
 * `c` must be a live complex handle or null.
 */
ptrdiff_t hs_complex_max_dim(const struct HsComplex *c);

/**
 * # Safety
 * `c` must be null or a handle from `hs_complex_new` not yet freed.
 */
void hs_complex_free(struct HsComplex *c);

/**
 * Fiedler bipartition tree of the κ-simplices.
 *
 * # Safety
 * `c` must be a live complex handle and `out` writable.
 */
enum HsStatus hs_tree_build(const struct HsComplex *c,
                            size_t kappa,
                            enum HsLaplacian laplacian,
                            struct HsTree **out);

/**
 * Depth p_max of the tree, 0 for a null handle.
 *
 * # Safety
 * `t` must be a live tree handle or null.
 */
size_t hs_tree_depth(const struct HsTree *t);

/**
 * Number of simplices the tree partitions, 0 for a null handle.
 *
 * # Safety
 * `t` must be a live tree handle or null.
 */
size_t hs_tree_size(const struct HsTree *t);

/**
 * Number of regions at level p (0 = root).
 *
 * # Safety
 * `t` must be a live tree handle or null.
 */
size_t hs_tree_region_count(const struct HsTree *t, size_t level);

/**
 * Writes the leaf order (simplex indices, left to right) into `out`.
 *
 * # Safety
 * `t` must be a live tree handle and `out` must hold `len` writable entries.
 */
enum HsStatus hs_tree_leaf_order(const struct HsTree *t, size_t *out, size_t len);

/**
 * # Safety
 * `t` must be null or a handle from `hs_tree_build` not yet freed.
 */
void hs_tree_free(struct HsTree *t);

/**
 * HGLET or GHWT dictionary on the tree's regions. The complex must be the
 * one the tree was built from.
 *
 * # Safety
 * `c` and `t` must be live handles and `out` writable.
 */
enum HsStatus hs_dictionary_build(const struct HsComplex *c,
                                  const struct HsTree *t,
                                  enum HsDictionaryKind kind,
                                  struct HsDictionary **out);

/**
 * Writes the n expansion coefficients of `signal` at level p in (k, l)
 * order.
 *
 * # Safety
 * `d` must be a live handle; `signal` must hold `len` readable and `out`
 * `len` writable entries.
 */
enum HsStatus hs_dictionary_analyze(const struct HsDictionary *d,
                                    size_t level,
                                    const double *signal,
                                    double *out,
                                    size_t len);

/**
 * # Safety
 * `d` must be null or a handle from `hs_dictionary_build` not yet freed.
 */
void hs_dictionary_free(struct HsDictionary *d);

/**
 * Prepares scattering of signals on the dictionary's simplices.
 *
 * # Safety
 * `d` and `config` must be valid pointers and `out` writable.
 */
enum HsStatus hs_scatterer_new(const struct HsDictionary *d,
                               const struct HsScatterConfig *config,
                               struct HsScatterer **out);

/**
 * Features per signal.
 *
 * # Safety
 * `s` must be a live handle or null.
 */
size_t hs_scatterer_feature_count(const struct HsScatterer *s);

/**
 * Signal length the scatterer expects.
 *
 * # Safety
 * `s` must be a live handle or null.
 */
size_t hs_scatterer_signal_len(const struct HsScatterer *s);

/**
 * Scatters `count` signals stored row-major in `signals` (each of length
 * `signal_len`) into `out`, one row of `hs_scatterer_feature_count`
 * values per signal.
 *
 * # Safety
 * `signals` must hold `count * signal_len` readable entries and `out`
 * `out_len` writable entries.
 */
enum HsStatus hs_scatterer_apply(const struct HsScatterer *s,
                                 const double *signals,
                                 size_t count,
                                 size_t signal_len,
                                 double *out,
                                 size_t out_len);

/**
 * # Safety
 * `s` must be null or a handle from `hs_scatterer_new` not yet freed.
 */
void hs_scatterer_free(struct HsScatterer *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HODGE_SCATTER_H */
