#ifndef DDFEN_H
#define DDFEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum DdfenStatus {
  DDFEN_STATUS_OK = 0,
  DDFEN_STATUS_NULL_POINTER = 1,
  DDFEN_STATUS_INPUT = 2,
  DDFEN_STATUS_NUMERICAL = 3,
  DDFEN_STATUS_INVARIANT = 4,
  DDFEN_STATUS_PANIC = 5,
  DDFEN_STATUS_BUFFER_TOO_SMALL = 6,
} DdfenStatus;

typedef enum DdfenIndex {
  DDFEN_INDEX_WEIGHTED_DEGREE = 0,
  DDFEN_INDEX_AUTHORITY = 1,
  DDFEN_INDEX_CLOSENESS = 2,
  DDFEN_INDEX_BETWEENNESS = 3,
} DdfenIndex;

/*
 Square matrix over nodes `0..n`: a correlation matrix, a direct-effect
 matrix, or a reconvolved one.
 */
typedef struct DdfenMatrix DdfenMatrix;

typedef struct DdfenNetwork DdfenNetwork;

typedef struct DdfenThresholdSummary {
  double sigma_min;
  /*
   Node whose strongest tie sets the cut.
   */
  size_t weakest_node;
  double theta;
  size_t kept_edges;
  size_t total_pairs;
  size_t components;
} DdfenThresholdSummary;

typedef struct DdfenEdge {
  size_t source;
  size_t target;
  double weight;
} DdfenEdge;

/*
 Message of the last failed call on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *ddfen_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ddfen_version(void);

/*
 DCCC of two series of length `n` at box size `box_size`.

 # Safety
 `x` and `y` must point to `n` readable doubles; `out` to one writable.
 */
enum DdfenStatus ddfen_dccc(const double *x,
                            const double *y,
                            size_t n,
                            size_t box_size,
                            double *out);

/*
 Root mean squared residual of `values` around its least-squares line.

 # Safety
 `values` must point to `n` readable doubles; `out` to one writable.
 */
enum DdfenStatus ddfen_detrended_volatility(const double *values, size_t n, double *out);

/*
 DCCC matrix of a column-major `n_obs x n_assets` return panel.

 # Safety
 `returns` must point to `n_obs * n_assets` readable doubles; `out` to a
 writable handle pointer.
 */
enum DdfenStatus ddfen_matrix_from_returns(const double *returns,
                                           size_t n_obs,
                                           size_t n_assets,
                                           size_t box_size,
                                           struct DdfenMatrix **out);

/*
 Wrap a row-major `n x n` correlation matrix. It must be symmetric with a
 unit diagonal and entries in `[-1, 1]`.

 # Safety
 `values` must point to `n * n` readable doubles; `out` to a writable
 handle pointer.
 */
enum DdfenStatus ddfen_matrix_from_values(const double *values, size_t n, struct DdfenMatrix **out);

/*
 Side length of the matrix, or 0 for a null handle.

 # Safety
 `matrix` must be null or a live handle.
 */
size_t ddfen_matrix_size(const struct DdfenMatrix *matrix);

/*
 Copy the matrix row-major into `out`, which must hold `n * n` doubles.

 # Safety
 `matrix` must be a live handle; `out` must point to `len` writable doubles.
 */
enum DdfenStatus ddfen_matrix_values(const struct DdfenMatrix *matrix, double *out, size_t len);

/*
 Direct-effect matrix `M (I + M)^-1` of `prescale * M`.

 # Safety
 `matrix` must be a live handle; `out` a writable handle pointer.
 */
enum DdfenStatus ddfen_matrix_deconvolve(const struct DdfenMatrix *matrix,
                                         double prescale,
                                         struct DdfenMatrix **out);

/*
 Observed matrix `G (I - G)^-1` implied by a direct-effect matrix `G`.

 # Safety
 `matrix` must be a live handle; `out` a writable handle pointer.
 */
enum DdfenStatus ddfen_matrix_convolve(const struct DdfenMatrix *matrix, struct DdfenMatrix **out);

/*
 # Safety
 `matrix` must be null or a handle not yet freed.
 */
void ddfen_matrix_free(struct DdfenMatrix *matrix);

/*
 Keep every entry of a direct-effect matrix at or above the smallest row
 maximum. `summary` may be null.

 # Safety
 `direct` must be a live handle; `out` a writable handle pointer;
 `summary` null or writable.
 */
enum DdfenStatus ddfen_network_threshold(const struct DdfenMatrix *direct,
                                         struct DdfenNetwork **out,
                                         struct DdfenThresholdSummary *summary);

/*
 Minimum spanning tree of a correlation matrix under `sqrt(2 (1 - rho))`.
 Edge weights are the correlations.

 # Safety
 `correlation` must be a live handle; `out` a writable handle pointer.
 */
enum DdfenStatus ddfen_network_mst(const struct DdfenMatrix *correlation,
                                   struct DdfenNetwork **out);

/*
 # Safety
 `network` must be null or a live handle.
 */
size_t ddfen_network_node_count(const struct DdfenNetwork *network);

/*
 # Safety
 `network` must be null or a live handle.
 */
size_t ddfen_network_edge_count(const struct DdfenNetwork *network);

/*
 Copy edges, sorted by `(source, target)` with `source < target`.

 # Safety
 `network` must be a live handle; `out` must point to `len` writable edges.
 */
enum DdfenStatus ddfen_network_edges(const struct DdfenNetwork *network,
                                     struct DdfenEdge *out,
                                     size_t len);

/*
 Node scores for one index, in node order.

 # Safety
 `network` must be a live handle; `out` must point to `len` writable
 doubles.
 */
enum DdfenStatus ddfen_network_index(const struct DdfenNetwork *network,
                                     enum DdfenIndex index,
                                     double *out,
                                     size_t len);

/*
 # Safety
 `network` must be null or a handle not yet freed.
 */
void ddfen_network_free(struct DdfenNetwork *network);

#endif  /* DDFEN_H */
