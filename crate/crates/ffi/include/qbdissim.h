#ifndef QBDISSIM_H
#define QBDISSIM_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QbStatus {
  QB_STATUS_OK = 0,
  QB_STATUS_NULL_POINTER = 1,
  QB_STATUS_INVALID_PARAMETER = 2,
  QB_STATUS_UNSUPPORTED_REGIME = 3,
  QB_STATUS_NUMERICAL = 4,
  QB_STATUS_OUT_OF_RANGE = 5,
  QB_STATUS_PANIC = 6,
} QbStatus;

/*
 Opaque engine parameters.
 */
typedef struct QbCycleSpec QbCycleSpec;

/*
 Opaque piecewise-constant drive protocol.
 */
typedef struct QbProtocol QbProtocol;

/*
 Coupling and bath of a single driven battery.
 */
typedef struct QbDriveParams {
  double omega;
  double epsilon;
  double beta;
} QbDriveParams;

/*
 Power and efficiencies at the charge time.
 */
typedef struct QbChargeMetrics {
  double t_charge;
  double stored_energy;
  double power;
  double work;
  double heat;
  double ergotropy;
  double eta_heat;
  double eta_ergo;
} QbChargeMetrics;

/*
 Thermodynamics of one limit cycle. Works are positive when extracted.
 */
typedef struct QbCycleLedger {
  double w1;
  double w2;
  double w3;
  double w4;
  double w5;
  double q_h;
  double q_c;
  double w_net;
  double eta;
  double power;
  double coherence_max;
  bool converged;
} QbCycleLedger;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *qb_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *qb_version(void);

/*
 Collective advantage `T_parallel / T_collective` for `n` batteries.

 # Safety
 `out` must be null or point to writable memory for one `double`.
 */
enum QbStatus qb_collective_advantage(uintptr_t n,
                                      double omega,
                                      double epsilon,
                                      double beta,
                                      double delta,
                                      double *out);

/*
 Charges with `alpha = 1` for `t_d`, then undriven, with dephasing strength `p`.

 # Safety
 `params` must be null or valid for reads; `out` null or valid for writes.
 */
enum QbStatus qb_charge_double_quench(const struct QbDriveParams *params,
                                      double t_d,
                                      double p,
                                      double delta,
                                      struct QbChargeMetrics *out);

/*
 Gradient-ascent protocol (best of the default restarts).

 # Safety
 `params` must be null or valid for reads; `out` null or valid for writes.
 The handle written to `out` must be released with [`qb_protocol_free`].
 */
enum QbStatus qb_optimize_protocol(const struct QbDriveParams *params,
                                   double t_n,
                                   uintptr_t n_segments,
                                   double zeta,
                                   uint64_t seed,
                                   struct QbProtocol **out);

/*
 Double-quench protocol: `alpha = 1` on `[0, t_d)`, then `alpha = 0` until `total`.

 # Safety
 `out` must be null or valid for writes; release the handle with [`qb_protocol_free`].
 */
enum QbStatus qb_protocol_double_quench(double t_d, double total, struct QbProtocol **out);

/*
 Number of segments, or 0 for a null handle.

 # Safety
 `protocol` must be null or a live handle.
 */
uintptr_t qb_protocol_len(const struct QbProtocol *protocol);

/*
 Duration and `alpha` of segment `k`.

 # Safety
 `protocol` must be null or a live handle; `dt` and `alpha` null or valid for writes.
 */
enum QbStatus qb_protocol_segment(const struct QbProtocol *protocol,
                                  uintptr_t k,
                                  double *dt,
                                  double *alpha);

/*
 # Safety
 `protocol` must be null or a handle not yet freed.
 */
void qb_protocol_free(struct QbProtocol *protocol);

/*
 Engine parameters with the coherent variant, full dephasing for the
 dephased variant and an even split of the cycle time.

 # Safety
 `out` must be null or valid for writes; release the handle with [`qb_cycle_spec_free`].
 */
enum QbStatus qb_cycle_spec_new(double omega_c,
                                double omega_h,
                                double beta_c,
                                double beta_h,
                                double epsilon,
                                double t_d,
                                double t_cycle,
                                struct QbCycleSpec **out);

/*
 Selects the coherent (`true`) or dephased (`false`) variant.

 # Safety
 `spec` must be null or a live handle.
 */
enum QbStatus qb_cycle_spec_set_coherent(struct QbCycleSpec *spec, bool coherent);

/*
 # Safety
 `spec` must be null or a handle not yet freed.
 */
void qb_cycle_spec_free(struct QbCycleSpec *spec);

/*
 Runs the engine to its limit cycle.

 # Safety
 `spec` must be null or a live handle; `out` null or valid for writes.
 */
enum QbStatus qb_run_cycle(const struct QbCycleSpec *spec, struct QbCycleLedger *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QBDISSIM_H */
