#ifndef EMFREEZE_H
#define EMFREEZE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  EMF_STATUS_OK = 0,
  EMF_STATUS_NULL_POINTER = 1,
  EMF_STATUS_INVALID_ARGUMENT = 2,
  EMF_STATUS_DOMAIN = 3,
  EMF_STATUS_BASIS_MISMATCH = 4,
  EMF_STATUS_CAPACITY = 5,
  EMF_STATUS_NUMERICAL = 6,
  EMF_STATUS_CONVERGENCE = 7,
  EMF_STATUS_DEGENERATE_METRIC = 8,
  EMF_STATUS_CONFIG = 9,
  EMF_STATUS_IO = 10,
  EMF_STATUS_PANIC = 11,
} EmfStatus;

/**
 * Emergent-Hamiltonian construction route.
 */
typedef enum {
  EMF_VARIANT_EXACT1D = 0,
  EMF_VARIANT_EXACT2D_NN = 1,
  EMF_VARIANT_EXACT2D_TWO_SPIN_NNN = 2,
  EMF_VARIANT_UNITARY_EXACT = 3,
  EMF_VARIANT_TRUNC1 = 4,
  EMF_VARIANT_TRUNC2 = 5,
  EMF_VARIANT_TRUNC1_APPENDIX = 6,
  EMF_VARIANT_TRUNC2_APPENDIX = 7,
  EMF_VARIANT_TRUNC1_NNN_APPENDIX = 8,
  EMF_VARIANT_SPIN_PROMOTED = 9,
} EmfVariant;

/**
 * Fixed-particle-number Fock basis.
 */
typedef struct EmfBasis EmfBasis;

/**
 * Lattice model (engineered chain, rectangle or interacting two-spin model).
 */
typedef struct EmfModel EmfModel;

/**
 * Hermitian operator on a Fock basis.
 */
typedef struct EmfOperator EmfOperator;

/**
 * Normalized state on a Fock basis.
 */
typedef struct EmfState EmfState;

/**
 * Complex number with C layout.
 */
typedef struct {
  double re;
  double im;
} EmfComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *emf_version(void);

/**
 * Length in bytes of the calling thread's last error message, excluding the
 * terminating NUL. Zero after a successful call.
 */
size_t emf_last_error_length(void);

/**
 * Copy the last error message into `buf` (truncated to `cap - 1` bytes and
 * NUL-terminated). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `cap` writable bytes.
 */
size_t emf_last_error_message(char *buf, size_t cap);

/**
 * Engineered chain of `len` sites.
 *
 * # Safety
 * `out` must be valid for writes.
 */
EmfStatus emf_model_chain(size_t len, EmfModel **out);

/**
 * `lx x ly` rectangle with engineered nearest-neighbour hopping and
 * diagonal hopping `j_cross`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
EmfStatus emf_model_rect(size_t lx, size_t ly, double j_cross, EmfModel **out);

/**
 * Interacting two-spin model on an `lx x ly` rectangle (single excitation).
 *
 * # Safety
 * `out` must be valid for writes.
 */
EmfStatus emf_model_two_spin(size_t lx, size_t ly, EmfModel **out);

/**
 * # Safety
 * `model` must be null or a handle from an `emf_model_*` constructor, not yet freed.
 */
void emf_model_free(EmfModel *model);

/**
 * Basis of `particles` hardcore bosons on the model's lattice.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for writes.
 */
EmfStatus emf_basis_new(const EmfModel *model, size_t particles, EmfBasis **out);

/**
 * Dimension of the basis, or 0 for a null handle.
 *
 * # Safety
 * `basis` must be null or a live handle.
 */
size_t emf_basis_dim(const EmfBasis *basis);

/**
 * Occupation mask of basis state `index`.
 *
 * # Safety
 * `basis` must be a live handle; `lo` and `hi` must be valid for writes.
 */
EmfStatus emf_basis_state(const EmfBasis *basis, size_t index, uint64_t *lo, uint64_t *hi);

/**
 * # Safety
 * `basis` must be null or a live handle.
 */
void emf_basis_free(EmfBasis *basis);

/**
 * Entangling Hamiltonian `H_f` of `model` on `basis`.
 *
 * # Safety
 * `model` and `basis` must be live handles; `out` must be valid for writes.
 */
EmfStatus emf_operator_hf(const EmfModel *model, const EmfBasis *basis, EmfOperator **out);

/**
 * Initial Hamiltonian `H_0` of `model` on `basis`.
 *
 * # Safety
 * `model` and `basis` must be live handles; `out` must be valid for writes.
 */
EmfStatus emf_operator_h0(const EmfModel *model, const EmfBasis *basis, EmfOperator **out);

/**
 * Emergent Hamiltonian `M(t)` built by `variant`.
 *
 * # Safety
 * `model` and `basis` must be live handles; `out` must be valid for writes.
 */
EmfStatus emf_operator_emergent(const EmfModel *model,
                                const EmfBasis *basis,
                                EmfVariant variant,
                                double t,
                                EmfOperator **out);

/**
 * Dimension of the operator, or 0 for a null handle.
 *
 * # Safety
 * `op` must be null or a live handle.
 */
size_t emf_operator_dim(const EmfOperator *op);

/**
 * `output = op * input`; both buffers hold `len` entries, which must equal
 * the operator dimension.
 *
 * # Safety
 * `op` must be a live handle; `input` and `output` valid for `len` elements.
 */
EmfStatus emf_operator_apply(const EmfOperator *op,
                             const EmfComplex *input,
                             EmfComplex *output,
                             size_t len);

/**
 * `<psi|op|psi>`
 *
 * # Safety
 * `op` and `state` must be live handles; `out` valid for writes.
 */
EmfStatus emf_operator_expectation(const EmfOperator *op, const EmfState *state, double *out);

/**
 * Overlap metric `<psi|M|psi> / ||M psi||`, one exactly for a positive
 * eigenstate of `M`.
 *
 * # Safety
 * `op` and `state` must be live handles; `out` valid for writes.
 */
EmfStatus emf_operator_overlap_metric(const EmfOperator *op, const EmfState *state, double *out);

/**
 * # Safety
 * `op` must be null or a live handle.
 */
void emf_operator_free(EmfOperator *op);

/**
 * Product state with the listed sites occupied.
 *
 * # Safety
 * `basis` must be a live handle; `sites` valid for `n` elements; `out` valid for writes.
 */
EmfStatus emf_state_from_sites(const EmfBasis *basis,
                               const size_t *sites,
                               size_t n,
                               EmfState **out);

/**
 * State with the given amplitudes, which are normalized on entry.
 *
 * # Safety
 * `basis` must be a live handle; `amps` valid for `len` elements; `out` valid for writes.
 */
EmfStatus emf_state_from_amplitudes(const EmfBasis *basis,
                                    const EmfComplex *amps,
                                    size_t len,
                                    EmfState **out);

/**
 * Number of amplitudes, or 0 for a null handle.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
size_t emf_state_len(const EmfState *state);

/**
 * Copy the amplitudes into `out`, which holds `len` entries equal to the
 * state dimension.
 *
 * # Safety
 * `state` must be a live handle; `out` valid for `len` elements.
 */
EmfStatus emf_state_amplitudes(const EmfState *state, EmfComplex *out, size_t len);

/**
 * New state `exp(-i op t) state`.
 *
 * # Safety
 * `state` and `op` must be live handles; `out` valid for writes.
 */
EmfStatus emf_state_evolve(const EmfState *state, const EmfOperator *op, double t, EmfState **out);

/**
 * `<a|b>`
 *
 * # Safety
 * `a` and `b` must be live handles; `out` valid for writes.
 */
EmfStatus emf_state_inner(const EmfState *a, const EmfState *b, EmfComplex *out);

/**
 * Entanglement entropy in bits across the standard half cut (left half of
 * a chain, bottom rows of a rectangle).
 *
 * # Safety
 * `state` must be a live handle; `out` valid for writes.
 */
EmfStatus emf_state_entropy_half(const EmfState *state, double *out);

/**
 * # Safety
 * `state` must be null or a live handle.
 */
void emf_state_free(EmfState *state);

/**
 * GHZ fidelity of one-axis twisting with `qubits` spins at each of `n`
 * times, written to `out`.
 *
 * # Safety
 * `times` and `out` must be valid for `n` elements.
 */
EmfStatus emf_ghz_fidelity(size_t qubits,
                           double lambda,
                           const double *times,
                           size_t n,
                           double *out);

/**
 * Run the experiment described by the TOML file at `config_path`. A null
 * `out_dir` uses the directory named in the config.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out_dir` null or NUL-terminated.
 */
EmfStatus emf_run_config(const char *config_path, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMFREEZE_H */
