/* C interface to the sparse-vqe library. Generated by cbindgen from the sparse-vqe-ffi crate; do not edit by hand. */

#ifndef SPARSE_VQE_H
#define SPARSE_VQE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call in this interface.
//
// The values mirror the CLI's exit codes: 1 means the operator or run
// violated a library invariant, 2 means malformed input or usage.
typedef enum {
  // The call succeeded.
  SVQE_OK = 0,
  // An invariant check failed (non-Hermitian input, a monomial list
  // that is not conjugate closed, a pair that is not one-sparse, ...).
  SVQE_VALIDATION_FAILED = 1,
  // Malformed input: unparseable JSON, an out-of-range argument, a
  // parameter vector of the wrong length, ...
  SVQE_BAD_INPUT = 2,
  // A required pointer argument was NULL.
  SVQE_NULL_ARGUMENT = 3,
  // An internal panic was caught at the boundary. Always a bug in the
  // library; the message has the panic text.
  SVQE_INTERNAL_PANIC = 4,
} svqe_status;

// Whether a term flips sign under complex conjugation of the operator
// entry it came from: REAL terms encode a real-part bit, IMAGINARY terms
// an imaginary-part bit.
typedef enum {
  SVQE_PHASE_REAL = 0,
  SVQE_PHASE_IMAGINARY = 1,
} svqe_phase_class;

// Which of the two self-inverse terms at a bit level this one is. Where
// an entry's bit is 0 the PLUS and MINUS branches cancel; where it is 1
// they add.
typedef enum {
  SVQE_BRANCH_PLUS = 0,
  SVQE_BRANCH_MINUS = 1,
} svqe_branch;

// How terms act on the simulated state during sampled estimation.
typedef enum {
  // Apply the term's matrix action directly.
  SVQE_APPLY_DIRECT = 0,
  // Run the explicit oracle-query circuit (ancilla registers, oracle
  // calls charged to query counters).
  SVQE_APPLY_ORACLE_FAITHFUL = 1,
} svqe_apply_mode;

// Outer-loop optimizer.
typedef enum {
  SVQE_OPTIMIZER_SIMPLEX = 0,
  SVQE_OPTIMIZER_SPSA = 1,
} svqe_optimizer;

// Why an optimization run stopped.
typedef enum {
  // Best energy stopped improving by `f_tol` for the patience window.
  SVQE_STOP_TOLERANCE = 0,
  // Evaluation budget exhausted first.
  SVQE_STOP_MAX_ITERS = 1,
  // The optimizer's working set collapsed below machine resolution
  // before the tolerance rule fired.
  SVQE_STOP_STALLED = 2,
} svqe_stop_reason;

// A parameterized preparation circuit.
typedef struct svqe_ansatz svqe_ansatz;

// A parsed operator: either a COO sparse Hermitian matrix or a
// conjugate-closed ladder-monomial list.
typedef struct svqe_operator svqe_operator;

// A decomposition of an operator into positively weighted one-sparse,
// self-inverse, Hermitian terms.
typedef struct svqe_terms svqe_terms;

// Everything one optimization run produced.
typedef struct svqe_vqe_result svqe_vqe_result;

// Descriptive fields of one emitted term.
typedef struct {
  svqe_phase_class phase_class;
  // Bit level l >= 1; l = 1 is the most significant.
  size_t bit_index;
  svqe_branch branch;
  // Positive weight of the term in the decomposition sum.
  double coefficient;
} svqe_term_info;

// Settings for [`svqe_vqe_run`]. Fill with [`svqe_vqe_options_defaults`]
// first and then override fields as needed; enum fields must hold
// declared enum values.
typedef struct {
  svqe_optimizer optimizer;
  svqe_apply_mode mode;
  // Shots per term and evaluation; 0 selects the exact objective.
  uint64_t shots_per_term;
  // Maximum number of objective evaluations across all restarts.
  uint64_t max_iters;
  // Minimum best-energy improvement that counts as progress.
  double f_tol;
  // Seed for starting points and (in sampled runs) shot noise.
  uint64_t seed;
  // Independent repeats from fresh starting points.
  uint64_t restarts;
} svqe_vqe_options;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of this library as a static NUL-terminated string.
const char *svqe_version(void);

// Message of the most recent failing call on this thread, or an empty
// string if none has failed yet. The pointer stays valid until the next
// failing call on the same thread.
const char *svqe_last_error_message(void);

// Parse an operator document (JSON text). The format is decided by the
// root object's keys: "entries" means a COO sparse matrix, "terms" a
// ladder-monomial list. On success `*out` owns the new handle.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must point to writable
// memory for one pointer.
svqe_status svqe_operator_parse(const char *json, svqe_operator **out);

// Number of qubits the operator acts on (for monomial lists, the number
// of fermionic modes). Returns 0 if `op` is NULL.
//
// # Safety
// `op` must be NULL or a live handle from [`svqe_operator_parse`].
size_t svqe_operator_num_qubits(const svqe_operator *op);

// Run every invariant check the operator's format defines (Hermiticity,
// sparsity bounds, conjugate closure, one-sparsity of pairs, ...).
// Returns `SVQE_OK` when all pass; `SVQE_VALIDATION_FAILED` with a
// message naming the first failing check otherwise.
//
// # Safety
// `op` must be a live handle from [`svqe_operator_parse`].
svqe_status svqe_operator_validate(const svqe_operator *op);

// Release an operator handle. NULL is a no-op.
//
// # Safety
// `op` must be NULL or a live handle, and must not be used afterwards.
void svqe_operator_free(svqe_operator *op);

// Decompose an operator into weighted self-inverse terms whose sum
// reproduces it within `gamma` in max-norm. On success `*out` owns the
// new handle.
//
// # Safety
// `op` must be a live handle; `out` must point to writable memory for
// one pointer.
svqe_status svqe_decompose(const svqe_operator *op, double gamma, svqe_terms **out);

// Number of emitted terms. Returns 0 if `terms` is NULL.
//
// # Safety
// `terms` must be NULL or a live handle from [`svqe_decompose`].
size_t svqe_terms_count(const svqe_terms *terms);

// Number of qubits the terms act on. Returns 0 if `terms` is NULL.
//
// # Safety
// `terms` must be NULL or a live handle from [`svqe_decompose`].
size_t svqe_terms_num_qubits(const svqe_terms *terms);

// L, the number of bit levels used per one-sparse piece. Returns 0 if
// `terms` is NULL.
//
// # Safety
// `terms` must be NULL or a live handle from [`svqe_decompose`].
size_t svqe_terms_num_bits(const svqe_terms *terms);

// Lambda, the power-of-two magnitude anchor of the bit decomposition.
// Returns 0 if `terms` is NULL.
//
// # Safety
// `terms` must be NULL or a live handle from [`svqe_decompose`].
double svqe_terms_lambda(const svqe_terms *terms);

// Guaranteed bound on the max-norm difference between the weighted term
// sum and the input operator. Returns 0 if `terms` is NULL.
//
// # Safety
// `terms` must be NULL or a live handle from [`svqe_decompose`].
double svqe_terms_residual_bound(const svqe_terms *terms);

// Whether the coloring stage had to split any piece by chain alternation
// (doubling that piece's term budget). Returns false if `terms` is NULL.
//
// # Safety
// `terms` must be NULL or a live handle from [`svqe_decompose`].
bool svqe_terms_fallback_split_used(const svqe_terms *terms);

// Descriptive fields of the term at `index` (in emission order).
//
// # Safety
// `terms` must be a live handle; `out` must point to writable memory for
// one `svqe_term_info`.
svqe_status svqe_terms_info(const svqe_terms *terms, size_t index, svqe_term_info *out);

// Release a terms handle. NULL is a no-op.
//
// # Safety
// `terms` must be NULL or a live handle, and must not be used afterwards.
void svqe_terms_free(svqe_terms *terms);

// Build an ansatz circuit from a JSON template
// (`{"layers": k, "entangler": "cnot_ring"|"cz_line", "rotations": ["ry", ...]}`).
// On success `*out` owns the new handle.
//
// # Safety
// `template_json` must be a NUL-terminated string; `out` must point to
// writable memory for one pointer.
svqe_status svqe_ansatz_parse(const char *template_json, size_t num_qubits, svqe_ansatz **out);

// The gate-free ansatz: prepares |0...0> and takes no parameters. On
// success `*out` owns the new handle.
//
// # Safety
// `out` must point to writable memory for one pointer.
svqe_status svqe_ansatz_identity(size_t num_qubits, svqe_ansatz **out);

// Number of qubits the ansatz acts on. Returns 0 if `ansatz` is NULL.
//
// # Safety
// `ansatz` must be NULL or a live handle.
size_t svqe_ansatz_num_qubits(const svqe_ansatz *ansatz);

// Number of parameters the ansatz takes. Returns 0 if `ansatz` is NULL.
//
// # Safety
// `ansatz` must be NULL or a live handle.
size_t svqe_ansatz_parameter_count(const svqe_ansatz *ansatz);

// Release an ansatz handle. NULL is a no-op.
//
// # Safety
// `ansatz` must be NULL or a live handle, and must not be used
// afterwards.
void svqe_ansatz_free(svqe_ansatz *ansatz);

// Exact expectation value of the decomposed operator in the state the
// ansatz prepares at `theta` (no sampling). `theta_len` must equal the
// ansatz parameter count.
//
// # Safety
// `terms` and `ansatz` must be live handles; `theta` must point to
// `theta_len` doubles (or be NULL when `theta_len` is 0); `out_energy`
// must point to writable memory for one double.
svqe_status svqe_expectation_exact(const svqe_terms *terms,
                                   const svqe_ansatz *ansatz,
                                   const double *theta,
                                   size_t theta_len,
                                   double *out_energy);

// Sampled expectation value: `shots_per_term` Hadamard-test repetitions
// for every term, combined with the decomposition weights. Identical
// arguments and seed give identical results. `out_std_error` may be NULL
// when the standard error is not wanted.
//
// # Safety
// `terms` and `ansatz` must be live handles; `theta` must point to
// `theta_len` doubles (or be NULL when `theta_len` is 0); `out_energy`
// must point to writable memory for one double; `out_std_error` must be
// NULL or point to writable memory for one double.
svqe_status svqe_expectation_sampled(const svqe_terms *terms,
                                     const svqe_ansatz *ansatz,
                                     const double *theta,
                                     size_t theta_len,
                                     uint64_t shots_per_term,
                                     uint64_t seed,
                                     svqe_apply_mode mode,
                                     double *out_energy,
                                     double *out_std_error);

// Fill `*out` with the default options: simplex, exact objective, at
// most 2000 evaluations, f_tol 1e-9, seed 0, one restart.
//
// # Safety
// `out` must point to writable memory for one `svqe_vqe_options`.
svqe_status svqe_vqe_options_defaults(svqe_vqe_options *out);

// Minimize the expectation value over the ansatz parameters. On success
// `*out` owns the new result handle.
//
// # Safety
// `terms` and `ansatz` must be live handles; `options` must point to a
// filled `svqe_vqe_options`; `out` must point to writable memory for one
// pointer.
svqe_status svqe_vqe_run(const svqe_terms *terms,
                         const svqe_ansatz *ansatz,
                         const svqe_vqe_options *options,
                         svqe_vqe_result **out);

// Lowest energy any evaluation reached. Returns NaN if `result` is NULL.
//
// # Safety
// `result` must be NULL or a live handle from [`svqe_vqe_run`].
double svqe_vqe_result_best_energy(const svqe_vqe_result *result);

// Length of the best parameter vector. Returns 0 if `result` is NULL.
//
// # Safety
// `result` must be NULL or a live handle from [`svqe_vqe_run`].
size_t svqe_vqe_result_parameter_count(const svqe_vqe_result *result);

// Copy the best parameter vector into `out`. `len` must equal
// [`svqe_vqe_result_parameter_count`].
//
// # Safety
// `result` must be a live handle; `out` must point to `len` writable
// doubles.
svqe_status svqe_vqe_result_best_theta(const svqe_vqe_result *result, double *out, size_t len);

// Number of objective evaluations across all restarts. Returns 0 if
// `result` is NULL.
//
// # Safety
// `result` must be NULL or a live handle from [`svqe_vqe_run`].
size_t svqe_vqe_result_evaluations(const svqe_vqe_result *result);

// Copy every evaluation's energy (in evaluation order) into `out`.
// `len` must equal [`svqe_vqe_result_evaluations`].
//
// # Safety
// `result` must be a live handle; `out` must point to `len` writable
// doubles.
svqe_status svqe_vqe_result_energy_trace(const svqe_vqe_result *result, double *out, size_t len);

// Whether the run stopped because the tolerance rule fired (rather than
// exhausting its budget or stalling). Returns false if `result` is NULL.
//
// # Safety
// `result` must be NULL or a live handle from [`svqe_vqe_run`].
bool svqe_vqe_result_converged(const svqe_vqe_result *result);

// Why the run stopped. Returns `SVQE_STOP_STALLED` if `result` is NULL.
//
// # Safety
// `result` must be NULL or a live handle from [`svqe_vqe_run`].
svqe_stop_reason svqe_vqe_result_stop_reason(const svqe_vqe_result *result);

// Total shots consumed across all evaluations (0 for exact runs).
// Returns 0 if `result` is NULL.
//
// # Safety
// `result` must be NULL or a live handle from [`svqe_vqe_run`].
uint64_t svqe_vqe_result_total_shots(const svqe_vqe_result *result);

// Release a result handle. NULL is a no-op.
//
// # Safety
// `result` must be NULL or a live handle, and must not be used
// afterwards.
void svqe_vqe_result_free(svqe_vqe_result *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSE_VQE_H */
