#pragma once
// Dense statevector engine: state construction, Pauli-string application,
// controlled unitaries, projection/post-selection, and seeded shot sampling.
//
// Register convention: qubit 0 is the leftmost label and maps to the most
// significant bit of the amplitude index, so |10> lives at index 2.

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace qoc {

using cplx = std::complex<double>;

// Desk-scale cap: dense amplitudes become unwieldy past 2^12.
inline constexpr int kMaxQubits = 12;
// Norm drift tolerated after unitary ops; an order below accumulated
// double-precision error at the qubit cap.
inline constexpr double kNormTol = 1e-10;
// Overlaps below this are treated as vanishing (invalid reference state).
inline constexpr double kZeroOverlapTol = 1e-12;

struct QuantumState {
  int num_qubits = 0;
  std::vector<cplx> amps;  // size 2^num_qubits

  static QuantumState zero(int num_qubits);                       // |0...0>
  static QuantumState basis(int num_qubits, std::uint64_t index); // |index>
  // Validates length is a power of two within the cap and renormalizes when
  // the norm is within 1e-6 of unity; rejects anything farther off.
  static QuantumState from_amplitudes(std::vector<cplx> amplitudes);

  std::uint64_t dim() const { return std::uint64_t(1) << num_qubits; }
  double norm() const;
  void normalize();
};

// Single Pauli string with a real weight. The bare string (coefficient
// excluded) always has operator norm 1.
struct PauliTerm {
  double coefficient = 1.0;
  std::string axes;  // over {I,X,Y,Z}, one char per qubit, index 0 leftmost

  int width() const { return static_cast<int>(axes.size()); }
};

// Weighted sum of Pauli strings; the usual container for Hamiltonians and
// control operators.
struct PauliSum {
  std::vector<PauliTerm> terms;

  int width() const { return terms.empty() ? 0 : terms.front().width(); }
  int term_count() const { return static_cast<int>(terms.size()); }
  int locality() const;  // max non-identity qubits over terms
};

// Validates axes strings and uniform widths; throws std::invalid_argument.
void validate(const PauliTerm& term);
void validate(const PauliSum& sum);

// Deterministic per-experiment randomness: every experiment draws from its
// own stream (master_seed, stream_index), so results never depend on the
// order or parallelism with which experiments execute.
struct ShotSampler {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;  // running experiment counter

  std::uint64_t take_stream() { return stream_index++; }
};

// Number of 1-outcomes among `shots` Bernoulli(p) draws on the given stream.
std::uint64_t sample_binomial(std::uint64_t shots, double p,
                              std::uint64_t master_seed, std::uint64_t stream);

// Serial/parallel kernel toggle. Parallel mode requires OpenMP at build time
// (silently serial otherwise). Both modes produce bit-identical amplitudes:
// elementwise kernels are gather-only and reductions use a fixed block
// decomposition whose partial sums are combined serially in both modes.
void set_parallel_execution(bool enabled);
bool parallel_execution();

// --- Gate-level operations -------------------------------------------------

// Unnormalized image coefficient * P|psi>; norm of the result is
// |coefficient| times the input norm.
QuantumState apply_pauli_string(const QuantumState& state, const PauliTerm& term);

// Same, with the string embedded so its qubit 0 lands on state qubit
// `offset`, and optionally restricted to the fiber where `control_qubit`
// reads `control_value` (pass control_qubit = -1 for unconditional).
QuantumState apply_pauli_string_embedded(const QuantumState& state, const PauliTerm& term,
                                         int offset, int control_qubit = -1,
                                         int control_value = 1);

// exp(-i * angle * P) with P the bare string of `term` (its coefficient is
// folded into the angle by callers); embedded/controlled like above.
QuantumState apply_pauli_exponential(const QuantumState& state, const PauliTerm& term,
                                     double angle, int offset = 0,
                                     int control_qubit = -1, int control_value = 1);

QuantumState apply_hadamard(const QuantumState& state, int qubit);

// Swap two equal-width disjoint registers wherever `control_qubit` reads 1.
QuantumState apply_controlled_swap(const QuantumState& state, int control_qubit,
                                   int reg_a_offset, int reg_b_offset, int reg_width);

// Dense unitary on an arbitrary qubit subset (ascending positions); the
// matrix is row-major over the subset's own index space, subset qubit 0 most
// significant. Used for reference-state rotations and small test unitaries.
QuantumState apply_dense_on_register(const QuantumState& state,
                                     const std::vector<int>& qubits,
                                     const std::vector<cplx>& matrix_row_major);

// Any in-place state transform; used where a gate sequence is composed
// outside this module (e.g. Trotterized evolution).
using UnitaryPlan = std::function<void(QuantumState&)>;

// |v><v| (x) I + |1-v><1-v| (x) plan: runs `plan` on the fiber of basis
// states where `control_qubit` reads `control_value`, leaving the other
// fiber untouched. The plan sees a state one qubit narrower and must
// preserve its width.
QuantumState apply_controlled(const QuantumState& state, int control_qubit,
                              const UnitaryPlan& plan, int control_value = 1);

// --- Measurement-side operations -------------------------------------------

// Exact <a|b> (conjugate-linear in a). Blocked reduction; thread-count
// independent.
cplx inner_product(const QuantumState& a, const QuantumState& b);

// Projects the given qubits (ascending positions) onto |onto>, removes them,
// and renormalizes. Returns the reduced state and the success probability
// (squared norm of the projected component). Throws when the probability is
// below kZeroOverlapTol.
std::pair<QuantumState, double> project_register(const QuantumState& state,
                                                 const std::vector<int>& qubits,
                                                 const QuantumState& onto);

// Inserts `count` fresh qubits in state |0..0> so the first lands at
// position `at`; existing qubits shift right.
QuantumState insert_zero_register(const QuantumState& state, int at, int count);

// True probability of reading 1 on `qubit`; consumes no shots.
double measure_qubit_exact(const QuantumState& state, int qubit);

struct MeasureResult {
  double p1_estimate = 0.0;
  std::uint64_t ones = 0;
  std::uint64_t shots = 0;
};

// Samples `shots` Bernoulli outcomes of reading `qubit`, on the sampler's
// next stream.
MeasureResult measure_qubit(const QuantumState& state, int qubit,
                            std::uint64_t shots, ShotSampler& sampler);

// Applies a unitary taking |zeta> to the all-zeros basis state on the given
// qubits, so projecting onto zeta becomes a standard-basis measurement.
// Realized as a complex Householder reflection plus a phase fix.
QuantumState rotate_to_basis_state(const QuantumState& state, const QuantumState& zeta,
                                   const std::vector<int>& qubits);

// The rotation matrix itself (row-major, dim = 2^width of zeta); exposed for
// cross-checking against independently constructed completions.
std::vector<cplx> basis_rotation_matrix(const QuantumState& zeta);

}  // namespace qoc
