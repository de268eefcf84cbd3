#pragma once

#include <vector>

#include "qoc/state.hpp"

namespace qoc {

// Piecewise-constant control field: value j holds on [j*dt, (j+1)*dt).
struct PulseSequence {
  double dt = 0.0;
  std::vector<double> values;

  int num_intervals() const { return static_cast<int>(values.size()); }
  double total_time() const { return dt * static_cast<double>(values.size()); }
  double xi_max() const;
};

void validate(const PulseSequence& pulse);

// H(t) = h0 + xi(t) * mu on a fixed-width register. Coefficients are real,
// so both sums are Hermitian by construction.
struct ControlHamiltonian {
  PauliSum h0;
  PauliSum mu;
  PulseSequence pulse;

  // mu may be empty (drift-only evolution); h0 sets the width then.
  int width() const { return h0.terms.empty() ? mu.width() : h0.width(); }
};

void validate(const ControlHamiltonian& ch);

// First-order product formula; each pulse interval is subdivided into
// steps_per_interval equal substeps without changing the frozen field value.
struct TrotterPlan {
  int steps_per_interval = 1;
};

enum class Direction { forward, backward };

// Product-formula propagator over all intervals (ascending for forward).
// The backward direction applies the exact adjoint of the forward product --
// the same factor sequence reversed with negated angles -- so a forward
// sweep followed by a backward sweep is the identity to rounding.
QuantumState trotter_evolve(const QuantumState& state, const ControlHamiltonian& ch,
                            const TrotterPlan& plan, Direction direction);

// Single interval j of the same product, for sweep algorithms that need
// partial propagators.
QuantumState trotter_evolve_interval(const QuantumState& state, const ControlHamiltonian& ch,
                                     const TrotterPlan& plan, int interval,
                                     Direction direction);

// Dense-exponential propagator (brute force, width <= 8). `substeps`
// subdivides each interval; the result is substep-independent because the
// Hamiltonian is frozen per interval, so it exists only for interface
// symmetry with TrotterPlan.
QuantumState exact_evolve(const QuantumState& state, const ControlHamiltonian& ch,
                          int substeps = 1);

// c_max^2 T^2 / (2 n^2): propagator-norm error of the first-order product
// formula with n total steps and factor norms bounded by c_max.
double trotter_error_bound(double c_max, double total_time, int n_intervals);

// Largest singular value of the dense matrix (width <= 8). Exact for a
// single term: |coefficient|.
double spectral_norm(const PauliSum& ps);

// Terms clustered greedily into mutually commuting groups; each group is one
// product-formula factor (exact within the group).
std::vector<PauliSum> commuting_groups(const PauliSum& ps);

// Largest factor norm over the whole pulse: drift groups at weight 1 and
// control groups at weight xi_max.
double grouped_c_max(const ControlHamiltonian& ch);

// One unitary of a linear-combination-of-unitaries split: weight > 0, and
// the term coefficient is +/-1 (signs folded into the unitary).
struct LcuTerm {
  double weight = 0.0;
  PauliTerm unitary;
};

struct LcuDecomposition {
  std::vector<LcuTerm> terms;
  double weight_sq_sum = 0.0;  // sum of weight^2
  double weight_sum = 0.0;     // sum of weights
};

LcuDecomposition lcu_decompose(const PauliSum& mu);

// Prepare-select embedding of mu: `unitary_plan` acts on ancillas+system
// qubits (ancillas leftmost) and satisfies scale * <0_k|B|0_k> = mu exactly.
struct BlockEncoding {
  int ancillas = 0;
  double scale = 0.0;
  int system_width = 0;
  LcuDecomposition lcu;
  UnitaryPlan unitary_plan;
};

BlockEncoding build_block_encoding(const PauliSum& mu);

}  // namespace qoc
