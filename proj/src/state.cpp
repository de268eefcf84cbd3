#include "qoc/state.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>

#include "kernels.hpp"

namespace qoc {

namespace {

std::atomic<bool> g_parallel{true};

std::uint64_t bit_of(int qubit, int num_qubits) {
  return std::uint64_t(1) << (num_qubits - 1 - qubit);
}

void check_qubit(int qubit, int num_qubits) {
  if (qubit < 0 || qubit >= num_qubits)
    throw std::invalid_argument("qubit index out of range");
}

// SplitMix64; decorrelates (master_seed, stream_index) pairs into engine seeds.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

void set_parallel_execution(bool enabled) { g_parallel.store(enabled); }
bool parallel_execution() { return g_parallel.load(); }

// --- QuantumState -----------------------------------------------------------

QuantumState QuantumState::zero(int num_qubits) {
  return basis(num_qubits, 0);
}

QuantumState QuantumState::basis(int num_qubits, std::uint64_t index) {
  if (num_qubits < 0 || num_qubits > kMaxQubits)
    throw std::invalid_argument("qubit count outside [0, 12]");
  QuantumState s;
  s.num_qubits = num_qubits;
  s.amps.assign(std::uint64_t(1) << num_qubits, cplx(0.0));
  if (index >= s.dim()) throw std::invalid_argument("basis index out of range");
  s.amps[index] = 1.0;
  return s;
}

QuantumState QuantumState::from_amplitudes(std::vector<cplx> amplitudes) {
  const std::size_t len = amplitudes.size();
  if (len == 0 || (len & (len - 1)) != 0)
    throw std::invalid_argument("amplitude length must be a power of two");
  int nq = 0;
  while ((std::size_t(1) << nq) < len) ++nq;
  if (nq > kMaxQubits) throw std::invalid_argument("qubit count outside [0, 12]");
  QuantumState s;
  s.num_qubits = nq;
  s.amps = std::move(amplitudes);
  const double n = s.norm();
  if (std::abs(n - 1.0) > 1e-6)
    throw std::invalid_argument("amplitudes are not normalized");
  s.normalize();
  return s;
}

double QuantumState::norm() const {
  const double n2 = parallel_execution() ? detail::norm2_parallel(amps)
                                         : detail::norm2_serial(amps);
  return std::sqrt(n2);
}

void QuantumState::normalize() {
  const double n = norm();
  if (n < kZeroOverlapTol) throw std::runtime_error("cannot normalize a null state");
  const double inv = 1.0 / n;
  for (cplx& a : amps) a *= inv;
}

// --- Pauli containers -------------------------------------------------------

void validate(const PauliTerm& term) {
  if (term.axes.empty()) throw std::invalid_argument("empty axes string");
  for (char c : term.axes)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      throw std::invalid_argument(std::string("invalid axis character '") + c + "'");
}

void validate(const PauliSum& sum) {
  if (sum.terms.empty()) throw std::invalid_argument("empty Pauli sum");
  const int w = sum.terms.front().width();
  for (const PauliTerm& t : sum.terms) {
    validate(t);
    if (t.width() != w) throw std::invalid_argument("mixed widths in Pauli sum");
  }
}

int PauliSum::locality() const {
  int best = 0;
  for (const PauliTerm& t : terms) {
    int k = 0;
    for (char c : t.axes)
      if (c != 'I') ++k;
    best = std::max(best, k);
  }
  return best;
}

// --- Sampling ---------------------------------------------------------------

std::uint64_t sample_binomial(std::uint64_t shots, double p,
                              std::uint64_t master_seed, std::uint64_t stream) {
  if (shots == 0) return 0;
  p = std::clamp(p, 0.0, 1.0);
  if (p == 0.0) return 0;
  if (p == 1.0) return shots;
  std::mt19937_64 eng(mix64(master_seed ^ mix64(stream)));
  std::binomial_distribution<std::uint64_t> dist(shots, p);
  return dist(eng);
}

// --- Gate-level operations --------------------------------------------------

namespace {

detail::PauliMasks masks_for(const PauliTerm& term, int offset, int num_qubits) {
  validate(term);
  if (offset < 0 || offset + term.width() > num_qubits)
    throw std::invalid_argument("Pauli string does not fit the register");
  return detail::make_masks(term.axes, offset, num_qubits);
}

detail::ControlFiber fiber_for(int control_qubit, int control_value, int num_qubits,
                               const detail::PauliMasks& m) {
  detail::ControlFiber cf;
  if (control_qubit < 0) return cf;
  check_qubit(control_qubit, num_qubits);
  if (control_value != 0 && control_value != 1)
    throw std::invalid_argument("control value must be 0 or 1");
  cf.mask = bit_of(control_qubit, num_qubits);
  cf.value = control_value ? cf.mask : 0;
  if ((m.x_mask | m.zy_mask) & cf.mask)
    throw std::invalid_argument("control qubit overlaps the acted-on register");
  return cf;
}

}  // namespace

namespace detail {
PauliMasks make_masks(const std::string& axes, int offset, int num_qubits) {
  PauliMasks m;
  for (int k = 0; k < static_cast<int>(axes.size()); ++k) {
    const std::uint64_t bit = std::uint64_t(1) << (num_qubits - 1 - (offset + k));
    switch (axes[k]) {
      case 'X': m.x_mask |= bit; break;
      case 'Y': m.x_mask |= bit; m.zy_mask |= bit; ++m.y_count; break;
      case 'Z': m.zy_mask |= bit; break;
      default: break;  // 'I'
    }
  }
  return m;
}
}  // namespace detail

QuantumState apply_pauli_string(const QuantumState& state, const PauliTerm& term) {
  if (term.width() != state.num_qubits)
    throw std::invalid_argument("Pauli width does not match state width");
  return apply_pauli_string_embedded(state, term, 0);
}

QuantumState apply_pauli_string_embedded(const QuantumState& state, const PauliTerm& term,
                                         int offset, int control_qubit, int control_value) {
  const auto m = masks_for(term, offset, state.num_qubits);
  const auto cf = fiber_for(control_qubit, control_value, state.num_qubits, m);
  QuantumState out;
  out.num_qubits = state.num_qubits;
  out.amps.resize(state.amps.size());
  if (parallel_execution())
    detail::pauli_apply_parallel(state.amps, out.amps, m, term.coefficient, cf);
  else
    detail::pauli_apply_serial(state.amps, out.amps, m, term.coefficient, cf);
  return out;
}

QuantumState apply_pauli_exponential(const QuantumState& state, const PauliTerm& term,
                                     double angle, int offset,
                                     int control_qubit, int control_value) {
  const auto m = masks_for(term, offset, state.num_qubits);
  const auto cf = fiber_for(control_qubit, control_value, state.num_qubits, m);
  QuantumState out;
  out.num_qubits = state.num_qubits;
  out.amps.resize(state.amps.size());
  if (parallel_execution())
    detail::pauli_exp_parallel(state.amps, out.amps, m, angle, cf);
  else
    detail::pauli_exp_serial(state.amps, out.amps, m, angle, cf);
  return out;
}

QuantumState apply_hadamard(const QuantumState& state, int qubit) {
  check_qubit(qubit, state.num_qubits);
  QuantumState out;
  out.num_qubits = state.num_qubits;
  out.amps.resize(state.amps.size());
  const std::uint64_t bit = bit_of(qubit, state.num_qubits);
  if (parallel_execution())
    detail::hadamard_parallel(state.amps, out.amps, bit);
  else
    detail::hadamard_serial(state.amps, out.amps, bit);
  return out;
}

QuantumState apply_controlled_swap(const QuantumState& state, int control_qubit,
                                   int reg_a_offset, int reg_b_offset, int reg_width) {
  const int n = state.num_qubits;
  check_qubit(control_qubit, n);
  if (reg_width <= 0 || reg_a_offset < 0 || reg_b_offset < 0 ||
      reg_a_offset + reg_width > n || reg_b_offset + reg_width > n)
    throw std::invalid_argument("swap registers out of range");
  const bool overlap = std::max(reg_a_offset, reg_b_offset) <
                       std::min(reg_a_offset, reg_b_offset) + reg_width;
  const bool ctrl_inside =
      (control_qubit >= reg_a_offset && control_qubit < reg_a_offset + reg_width) ||
      (control_qubit >= reg_b_offset && control_qubit < reg_b_offset + reg_width);
  if (overlap || ctrl_inside)
    throw std::invalid_argument("swap registers and control must be disjoint");
  std::vector<std::uint64_t> pair_bits;
  pair_bits.reserve(2 * reg_width);
  for (int k = 0; k < reg_width; ++k) {
    pair_bits.push_back(bit_of(reg_a_offset + k, n));
    pair_bits.push_back(bit_of(reg_b_offset + k, n));
  }
  QuantumState out;
  out.num_qubits = n;
  out.amps.resize(state.amps.size());
  const std::uint64_t cbit = bit_of(control_qubit, n);
  if (parallel_execution())
    detail::cswap_parallel(state.amps, out.amps, cbit, pair_bits);
  else
    detail::cswap_serial(state.amps, out.amps, cbit, pair_bits);
  return out;
}

namespace {

std::vector<std::uint64_t> sub_bits_for(const std::vector<int>& qubits, int num_qubits) {
  if (qubits.empty()) throw std::invalid_argument("empty qubit subset");
  std::vector<std::uint64_t> bits;
  bits.reserve(qubits.size());
  int prev = -1;
  for (int q : qubits) {
    check_qubit(q, num_qubits);
    if (q <= prev) throw std::invalid_argument("qubit subset must be strictly ascending");
    prev = q;
    bits.push_back(std::uint64_t(1) << (num_qubits - 1 - q));
  }
  return bits;
}

}  // namespace

QuantumState apply_dense_on_register(const QuantumState& state,
                                     const std::vector<int>& qubits,
                                     const std::vector<cplx>& matrix_row_major) {
  const auto sub_bits = sub_bits_for(qubits, state.num_qubits);
  const std::uint64_t sub_dim = std::uint64_t(1) << qubits.size();
  if (matrix_row_major.size() != sub_dim * sub_dim)
    throw std::invalid_argument("matrix size does not match register width");
  QuantumState out;
  out.num_qubits = state.num_qubits;
  out.amps.resize(state.amps.size());
  if (parallel_execution())
    detail::dense_register_parallel(state.amps, out.amps, sub_bits, matrix_row_major);
  else
    detail::dense_register_serial(state.amps, out.amps, sub_bits, matrix_row_major);
  return out;
}

QuantumState apply_controlled(const QuantumState& state, int control_qubit,
                              const UnitaryPlan& plan, int control_value) {
  const int n = state.num_qubits;
  check_qubit(control_qubit, n);
  if (control_value != 0 && control_value != 1)
    throw std::invalid_argument("control value must be 0 or 1");
  if (n < 2) throw std::invalid_argument("controlled application needs a target register");

  detail::BitSpread bs;
  const std::uint64_t cbit = bit_of(control_qubit, n);
  bs.removed_bits = {cbit};
  bs.forced_value = control_value ? cbit : 0;

  QuantumState fiber;
  fiber.num_qubits = n - 1;
  fiber.amps.resize(std::uint64_t(1) << (n - 1));
  if (parallel_execution())
    detail::fiber_extract_parallel(state.amps, fiber.amps, bs);
  else
    detail::fiber_extract_serial(state.amps, fiber.amps, bs);

  plan(fiber);
  if (fiber.num_qubits != n - 1 || fiber.amps.size() != (std::uint64_t(1) << (n - 1)))
    throw std::runtime_error("controlled plan changed the register width");

  QuantumState out;
  out.num_qubits = n;
  out.amps.resize(state.amps.size());
  if (parallel_execution())
    detail::fiber_embed_parallel(state.amps, fiber.amps, out.amps, bs);
  else
    detail::fiber_embed_serial(state.amps, fiber.amps, out.amps, bs);
  return out;
}

// --- Measurement side -------------------------------------------------------

cplx inner_product(const QuantumState& a, const QuantumState& b) {
  if (a.num_qubits != b.num_qubits)
    throw std::invalid_argument("inner product width mismatch");
  return parallel_execution() ? detail::dot_parallel(a.amps, b.amps)
                              : detail::dot_serial(a.amps, b.amps);
}

std::pair<QuantumState, double> project_register(const QuantumState& state,
                                                 const std::vector<int>& qubits,
                                                 const QuantumState& onto) {
  const int n = state.num_qubits;
  const int w = static_cast<int>(qubits.size());
  if (onto.num_qubits != w)
    throw std::invalid_argument("projection target width mismatch");
  const auto reg_bits = sub_bits_for(qubits, n);  // descending bit value
  if (w > n) throw std::invalid_argument("register wider than state");

  detail::BitSpread bs;
  bs.removed_bits.assign(reg_bits.rbegin(), reg_bits.rend());  // ascending
  bs.forced_value = 0;

  const std::uint64_t sub_dim = std::uint64_t(1) << w;
  std::vector<std::uint64_t> scatter(sub_dim, 0);
  for (std::uint64_t z = 0; z < sub_dim; ++z) {
    std::uint64_t bits = 0;
    for (int k = 0; k < w; ++k)
      if (z & (sub_dim >> (k + 1))) bits |= reg_bits[k];
    scatter[z] = bits;
  }

  QuantumState out;
  out.num_qubits = n - w;
  out.amps.assign(std::uint64_t(1) << (n - w), cplx(0.0));
  for (std::uint64_t r = 0; r < out.amps.size(); ++r) {
    const std::uint64_t base = bs.spread(r);
    cplx acc = 0;
    for (std::uint64_t z = 0; z < sub_dim; ++z)
      acc += std::conj(onto.amps[z]) * state.amps[base | scatter[z]];
    out.amps[r] = acc;
  }

  const double p = parallel_execution() ? detail::norm2_parallel(out.amps)
                                        : detail::norm2_serial(out.amps);
  if (p < kZeroOverlapTol)
    throw std::runtime_error("post-selection probability vanishes (invalid reference state)");
  const double inv = 1.0 / std::sqrt(p);
  for (cplx& a : out.amps) a *= inv;
  return {std::move(out), p};
}

QuantumState insert_zero_register(const QuantumState& state, int at, int count) {
  const int n = state.num_qubits;
  if (count < 0 || at < 0 || at > n)
    throw std::invalid_argument("bad insertion point");
  if (n + count > kMaxQubits)
    throw std::invalid_argument("insertion exceeds the qubit cap");
  if (count == 0) return state;

  detail::BitSpread bs;
  for (int k = count - 1; k >= 0; --k)  // ascending bit values
    bs.removed_bits.push_back(std::uint64_t(1) << (n + count - 1 - (at + k)));
  bs.forced_value = 0;

  QuantumState out;
  out.num_qubits = n + count;
  std::vector<cplx> zeros(std::uint64_t(1) << (n + count), cplx(0.0));
  out.amps.resize(zeros.size());
  if (parallel_execution())
    detail::fiber_embed_parallel(zeros, state.amps, out.amps, bs);
  else
    detail::fiber_embed_serial(zeros, state.amps, out.amps, bs);
  return out;
}

double measure_qubit_exact(const QuantumState& state, int qubit) {
  check_qubit(qubit, state.num_qubits);
  const std::uint64_t bit = bit_of(qubit, state.num_qubits);
  return parallel_execution() ? detail::bit_mass_parallel(state.amps, bit)
                              : detail::bit_mass_serial(state.amps, bit);
}

MeasureResult measure_qubit(const QuantumState& state, int qubit,
                            std::uint64_t shots, ShotSampler& sampler) {
  if (shots == 0) throw std::invalid_argument("shots must be at least 1");
  const double p1 = measure_qubit_exact(state, qubit);
  MeasureResult r;
  r.shots = shots;
  r.ones = sample_binomial(shots, p1, sampler.master_seed, sampler.take_stream());
  r.p1_estimate = static_cast<double>(r.ones) / static_cast<double>(shots);
  return r;
}

std::vector<cplx> basis_rotation_matrix(const QuantumState& zeta) {
  const std::uint64_t d = zeta.dim();
  // Phase-align the leading amplitude, then reflect onto e^{i phase} e_0.
  const cplx z0 = zeta.amps[0];
  const cplx e = std::abs(z0) > kZeroOverlapTol ? z0 / std::abs(z0) : cplx(1.0);

  std::vector<cplx> v(zeta.amps);
  v[0] -= e;
  double vv = 0.0;
  for (const cplx& x : v) vv += std::norm(x);

  std::vector<cplx> u(d * d, cplx(0.0));
  if (vv < 1e-24) {
    for (std::uint64_t i = 0; i < d; ++i) u[i * d + i] = 1.0;
  } else {
    const double s = 2.0 / vv;
    for (std::uint64_t r = 0; r < d; ++r)
      for (std::uint64_t c = 0; c < d; ++c)
        u[r * d + c] = (r == c ? 1.0 : 0.0) - s * v[r] * std::conj(v[c]);
  }
  // Undo the alignment phase so zeta lands exactly on |0...0>.
  for (std::uint64_t c = 0; c < d; ++c) u[c] *= std::conj(e);
  return u;
}

QuantumState rotate_to_basis_state(const QuantumState& state, const QuantumState& zeta,
                                   const std::vector<int>& qubits) {
  if (static_cast<int>(qubits.size()) != zeta.num_qubits)
    throw std::invalid_argument("reference state width does not match register");
  return apply_dense_on_register(state, qubits, basis_rotation_matrix(zeta));
}

}  // namespace qoc
