#include "qoc/hamiltonian.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "kernels.hpp"

namespace qoc {

namespace {

constexpr int kDenseQubitCap = 8;

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

Mat pauli2(char axis) {
  Mat m(2, 2);
  const cplx i(0, 1);
  switch (axis) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    default: m << 1, 0, 0, -1; break;  // 'Z'; axes validated upstream
  }
  return m;
}

Mat dense_term(const PauliTerm& term) {
  Mat m = Mat::Identity(1, 1);
  for (char c : term.axes) {
    const Mat p = pauli2(c);
    // kron(m, p): expand each scalar of m by p.
    Mat out(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index cidx = 0; cidx < m.cols(); ++cidx)
        out.block(2 * r, 2 * cidx, 2, 2) = m(r, cidx) * p;
    m = std::move(out);
  }
  return term.coefficient * m;
}

Mat dense_sum_matrix(const PauliSum& sum) {
  const Eigen::Index d = Eigen::Index(1) << sum.width();
  Mat m = Mat::Zero(d, d);
  for (const PauliTerm& t : sum.terms) m += dense_term(t);
  return m;
}

void require_dense_width(int width, const char* what) {
  if (width > kDenseQubitCap)
    throw std::invalid_argument(std::string(what) + " exceeds the dense-matrix width cap");
}

// Two Pauli strings commute iff they anticommute on an even number of
// positions (both non-identity with different axes).
bool strings_commute(const PauliTerm& a, const PauliTerm& b) {
  int anti = 0;
  for (std::size_t q = 0; q < a.axes.size(); ++q) {
    const char ca = a.axes[q];
    const char cb = b.axes[q];
    if (ca != 'I' && cb != 'I' && ca != cb) ++anti;
  }
  return (anti % 2) == 0;
}

// One product-formula factor: exp(-i * angle_scale * coefficient * P) per
// term of a commuting group, with the group's shared angle scale applied at
// emission time.
struct FactorOp {
  detail::PauliMasks masks;
  double weight = 0.0;  // term coefficient, possibly times the pulse value
};

void apply_exp_op(QuantumState& state, const FactorOp& op, double angle_scale) {
  std::vector<cplx> out(state.amps.size());
  const double angle = angle_scale * op.weight;
  if (parallel_execution())
    detail::pauli_exp_parallel(state.amps, out, op.masks, angle, {});
  else
    detail::pauli_exp_serial(state.amps, out, op.masks, angle, {});
  state.amps.swap(out);
}

// Factor sequence of one interval before symmetrization: drift groups first,
// control groups after, terms in input order within each group.
struct IntervalOps {
  std::vector<FactorOp> ops;
};

IntervalOps interval_ops(const ControlHamiltonian& ch, double xi) {
  IntervalOps seq;
  const int w = ch.width();
  const auto emit = [&](const PauliSum& group, double scale) {
    for (const PauliTerm& t : group.terms)
      seq.ops.push_back({detail::make_masks(t.axes, 0, w), scale * t.coefficient});
  };
  if (!ch.h0.terms.empty())
    for (const PauliSum& g : commuting_groups(ch.h0)) emit(g, 1.0);
  if (!ch.mu.terms.empty() && xi != 0.0)
    for (const PauliSum& g : commuting_groups(ch.mu)) emit(g, xi);
  return seq;
}

// Symmetrized substep: half-angle sweep forward then the same sweep
// reversed. The palindrome is its own reverse, so the adjoint is obtained by
// negating angles without reordering.
void apply_substep(QuantumState& state, const IntervalOps& seq, double half_angle) {
  for (const FactorOp& op : seq.ops) apply_exp_op(state, op, half_angle);
  for (auto it = seq.ops.rbegin(); it != seq.ops.rend(); ++it)
    apply_exp_op(state, *it, half_angle);
}

}  // namespace

double PulseSequence::xi_max() const {
  double best = 0.0;
  for (double v : values) best = std::max(best, std::abs(v));
  return best;
}

void validate(const PulseSequence& pulse) {
  if (!(pulse.dt > 0.0)) throw std::invalid_argument("pulse dt must be positive");
  if (pulse.values.empty()) throw std::invalid_argument("pulse needs at least one interval");
  for (double v : pulse.values)
    if (!std::isfinite(v)) throw std::invalid_argument("pulse value is not finite");
}

void validate(const ControlHamiltonian& ch) {
  if (ch.h0.terms.empty() && ch.mu.terms.empty())
    throw std::invalid_argument("control Hamiltonian has no terms");
  if (!ch.h0.terms.empty()) validate(ch.h0);
  if (!ch.mu.terms.empty()) validate(ch.mu);
  if (!ch.h0.terms.empty() && !ch.mu.terms.empty() && ch.h0.width() != ch.mu.width())
    throw std::invalid_argument("drift and control terms act on different widths");
  validate(ch.pulse);
}

QuantumState trotter_evolve_interval(const QuantumState& state, const ControlHamiltonian& ch,
                                     const TrotterPlan& plan, int interval,
                                     Direction direction) {
  validate(ch);
  if (plan.steps_per_interval < 1)
    throw std::invalid_argument("steps_per_interval must be at least 1");
  if (interval < 0 || interval >= ch.pulse.num_intervals())
    throw std::invalid_argument("interval index out of range");
  if (state.num_qubits != ch.width())
    throw std::invalid_argument("state width does not match Hamiltonian width");

  const auto seq = interval_ops(ch, ch.pulse.values[std::size_t(interval)]);
  const double half =
      ch.pulse.dt / (2.0 * static_cast<double>(plan.steps_per_interval));
  const double signed_half = direction == Direction::forward ? half : -half;

  QuantumState out = state;
  for (int s = 0; s < plan.steps_per_interval; ++s)
    apply_substep(out, seq, signed_half);
  return out;
}

QuantumState trotter_evolve(const QuantumState& state, const ControlHamiltonian& ch,
                            const TrotterPlan& plan, Direction direction) {
  QuantumState out = state;
  const int n = ch.pulse.num_intervals();
  if (direction == Direction::forward) {
    for (int j = 0; j < n; ++j)
      out = trotter_evolve_interval(out, ch, plan, j, direction);
  } else {
    for (int j = n - 1; j >= 0; --j)
      out = trotter_evolve_interval(out, ch, plan, j, direction);
  }
  return out;
}

QuantumState exact_evolve(const QuantumState& state, const ControlHamiltonian& ch,
                          int substeps) {
  validate(ch);
  if (substeps < 1) throw std::invalid_argument("substeps must be at least 1");
  require_dense_width(ch.width(), "exact evolution width");
  if (state.num_qubits != ch.width())
    throw std::invalid_argument("state width does not match Hamiltonian width");

  const Eigen::Index d = Eigen::Index(1) << ch.width();
  Mat h0 = Mat::Zero(d, d);
  if (!ch.h0.terms.empty()) h0 = dense_sum_matrix(ch.h0);
  Mat mu = Mat::Zero(d, d);
  if (!ch.mu.terms.empty()) mu = dense_sum_matrix(ch.mu);

  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = state.amps[std::size_t(i)];
  for (double xi : ch.pulse.values) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h0 + xi * mu);
    const Eigen::VectorXd w = es.eigenvalues();
    Vec phases(d);
    for (Eigen::Index k = 0; k < d; ++k)
      phases(k) = std::exp(cplx(0, -ch.pulse.dt * w(k)));
    v = es.eigenvectors() * (phases.asDiagonal() * (es.eigenvectors().adjoint() * v));
  }

  QuantumState out;
  out.num_qubits = state.num_qubits;
  out.amps.resize(std::size_t(d));
  for (Eigen::Index i = 0; i < d; ++i) out.amps[std::size_t(i)] = v(i);
  return out;
}

double trotter_error_bound(double c_max, double total_time, int n_intervals) {
  if (!(c_max > 0.0) || !(total_time > 0.0) || n_intervals < 1)
    throw std::invalid_argument("error bound arguments must be positive");
  const double n = static_cast<double>(n_intervals);
  return c_max * c_max * total_time * total_time / (2.0 * n * n);
}

double spectral_norm(const PauliSum& ps) {
  validate(ps);
  require_dense_width(ps.width(), "spectral norm width");
  if (ps.term_count() == 1) return std::abs(ps.terms.front().coefficient);
  const Mat m = dense_sum_matrix(ps);
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  double best = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    best = std::max(best, std::abs(es.eigenvalues()(k)));
  return best;
}

std::vector<PauliSum> commuting_groups(const PauliSum& ps) {
  validate(ps);
  std::vector<PauliSum> groups;
  for (const PauliTerm& t : ps.terms) {
    bool placed = false;
    for (PauliSum& g : groups) {
      const bool fits = std::all_of(g.terms.begin(), g.terms.end(), [&](const PauliTerm& m) {
        return strings_commute(m, t);
      });
      if (fits) {
        g.terms.push_back(t);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back(PauliSum{{t}});
  }
  return groups;
}

double grouped_c_max(const ControlHamiltonian& ch) {
  validate(ch);
  double best = 0.0;
  if (!ch.h0.terms.empty())
    for (const PauliSum& g : commuting_groups(ch.h0))
      best = std::max(best, spectral_norm(g));
  if (!ch.mu.terms.empty()) {
    const double xi = ch.pulse.xi_max();
    for (const PauliSum& g : commuting_groups(ch.mu))
      best = std::max(best, xi * spectral_norm(g));
  }
  return best;
}

LcuDecomposition lcu_decompose(const PauliSum& mu) {
  validate(mu);
  LcuDecomposition out;
  for (const PauliTerm& t : mu.terms) {
    if (t.coefficient == 0.0) continue;
    LcuTerm lt;
    lt.weight = std::abs(t.coefficient);
    lt.unitary = t;
    lt.unitary.coefficient = t.coefficient > 0.0 ? 1.0 : -1.0;
    out.weight_sq_sum += lt.weight * lt.weight;
    out.weight_sum += lt.weight;
    out.terms.push_back(std::move(lt));
  }
  if (out.terms.empty()) throw std::invalid_argument("all terms have zero weight");
  return out;
}

BlockEncoding build_block_encoding(const PauliSum& mu) {
  BlockEncoding be;
  be.lcu = lcu_decompose(mu);
  be.system_width = mu.width();
  be.scale = be.lcu.weight_sum;
  const int d = static_cast<int>(be.lcu.terms.size());
  int k = 0;
  while ((1 << k) < d) ++k;
  be.ancillas = k;

  // Prepare rotates |0_k> to the weight profile; select applies unitary l on
  // the fiber where the ancilla register reads l.
  std::vector<cplx> prepare;     // V = U^dagger with U the profile-to-e0 rotation
  std::vector<cplx> unprepare;   // V^dagger = U
  if (k > 0) {
    QuantumState profile;
    profile.num_qubits = k;
    profile.amps.assign(std::size_t(1) << k, cplx(0));
    for (int l = 0; l < d; ++l)
      profile.amps[std::size_t(l)] = std::sqrt(be.lcu.terms[std::size_t(l)].weight / be.scale);
    unprepare = basis_rotation_matrix(profile);
    const std::size_t dim = profile.amps.size();
    prepare.resize(dim * dim);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c)
        prepare[r * dim + c] = std::conj(unprepare[c * dim + r]);
  }

  const int system_width = be.system_width;
  const int total = k + system_width;
  const auto lcu_terms = be.lcu.terms;
  be.unitary_plan = [k, system_width, total, prepare, unprepare,
                     lcu_terms](QuantumState& s) {
    if (s.num_qubits != total)
      throw std::invalid_argument("block-encoding plan width mismatch");
    std::vector<int> ancilla_qubits;
    for (int q = 0; q < k; ++q) ancilla_qubits.push_back(q);
    if (k > 0) s = apply_dense_on_register(s, ancilla_qubits, prepare);
    std::vector<cplx> out(s.amps.size());
    for (std::size_t l = 0; l < lcu_terms.size(); ++l) {
      const PauliTerm& u = lcu_terms[l].unitary;
      const auto masks = detail::make_masks(u.axes, k, total);
      detail::ControlFiber cf;
      cf.mask = ((std::uint64_t(1) << k) - 1) << system_width;
      cf.value = std::uint64_t(l) << system_width;
      if (parallel_execution())
        detail::pauli_apply_parallel(s.amps, out, masks, u.coefficient, cf);
      else
        detail::pauli_apply_serial(s.amps, out, masks, u.coefficient, cf);
      s.amps.swap(out);
    }
    if (k > 0) s = apply_dense_on_register(s, ancilla_qubits, unprepare);
  };
  return be;
}

}  // namespace qoc
