#include "qoc/primitives.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qoc {

namespace {

QuantumState tensor(const QuantumState& x, const QuantumState& y) {
  QuantumState out;
  out.num_qubits = x.num_qubits + y.num_qubits;
  if (out.num_qubits > kMaxQubits)
    throw std::invalid_argument("combined register exceeds the qubit cap");
  out.amps.resize(std::size_t(1) << out.num_qubits);
  const std::size_t dy = y.amps.size();
  for (std::size_t i = 0; i < x.amps.size(); ++i)
    for (std::size_t j = 0; j < dy; ++j) out.amps[i * dy + j] = x.amps[i] * y.amps[j];
  return out;
}

QuantumState ancilla_state(cplx a, cplx b) {
  QuantumState s;
  s.num_qubits = 1;
  s.amps = {a, b};
  return s;
}

// Shots needed to land `shots` post-selected outcomes at success rate p.
std::uint64_t charge_shots(std::uint64_t shots, double success_prob) {
  const double raw = std::ceil(static_cast<double>(shots) / success_prob);
  const double cap = 1e18;  // far beyond any realistic budget; avoids overflow
  return static_cast<std::uint64_t>(std::min(raw, cap));
}

struct AncillaReadout {
  double value = 0.0;            // 2P-1 with the sign convention of the config
  std::uint64_t charged = 0;
};

// Hadamard on the ancilla, then read. The real config reports 2*P0 - 1, the
// imaginary config 2*P1 - 1; together they give re + i*im = <chi(t)|psi(t)>.
AncillaReadout read_ancilla(QuantumState state, bool imag_config, Backend backend,
                            std::uint64_t shots, double success_prob,
                            ShotSampler& sampler) {
  state = apply_hadamard(state, 0);
  AncillaReadout out;
  double p1 = 0.0;
  if (backend == Backend::sampled) {
    if (shots < 1) throw std::invalid_argument("sampled backend needs at least one shot");
    p1 = measure_qubit(state, 0, shots, sampler).p1_estimate;
    out.charged = charge_shots(shots, success_prob);
  } else {
    p1 = measure_qubit_exact(state, 0);
  }
  out.value = imag_config ? 2.0 * p1 - 1.0 : 1.0 - 2.0 * p1;
  return out;
}

// Superpose, twist beta for the imaginary configuration, evolve branches.
std::pair<QuantumState, double> prepare_configuration(const SuperpositionTask& task,
                                                      bool imag_config) {
  SuperpositionTask t = task;
  if (imag_config) t.beta *= cplx(0, -1);
  auto [state, p] = lambda_sup(t);
  state = conditional_evolve(state, task.u_plan, task.v_plan);
  return {std::move(state), p};
}

void check_plan(const std::optional<EvolutionPlan>& plan, int system_width,
                const char* which) {
  if (!plan) return;
  validate(plan->ch);
  if (plan->ch.width() != system_width)
    throw std::invalid_argument(std::string(which) +
                                " evolution width does not match the system register");
}

}  // namespace

void validate(const SuperpositionTask& task) {
  const double amp2 = std::norm(task.alpha) + std::norm(task.beta);
  if (std::abs(amp2 - 1.0) > 1e-10)
    throw std::invalid_argument("superposition amplitudes are not normalized");
  const int w = task.psi0.num_qubits;
  if (w < 1) throw std::invalid_argument("empty system register");
  if (task.chi0.num_qubits != w || task.zeta.num_qubits != w)
    throw std::invalid_argument("superposition states have mismatched widths");
  if (std::abs(inner_product(task.psi0, task.zeta)) <= kZeroOverlapTol ||
      std::abs(inner_product(task.chi0, task.zeta)) <= kZeroOverlapTol)
    throw std::invalid_argument("reference state is orthogonal to an input state");
  check_plan(task.u_plan, w, "branch-0");
  check_plan(task.v_plan, w, "branch-1");
}

std::pair<QuantumState, double> lambda_sup(const SuperpositionTask& task) {
  validate(task);
  const int w = task.psi0.num_qubits;

  const cplx ov_psi = inner_product(task.psi0, task.zeta);
  const cplx ov_chi = inner_product(task.chi0, task.zeta);
  const cplx phase_psi = ov_psi / std::abs(ov_psi);
  const cplx phase_chi = ov_chi / std::abs(ov_chi);

  cplx a = task.alpha;
  cplx b = task.beta;
  if (task.compensate_phases) {
    a *= std::conj(phase_psi);
    b *= std::conj(phase_chi);
  }

  // [ancilla][A: psi0][B: chi0], swap the work registers on ancilla 1, then
  // project B onto the reference. Branch 0 keeps a <zeta|chi0> factor and
  // branch 1 a <zeta|psi0> factor (the crossed overlaps).
  QuantumState state = tensor(ancilla_state(a, b), tensor(task.psi0, task.chi0));
  state = apply_controlled_swap(state, 0, 1, 1 + w, w);

  std::vector<int> reg_b;
  for (int q = 1 + w; q < 1 + 2 * w; ++q) reg_b.push_back(q);
  auto [projected, p_zeta] = project_register(state, reg_b, task.zeta);

  // Rescale the ancilla branches so both crossed-overlap magnitudes cancel;
  // keeping the larger weight at 1 makes this a valid post-selection.
  const double m_psi = std::abs(ov_psi);
  const double m_chi = std::abs(ov_chi);
  const double r = std::min(m_psi, m_chi);
  const double w0 = r / m_chi;
  const double w1 = r / m_psi;
  const std::uint64_t anc_bit = std::uint64_t(1) << w;
  double kept = 0.0;
  for (std::size_t i = 0; i < projected.amps.size(); ++i) {
    projected.amps[i] *= (i & anc_bit) ? w1 : w0;
    kept += std::norm(projected.amps[i]);
  }
  const double inv = 1.0 / std::sqrt(kept);
  // A global phase clears the leftover conjugate phases: the state becomes
  // a*e^{i theta_psi}|0>|psi0> + b*e^{i theta_chi}|1>|chi0>.
  const cplx fix = phase_psi * phase_chi * inv;
  for (auto& amp : projected.amps) amp *= fix;

  return {std::move(projected), p_zeta * kept};
}

QuantumState conditional_evolve(const QuantumState& superposed,
                                const std::optional<EvolutionPlan>& u_plan,
                                const std::optional<EvolutionPlan>& v_plan) {
  if (superposed.num_qubits < 2)
    throw std::invalid_argument("superposed state needs an ancilla and a system register");
  const int w = superposed.num_qubits - 1;
  check_plan(u_plan, w, "branch-0");
  check_plan(v_plan, w, "branch-1");
  QuantumState out = superposed;
  if (u_plan) {
    const UnitaryPlan step = [&](QuantumState& s) {
      s = trotter_evolve(s, u_plan->ch, u_plan->trotter, Direction::forward);
    };
    out = apply_controlled(out, 0, step, 0);
  }
  if (v_plan) {
    const UnitaryPlan step = [&](QuantumState& s) {
      s = trotter_evolve(s, v_plan->ch, v_plan->trotter, Direction::forward);
    };
    out = apply_controlled(out, 0, step, 1);
  }
  return out;
}

OverlapEstimate oea(const SuperpositionTask& task, Backend backend, std::uint64_t shots,
                    ShotSampler& sampler, ExperimentLedger* ledger) {
  OverlapEstimate est;
  est.backend = backend;

  auto [real_state, p_real] = prepare_configuration(task, false);
  const auto real_read = read_ancilla(std::move(real_state), false, backend, shots,
                                      p_real, sampler);
  est.re = real_read.value;
  if (ledger) ledger->add(ExperimentKind::oea_real, real_read.charged);

  auto [imag_state, p_imag] = prepare_configuration(task, true);
  const auto imag_read = read_ancilla(std::move(imag_state), true, backend, shots,
                                      p_imag, sampler);
  est.im = imag_read.value;
  if (ledger) ledger->add(ExperimentKind::oea_imag, imag_read.charged);

  est.success_prob = p_real;
  est.shots_charged = real_read.charged + imag_read.charged;
  return est;
}

cplx taea_lcu(const SuperpositionTask& task, const PauliSum& mu, Backend backend,
              std::uint64_t shots, ShotSampler& sampler, ExperimentLedger* ledger) {
  const auto lcu = lcu_decompose(mu);
  if (mu.width() != task.psi0.num_qubits)
    throw std::invalid_argument("operator width does not match the system register");
  cplx total(0, 0);
  for (const LcuTerm& lt : lcu.terms) {
    double parts[2];
    for (int imag_config = 0; imag_config < 2; ++imag_config) {
      auto [state, p] = prepare_configuration(task, imag_config == 1);
      // The unitary acts on the branch-0 (psi) path only.
      state = apply_pauli_string_embedded(state, lt.unitary, 1, 0, 0);
      const auto read = read_ancilla(std::move(state), imag_config == 1, backend,
                                     shots, p, sampler);
      parts[imag_config] = read.value;
      if (ledger) ledger->add(ExperimentKind::taea_lcu, read.charged);
    }
    total += lt.weight * cplx(parts[0], parts[1]);
  }
  return total;
}

cplx taea_block(const SuperpositionTask& task, const BlockEncoding& be, Backend backend,
                std::uint64_t shots, ShotSampler& sampler, ExperimentLedger* ledger) {
  if (be.system_width != task.psi0.num_qubits)
    throw std::invalid_argument("encoding width does not match the system register");
  double parts[2];
  for (int imag_config = 0; imag_config < 2; ++imag_config) {
    auto [state, p] = prepare_configuration(task, imag_config == 1);
    state = insert_zero_register(state, 1, be.ancillas);
    state = apply_controlled(state, 0, be.unitary_plan, 0);
    const auto read = read_ancilla(std::move(state), imag_config == 1, backend, shots,
                                   p, sampler);
    parts[imag_config] = read.value;
    if (ledger) ledger->add(ExperimentKind::taea_block, read.charged);
  }
  return be.scale * cplx(parts[0], parts[1]);
}

double swap_test(const QuantumState& psi, const QuantumState& chi, Backend backend,
                 std::uint64_t shots, ShotSampler& sampler, ExperimentLedger* ledger) {
  if (psi.num_qubits != chi.num_qubits)
    throw std::invalid_argument("swap test states have mismatched widths");
  const int w = psi.num_qubits;
  QuantumState state =
      tensor(ancilla_state(cplx(M_SQRT1_2, 0), cplx(M_SQRT1_2, 0)), tensor(psi, chi));
  state = apply_controlled_swap(state, 0, 1, 1 + w, w);
  state = apply_hadamard(state, 0);

  double p1 = 0.0;
  std::uint64_t charged = 0;
  if (backend == Backend::sampled) {
    if (shots < 1) throw std::invalid_argument("sampled backend needs at least one shot");
    p1 = measure_qubit(state, 0, shots, sampler).p1_estimate;
    charged = shots;
  } else {
    p1 = measure_qubit_exact(state, 0);
  }
  if (ledger) ledger->add(ExperimentKind::swap_test, charged);
  double f = 1.0 - 2.0 * p1;
  if (backend == Backend::sampled) f = std::min(1.0, std::max(0.0, f));
  return f;
}

}  // namespace qoc
