#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qoc/hamiltonian.hpp"
#include "qoc/state.hpp"

namespace qoc {

enum class Backend { exact, sampled };

// Trotterized propagator attached to one branch of a superposition.
struct EvolutionPlan {
  ControlHamiltonian ch;
  TrotterPlan trotter;
};

// Inputs of the superposed-overlap pipeline: produce
// alpha|0>U|psi0> + beta|1>V|chi0> and read the overlap off the ancilla.
// zeta is the reference state the second work register is projected onto.
struct SuperpositionTask {
  cplx alpha{M_SQRT1_2, 0.0};
  cplx beta{M_SQRT1_2, 0.0};
  QuantumState psi0;
  QuantumState chi0;
  QuantumState zeta;
  std::optional<EvolutionPlan> u_plan;  // branch 0; absent = identity
  std::optional<EvolutionPlan> v_plan;  // branch 1; absent = identity
  // Pre-multiplies alpha and beta by the conjugate reference-overlap phases
  // so the prepared state carries exactly the requested amplitudes. Off, the
  // raw map phases show through (useful for studying the preparation alone).
  bool compensate_phases = true;
};

void validate(const SuperpositionTask& task);

struct OverlapEstimate {
  double re = 0.0;
  double im = 0.0;
  std::uint64_t shots_charged = 0;  // post-selection repeats included
  double success_prob = 1.0;
  Backend backend = Backend::exact;
};

// One record per experiment: a fixed circuit configuration measured for a
// full batch of shots.
enum class ExperimentKind { oea_real, oea_imag, taea_lcu, taea_block, swap_test };

struct ExperimentRecord {
  ExperimentKind kind;
  std::uint64_t shots_charged = 0;
};

struct ExperimentLedger {
  std::vector<ExperimentRecord> records;

  void add(ExperimentKind kind, std::uint64_t shots_charged) {
    records.push_back({kind, shots_charged});
  }
  int count(ExperimentKind kind) const {
    int n = 0;
    for (const auto& r : records)
      if (r.kind == kind) ++n;
    return n;
  }
  int total() const { return static_cast<int>(records.size()); }
  std::uint64_t total_shots() const {
    std::uint64_t n = 0;
    for (const auto& r : records) n += r.shots_charged;
    return n;
  }
};

// Prepares alpha'|0>|psi0> + beta'|1>|chi0> (ancilla leftmost) by a
// controlled register swap followed by projection of the spare register onto
// zeta; returns the state and the post-selection success probability.
std::pair<QuantumState, double> lambda_sup(const SuperpositionTask& task);

// alpha|0>U|psi> + beta|1>V|chi> via anti-controlled / controlled evolution.
QuantumState conditional_evolve(const QuantumState& superposed,
                                const std::optional<EvolutionPlan>& u_plan,
                                const std::optional<EvolutionPlan>& v_plan);

// Overlap <chi(t)|psi(t)> from two ancilla measurements: the real part from
// the prepared state, the imaginary part from a rerun with beta -> -i*beta.
OverlapEstimate oea(const SuperpositionTask& task, Backend backend, std::uint64_t shots,
                    ShotSampler& sampler, ExperimentLedger* ledger = nullptr);

// Transition amplitude <chi(t)|mu|psi(t)> as a weighted sum over the
// unitary split of mu: one OEA pair per unitary, 2D experiments in total.
cplx taea_lcu(const SuperpositionTask& task, const PauliSum& mu, Backend backend,
              std::uint64_t shots, ShotSampler& sampler,
              ExperimentLedger* ledger = nullptr);

// Transition amplitude via one embedded application of mu: scale times the
// overlap of |0_k>|chi(t)> with B|0_k>|psi(t)>, two experiments in total.
cplx taea_block(const SuperpositionTask& task, const BlockEncoding& be, Backend backend,
                std::uint64_t shots, ShotSampler& sampler,
                ExperimentLedger* ledger = nullptr);

// |<psi|chi>|^2 from the ancilla-0 probability of a controlled-swap circuit;
// sampled estimates are clamped to [0, 1].
double swap_test(const QuantumState& psi, const QuantumState& chi, Backend backend,
                 std::uint64_t shots, ShotSampler& sampler,
                 ExperimentLedger* ledger = nullptr);

}  // namespace qoc
