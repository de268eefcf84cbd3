#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qoc/hamiltonian.hpp"
#include "qoc/primitives.hpp"
#include "qoc/state.hpp"

namespace qoc {

// Integrated squared field strength, dt * sum_j xi_j^2. The penalty term of
// the sweep optimizer's cost is alpha_penalty times this.
double pulse_fluence(const PulseSequence& pulse);

// Reference state with guaranteed nonvanishing overlap against both inputs,
// used to seed the superposed-overlap pipeline. Picks the best of the
// uniform state, normalize(a + b), and normalize(a + i*b) by the larger of
// the two worst-case overlaps; the latter two candidates cannot both
// degenerate, so the result is always usable.
QuantumState superposition_anchor(const QuantumState& a, const QuantumState& b);

// ---------------------------------------------------------------------------
// Sequential-sweep optimizer (terminal-overlap scalar times backward states)
// ---------------------------------------------------------------------------

struct KrotovProblem {
    PauliSum h0;  // drift
    PauliSum mu;  // control operator
    QuantumState psi0;
    QuantumState tau;
    double alpha_penalty = 1.0;
    PulseSequence pulse0;
    // Stop once an iteration's cost improvement falls below this. NaN picks
    // a backend-matched default: sampled runs use the measurement noise
    // floor from the analysis module (evaluated once on pulse0), exact runs
    // stop at roundoff scale. Recorded in the trace either way.
    double delta_j_min = std::numeric_limits<double>::quiet_NaN();
    int max_iters = 200;
    Backend backend = Backend::exact;
    std::uint64_t shots = 10000;
    std::uint64_t seed = 0;
    // Updates replace the field value by default; in increment mode the
    // computed value is added to the previous one instead.
    bool increment_mode = false;
    // Amplitude estimates go through the unitary-sum estimator by default;
    // flip to route them through the block-encoded estimator.
    bool use_block_encoding = false;
    int steps_per_interval = 1;
};

void validate(const KrotovProblem& problem);

// One optimizer iteration as recorded in a trace.
struct IterationRow {
    int k = 0;
    double cost = 0.0;        // objective after this iteration
    double delta_cost = 0.0;  // cost - previous cost, exactly as subtracted
    double fidelity = 0.0;    // |<tau|psi(T)>|^2 estimate for this pulse
    PulseSequence pulse;      // field after this iteration
    std::int64_t experiments = 0;  // experiments consumed by this iteration
    std::uint64_t shots = 0;       // shots charged by this iteration
    // True when the improvement is within an order of magnitude of the stop
    // threshold, i.e. too small to be trusted under the run's error budget.
    bool noise_limited = false;
};

struct IterationTrace {
    std::vector<IterationRow> rows;
    PulseSequence final_pulse;
    bool converged = false;
    std::string stop_reason;
    double stop_threshold = 0.0;  // delta-cost floor in force during the run
    // Basis coefficients of the best point (coefficient-search runs only).
    std::vector<double> best_coefficients;
    ExperimentLedger ledger;
};

// Noise floor used when delta_j_min is NaN on a sampled run: the cost-change
// scale below which monotonicity is no longer guaranteed, evaluated for
// pulse0 with the splitting error of this problem's propagator and the
// one-sigma fluctuation of a single update. (Exact runs default to a
// roundoff-scale stop instead; the splitting bias cancels in differences.)
double default_stop_threshold(const KrotovProblem& problem);

// J(pulse) = fidelity - alpha_penalty * pulse_fluence(pulse), the fidelity
// read from one controlled-swap experiment under the problem's backend.
double krotov_cost(const KrotovProblem& problem, const PulseSequence& pulse,
                   ShotSampler& sampler, ExperimentLedger* ledger = nullptr);

// Backward-propagated target states: entry j is the adjoint of intervals
// j..n-1 of the pulse applied to tau. Entry j is the state the co-state
// scalar multiplies when updating interval j. Exposed for cross-checking the
// scalar-factored co-state against direct backward propagation.
std::vector<QuantumState> krotov_backward_states(const KrotovProblem& problem,
                                                 const PulseSequence& pulse);

// Change of field value j in one sequential sweep. prev_pulse is the full
// previous-iteration field; partial_pulse must carry updated values on
// intervals < interval and previous values from interval on. Charges one
// amplitude estimate plus the two overlap configurations for the
// terminal-overlap scalar (which a full sweep estimates once and reuses).
double krotov_update_step(const KrotovProblem& problem,
                          const PulseSequence& prev_pulse, int interval,
                          const PulseSequence& partial_pulse,
                          ShotSampler& sampler,
                          ExperimentLedger* ledger = nullptr);

// Full sweep loop: per iteration, one terminal-overlap estimate (reused
// across the sweep) plus one amplitude estimate per interval, field values
// applied immediately within the sweep. Stops when the cost improvement
// falls below the threshold or the iteration budget runs out (reported in
// stop_reason, never thrown).
IterationTrace krotov_run(const KrotovProblem& problem);

// ---------------------------------------------------------------------------
// Gradient-ascent optimizer (two-fidelity-difference gradient)
// ---------------------------------------------------------------------------

struct GrapeProblem {
    PauliSum h0;
    PauliSum mu;
    QuantumState psi0;
    QuantumState tau;
    PulseSequence pulse0;
    // Ascent step size; NaN picks 0.5 * dt.
    double learning_rate = std::numeric_limits<double>::quiet_NaN();
    int max_iters = 100;
    Backend backend = Backend::exact;
    std::uint64_t shots = 10000;
    std::uint64_t seed = 0;
    int steps_per_interval = 1;
};

void validate(const GrapeProblem& problem);

// d(fidelity)/d(xi_j) to first order in dt: the difference of two
// controlled-swap fidelities between the backward-propagated target at
// interval j and the forward state pushed through one extra interval, once
// with the control at unit strength and once with drift alone.
double grape_gradient(const GrapeProblem& problem, const PulseSequence& pulse,
                      int interval, ShotSampler& sampler,
                      ExperimentLedger* ledger = nullptr);

// Batch gradient ascent: per iteration, every gradient is estimated at the
// current field (two experiments each), then all values move together by
// learning_rate times their gradient. Runs the full iteration budget.
IterationTrace grape_run(const GrapeProblem& problem);

// ---------------------------------------------------------------------------
// Gradient-free coefficient search (simplex over basis coefficients)
// ---------------------------------------------------------------------------

// Field ansatz xi(t) = sum_i c_i * b_i(t) over a fixed basis.
struct CrabAnsatz {
    std::vector<std::function<double(double)>> basis;
    std::vector<double> coefficients;  // starting point of the search
};

void validate(const CrabAnsatz& ansatz);

// Sine basis b_i(t) = sin(2*pi*(i+1)*(1 + r_i)*t / total_time) with seeded
// jitter r_i uniform in [-0.5, 0.5), plus a flat starting coefficient per
// basis function.
CrabAnsatz make_trig_ansatz(int n_basis, double total_time,
                            std::uint64_t seed,
                            double initial_coefficient = 0.1);

// Evaluates the ansatz at interval midpoints t_j = (j + 0.5) * dt.
PulseSequence sample_pulse(const CrabAnsatz& ansatz,
                           const std::vector<double>& coefficients, double dt,
                           int num_intervals);

struct CrabProblem {
    PauliSum h0;
    PauliSum mu;
    QuantumState psi0;
    QuantumState tau;
    double dt = 0.0;
    int num_intervals = 0;
    Backend backend = Backend::exact;
    std::uint64_t shots = 10000;
    std::uint64_t seed = 0;
    int steps_per_interval = 1;
};

void validate(const CrabProblem& problem);

struct NelderMeadParams {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double initial_step = 0.5;  // offset of the initial simplex per axis
    int max_iters = 300;
};

struct NelderMeadResult {
    std::vector<double> best_point;
    double best_value = 0.0;
    int evaluations = 0;
    std::vector<double> best_value_history;  // best value after each iteration
};

// Downhill simplex minimization: reflect, expand, contract, or shrink toward
// the best vertex each iteration. on_iteration (when set) observes the best
// vertex after every iteration.
NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& start, const NelderMeadParams& params,
    const std::function<void(int, const std::vector<double>&, double)>&
        on_iteration = nullptr);

// Simplex search over the ansatz coefficients, minimizing the infidelity
// read from one controlled-swap experiment per objective evaluation (the
// only estimator this path can reach). Rows record the best point after each
// simplex iteration.
IterationTrace crab_run(const CrabProblem& problem, const CrabAnsatz& ansatz,
                        const NelderMeadParams& nm_params = {});

}  // namespace qoc
