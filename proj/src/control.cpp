#include "qoc/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

#include "qoc/analysis.hpp"

namespace qoc {
namespace {

// Improvements within this factor of the stop threshold are flagged as too
// small to trust under the run's error budget.
constexpr double kNoiseBandFactor = 10.0;

// Auto stop scale for exact-backend runs. The splitting error biases the
// cost landscape but cancels between consecutive iterations, so exact runs
// resolve improvements down to roundoff; the noise-aware threshold is for
// sampled runs, where shot noise does not cancel.
constexpr double kExactStopTolerance = 1e-10;

void require_unit_state(const QuantumState& state, const char* what) {
    if (state.amps.empty()) {
        throw std::invalid_argument(std::string(what) + " state is empty");
    }
    if (std::abs(state.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument(std::string(what) +
                                    " state must be normalized");
    }
}

// Shared structural checks: Hamiltonian pair, endpoint states, field.
void check_problem_core(const PauliSum& h0, const PauliSum& mu,
                        const QuantumState& psi0, const QuantumState& tau,
                        const PulseSequence& pulse) {
    if (mu.terms.empty()) {
        throw std::invalid_argument("control operator must have terms");
    }
    const ControlHamiltonian ch{h0, mu, pulse};
    validate(ch);
    require_unit_state(psi0, "initial");
    require_unit_state(tau, "target");
    if (psi0.num_qubits != ch.width() || tau.num_qubits != ch.width()) {
        throw std::invalid_argument(
            "endpoint states and Hamiltonian act on different widths");
    }
}

// Terminal overlap <tau|psi(T)> through the two-configuration overlap
// pipeline, with the full pulse evolution attached to the psi0 branch.
cplx terminal_overlap(const KrotovProblem& problem, const PulseSequence& pulse,
                      ShotSampler& sampler, ExperimentLedger* ledger) {
    SuperpositionTask task;
    task.psi0 = problem.psi0;
    task.chi0 = problem.tau;
    task.zeta = superposition_anchor(problem.psi0, problem.tau);
    task.u_plan = EvolutionPlan{ControlHamiltonian{problem.h0, problem.mu, pulse},
                                TrotterPlan{problem.steps_per_interval}};
    const OverlapEstimate est =
        oea(task, problem.backend, problem.shots, sampler, ledger);
    return {est.re, est.im};
}

// Transition amplitude <back_j|mu|psi_j> through the configured estimator.
cplx transition_amplitude(const KrotovProblem& problem,
                          const QuantumState& psi_j,
                          const QuantumState& back_j, const BlockEncoding* be,
                          ShotSampler& sampler, ExperimentLedger* ledger) {
    SuperpositionTask task;
    task.psi0 = psi_j;
    task.chi0 = back_j;
    task.zeta = superposition_anchor(psi_j, back_j);
    if (problem.use_block_encoding) {
        return taea_block(task, *be, problem.backend, problem.shots, sampler,
                          ledger);
    }
    return taea_lcu(task, problem.mu, problem.backend, problem.shots, sampler,
                    ledger);
}

}  // namespace

double pulse_fluence(const PulseSequence& pulse) {
    validate(pulse);
    double sum = 0.0;
    for (double v : pulse.values) sum += v * v;
    return pulse.dt * sum;
}

QuantumState superposition_anchor(const QuantumState& a,
                                  const QuantumState& b) {
    require_unit_state(a, "first");
    require_unit_state(b, "second");
    if (a.num_qubits != b.num_qubits) {
        throw std::invalid_argument("anchor inputs have different widths");
    }
    const std::uint64_t dim = a.dim();

    std::vector<QuantumState> candidates;
    {
        QuantumState uniform = QuantumState::zero(a.num_qubits);
        const cplx amp{1.0 / std::sqrt(static_cast<double>(dim)), 0.0};
        std::fill(uniform.amps.begin(), uniform.amps.end(), amp);
        candidates.push_back(std::move(uniform));
    }
    // normalize(a + b) degenerates only when <b|a> = -1, normalize(a + i*b)
    // only when <b|a> = -i; both cannot hold, so a usable candidate remains.
    for (const cplx phase : {cplx{1.0, 0.0}, cplx{0.0, 1.0}}) {
        QuantumState mix;
        mix.num_qubits = a.num_qubits;
        mix.amps.resize(dim);
        double norm_sq = 0.0;
        for (std::uint64_t i = 0; i < dim; ++i) {
            mix.amps[i] = a.amps[i] + phase * b.amps[i];
            norm_sq += std::norm(mix.amps[i]);
        }
        if (norm_sq < 1e-12) continue;
        const double scale = 1.0 / std::sqrt(norm_sq);
        for (auto& amp : mix.amps) amp *= scale;
        candidates.push_back(std::move(mix));
    }

    double best_score = -1.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double score = std::min(std::abs(inner_product(candidates[i], a)),
                                      std::abs(inner_product(candidates[i], b)));
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return candidates[best];
}

// --------------------------------------------------------------------------
// Sequential-sweep optimizer
// --------------------------------------------------------------------------

void validate(const KrotovProblem& problem) {
    check_problem_core(problem.h0, problem.mu, problem.psi0, problem.tau,
                       problem.pulse0);
    if (!(problem.alpha_penalty > 0.0)) {
        throw std::invalid_argument("penalty weight must be positive");
    }
    if (problem.max_iters < 1) {
        throw std::invalid_argument("iteration budget must be at least 1");
    }
    if (problem.steps_per_interval < 1) {
        throw std::invalid_argument("substep count must be at least 1");
    }
    if (problem.backend == Backend::sampled && problem.shots == 0) {
        throw std::invalid_argument("sampled backend needs a shot budget");
    }
}

double default_stop_threshold(const KrotovProblem& problem) {
    validate(problem);
    const PulseSequence& pulse = problem.pulse0;
    const ControlHamiltonian ch{problem.h0, problem.mu, pulse};
    const double total_time = pulse.total_time();
    const double c_max = grouped_c_max(ch);
    const int substeps = pulse.num_intervals() * problem.steps_per_interval;
    const double eps_ts =
        c_max > 0.0 ? trotter_error_bound(c_max, total_time, substeps) : 0.0;
    const double mu_norm = spectral_norm(problem.mu);
    double eps_m = 0.0;
    if (problem.backend == Backend::sampled) {
        const LcuDecomposition lcu = lcu_decompose(problem.mu);
        const double c_sq = problem.use_block_encoding
                                ? lcu.weight_sum * lcu.weight_sum
                                : lcu.weight_sq_sum;
        eps_m = std::sqrt(variance_bound(problem.alpha_penalty,
                                         static_cast<double>(problem.shots),
                                         c_sq, mu_norm));
    }
    return monotonicity_threshold(total_time, problem.alpha_penalty, mu_norm,
                                  pulse.xi_max(), eps_m, eps_ts);
}

double krotov_cost(const KrotovProblem& problem, const PulseSequence& pulse,
                   ShotSampler& sampler, ExperimentLedger* ledger) {
    check_problem_core(problem.h0, problem.mu, problem.psi0, problem.tau,
                       pulse);
    if (!(problem.alpha_penalty > 0.0)) {
        throw std::invalid_argument("penalty weight must be positive");
    }
    const ControlHamiltonian ch{problem.h0, problem.mu, pulse};
    const TrotterPlan plan{problem.steps_per_interval};
    const QuantumState psi_t =
        trotter_evolve(problem.psi0, ch, plan, Direction::forward);
    const double fid = swap_test(psi_t, problem.tau, problem.backend,
                                 problem.shots, sampler, ledger);
    return fid - problem.alpha_penalty * pulse_fluence(pulse);
}

std::vector<QuantumState> krotov_backward_states(const KrotovProblem& problem,
                                                 const PulseSequence& pulse) {
    check_problem_core(problem.h0, problem.mu, problem.psi0, problem.tau,
                       pulse);
    const ControlHamiltonian ch{problem.h0, problem.mu, pulse};
    const TrotterPlan plan{problem.steps_per_interval};
    const int n = pulse.num_intervals();
    std::vector<QuantumState> back(static_cast<std::size_t>(n));
    QuantumState state = problem.tau;
    for (int j = n - 1; j >= 0; --j) {
        state = trotter_evolve_interval(state, ch, plan, j, Direction::backward);
        back[static_cast<std::size_t>(j)] = state;
    }
    return back;
}

double krotov_update_step(const KrotovProblem& problem,
                          const PulseSequence& prev_pulse, int interval,
                          const PulseSequence& partial_pulse,
                          ShotSampler& sampler, ExperimentLedger* ledger) {
    validate(problem);
    validate(prev_pulse);
    validate(partial_pulse);
    const int n = prev_pulse.num_intervals();
    if (interval < 0 || interval >= n) {
        throw std::invalid_argument("interval index out of range");
    }
    if (partial_pulse.num_intervals() != n || partial_pulse.dt != prev_pulse.dt) {
        throw std::invalid_argument(
            "partially updated pulse must match the previous pulse's grid");
    }

    const TrotterPlan plan{problem.steps_per_interval};
    const ControlHamiltonian ch_prev{problem.h0, problem.mu, prev_pulse};
    const ControlHamiltonian ch_part{problem.h0, problem.mu, partial_pulse};

    const cplx z1 = std::conj(terminal_overlap(problem, prev_pulse, sampler, ledger));

    QuantumState back = problem.tau;
    for (int j = n - 1; j >= interval; --j) {
        back = trotter_evolve_interval(back, ch_prev, plan, j, Direction::backward);
    }
    QuantumState psi = problem.psi0;
    for (int j = 0; j < interval; ++j) {
        psi = trotter_evolve_interval(psi, ch_part, plan, j, Direction::forward);
    }
    psi = trotter_evolve_interval(psi, ch_prev, plan, interval, Direction::forward);

    BlockEncoding be;
    if (problem.use_block_encoding) be = build_block_encoding(problem.mu);
    const cplx w =
        transition_amplitude(problem, psi, back, &be, sampler, ledger);
    const double value = std::imag(z1 * w) / problem.alpha_penalty;
    const double next = problem.increment_mode
                            ? prev_pulse.values[static_cast<std::size_t>(interval)] + value
                            : value;
    return next - prev_pulse.values[static_cast<std::size_t>(interval)];
}

IterationTrace krotov_run(const KrotovProblem& problem) {
    validate(problem);
    IterationTrace trace;
    const double threshold =
        !std::isnan(problem.delta_j_min) ? problem.delta_j_min
        : problem.backend == Backend::sampled ? default_stop_threshold(problem)
                                              : kExactStopTolerance;
    trace.stop_threshold = threshold;

    ShotSampler sampler{problem.seed, 0};
    const TrotterPlan plan{problem.steps_per_interval};
    BlockEncoding be;
    if (problem.use_block_encoding) be = build_block_encoding(problem.mu);

    PulseSequence pulse = problem.pulse0;
    const int n = pulse.num_intervals();

    cplx z = terminal_overlap(problem, pulse, sampler, &trace.ledger);
    cplx z1 = std::conj(z);
    double fid = std::norm(z);
    double cost = fid - problem.alpha_penalty * pulse_fluence(pulse);
    trace.rows.push_back({0, cost, 0.0, fid, pulse,
                          static_cast<std::int64_t>(trace.ledger.total()),
                          trace.ledger.total_shots(), false});

    for (int k = 1; k <= problem.max_iters; ++k) {
        const int exp_before = trace.ledger.total();
        const std::uint64_t shots_before = trace.ledger.total_shots();

        const std::vector<QuantumState> back =
            krotov_backward_states(problem, pulse);
        const ControlHamiltonian ch_old{problem.h0, problem.mu, pulse};
        ControlHamiltonian ch_new{problem.h0, problem.mu, pulse};
        QuantumState psi = problem.psi0;
        for (int j = 0; j < n; ++j) {
            const QuantumState psi_j =
                trotter_evolve_interval(psi, ch_old, plan, j, Direction::forward);
            const cplx w = transition_amplitude(
                problem, psi_j, back[static_cast<std::size_t>(j)], &be, sampler,
                &trace.ledger);
            const double value = std::imag(z1 * w) / problem.alpha_penalty;
            ch_new.pulse.values[static_cast<std::size_t>(j)] =
                problem.increment_mode
                    ? pulse.values[static_cast<std::size_t>(j)] + value
                    : value;
            psi = trotter_evolve_interval(psi, ch_new, plan, j, Direction::forward);
        }

        z = terminal_overlap(problem, ch_new.pulse, sampler, &trace.ledger);
        z1 = std::conj(z);
        fid = std::norm(z);
        const double new_cost =
            fid - problem.alpha_penalty * pulse_fluence(ch_new.pulse);
        const double delta = new_cost - cost;
        const bool noisy =
            threshold > 0.0 && delta < kNoiseBandFactor * threshold;
        trace.rows.push_back(
            {k, new_cost, delta, fid, ch_new.pulse,
             static_cast<std::int64_t>(trace.ledger.total() - exp_before),
             trace.ledger.total_shots() - shots_before, noisy});

        pulse = ch_new.pulse;
        cost = new_cost;
        if (delta < threshold) {
            trace.converged = true;
            trace.stop_reason = "cost improvement fell below threshold";
            break;
        }
    }
    if (!trace.converged) trace.stop_reason = "iteration limit reached";
    trace.final_pulse = pulse;
    return trace;
}

// --------------------------------------------------------------------------
// Gradient-ascent optimizer
// --------------------------------------------------------------------------

void validate(const GrapeProblem& problem) {
    check_problem_core(problem.h0, problem.mu, problem.psi0, problem.tau,
                       problem.pulse0);
    if (!std::isnan(problem.learning_rate) && !(problem.learning_rate > 0.0)) {
        throw std::invalid_argument("learning rate must be positive");
    }
    if (problem.max_iters < 1) {
        throw std::invalid_argument("iteration budget must be at least 1");
    }
    if (problem.steps_per_interval < 1) {
        throw std::invalid_argument("substep count must be at least 1");
    }
    if (problem.backend == Backend::sampled && problem.shots == 0) {
        throw std::invalid_argument("sampled backend needs a shot budget");
    }
}

double grape_gradient(const GrapeProblem& problem, const PulseSequence& pulse,
                      int interval, ShotSampler& sampler,
                      ExperimentLedger* ledger) {
    validate(problem);
    validate(pulse);
    const int n = pulse.num_intervals();
    if (interval < 0 || interval >= n) {
        throw std::invalid_argument("interval index out of range");
    }
    const ControlHamiltonian ch{problem.h0, problem.mu, pulse};
    const TrotterPlan plan{problem.steps_per_interval};

    QuantumState psi = problem.psi0;
    for (int i = 0; i <= interval; ++i) {
        psi = trotter_evolve_interval(psi, ch, plan, i, Direction::forward);
    }
    QuantumState chi = problem.tau;
    for (int i = n - 1; i > interval; --i) {
        chi = trotter_evolve_interval(chi, ch, plan, i, Direction::backward);
    }

    const auto probe = [&](double strength) {
        const ControlHamiltonian probe_ch{
            problem.h0, problem.mu, PulseSequence{pulse.dt, {strength}}};
        return trotter_evolve(psi, probe_ch, plan, Direction::forward);
    };
    const double with_control = swap_test(probe(1.0), chi, problem.backend,
                                          problem.shots, sampler, ledger);
    const double drift_only = swap_test(probe(0.0), chi, problem.backend,
                                        problem.shots, sampler, ledger);
    return with_control - drift_only;
}

IterationTrace grape_run(const GrapeProblem& problem) {
    validate(problem);
    IterationTrace trace;
    ShotSampler sampler{problem.seed, 0};
    const TrotterPlan plan{problem.steps_per_interval};

    PulseSequence pulse = problem.pulse0;
    const int n = pulse.num_intervals();
    const double eta = std::isnan(problem.learning_rate)
                           ? 0.5 * pulse.dt
                           : problem.learning_rate;

    const auto fidelity_of = [&](const PulseSequence& p) {
        const ControlHamiltonian ch{problem.h0, problem.mu, p};
        const QuantumState psi_t =
            trotter_evolve(problem.psi0, ch, plan, Direction::forward);
        return swap_test(psi_t, problem.tau, problem.backend, problem.shots,
                         sampler, &trace.ledger);
    };

    double cost = fidelity_of(pulse);
    trace.rows.push_back({0, cost, 0.0, cost, pulse,
                          static_cast<std::int64_t>(trace.ledger.total()),
                          trace.ledger.total_shots(), false});

    std::vector<double> grad(static_cast<std::size_t>(n));
    for (int k = 1; k <= problem.max_iters; ++k) {
        const int exp_before = trace.ledger.total();
        const std::uint64_t shots_before = trace.ledger.total_shots();
        for (int j = 0; j < n; ++j) {
            grad[static_cast<std::size_t>(j)] =
                grape_gradient(problem, pulse, j, sampler, &trace.ledger);
        }
        for (int j = 0; j < n; ++j) {
            pulse.values[static_cast<std::size_t>(j)] +=
                eta * grad[static_cast<std::size_t>(j)];
        }
        const double new_cost = fidelity_of(pulse);
        trace.rows.push_back(
            {k, new_cost, new_cost - cost, new_cost, pulse,
             static_cast<std::int64_t>(trace.ledger.total() - exp_before),
             trace.ledger.total_shots() - shots_before, false});
        cost = new_cost;
    }
    trace.stop_reason = "iteration limit reached";
    trace.final_pulse = pulse;
    return trace;
}

// --------------------------------------------------------------------------
// Gradient-free coefficient search
// --------------------------------------------------------------------------

void validate(const CrabAnsatz& ansatz) {
    if (ansatz.basis.empty()) {
        throw std::invalid_argument("ansatz needs at least one basis function");
    }
    if (ansatz.coefficients.size() != ansatz.basis.size()) {
        throw std::invalid_argument(
            "ansatz coefficient count must match the basis size");
    }
    for (const auto& fn : ansatz.basis) {
        if (!fn) throw std::invalid_argument("ansatz basis function is empty");
    }
}

CrabAnsatz make_trig_ansatz(int n_basis, double total_time, std::uint64_t seed,
                            double initial_coefficient) {
    if (n_basis < 1) {
        throw std::invalid_argument("basis size must be at least 1");
    }
    if (!(total_time > 0.0)) {
        throw std::invalid_argument("total time must be positive");
    }
    std::mt19937_64 rng(seed);
    CrabAnsatz ansatz;
    for (int i = 0; i < n_basis; ++i) {
        // Portable uniform in [0, 1): top 53 bits of the raw draw, avoiding
        // the implementation-defined distribution adapters.
        const double u =
            static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double jitter = u - 0.5;
        const double w =
            2.0 * M_PI * static_cast<double>(i + 1) * (1.0 + jitter) / total_time;
        ansatz.basis.emplace_back([w](double t) { return std::sin(w * t); });
        ansatz.coefficients.push_back(initial_coefficient);
    }
    return ansatz;
}

PulseSequence sample_pulse(const CrabAnsatz& ansatz,
                           const std::vector<double>& coefficients, double dt,
                           int num_intervals) {
    validate(ansatz);
    if (coefficients.size() != ansatz.basis.size()) {
        throw std::invalid_argument(
            "coefficient count must match the basis size");
    }
    if (!(dt > 0.0)) throw std::invalid_argument("pulse dt must be positive");
    if (num_intervals < 1) {
        throw std::invalid_argument("pulse needs at least one interval");
    }
    PulseSequence pulse;
    pulse.dt = dt;
    pulse.values.assign(static_cast<std::size_t>(num_intervals), 0.0);
    for (int j = 0; j < num_intervals; ++j) {
        const double t = (static_cast<double>(j) + 0.5) * dt;
        double value = 0.0;
        for (std::size_t i = 0; i < ansatz.basis.size(); ++i) {
            value += coefficients[i] * ansatz.basis[i](t);
        }
        pulse.values[static_cast<std::size_t>(j)] = value;
    }
    return pulse;
}

void validate(const CrabProblem& problem) {
    if (!(problem.dt > 0.0)) {
        throw std::invalid_argument("pulse dt must be positive");
    }
    if (problem.num_intervals < 1) {
        throw std::invalid_argument("pulse needs at least one interval");
    }
    PulseSequence flat;
    flat.dt = problem.dt;
    flat.values.assign(static_cast<std::size_t>(problem.num_intervals), 0.0);
    check_problem_core(problem.h0, problem.mu, problem.psi0, problem.tau, flat);
    if (problem.steps_per_interval < 1) {
        throw std::invalid_argument("substep count must be at least 1");
    }
    if (problem.backend == Backend::sampled && problem.shots == 0) {
        throw std::invalid_argument("sampled backend needs a shot budget");
    }
}

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& start, const NelderMeadParams& params,
    const std::function<void(int, const std::vector<double>&, double)>&
        on_iteration) {
    if (!objective) throw std::invalid_argument("objective is empty");
    if (start.empty()) throw std::invalid_argument("start point is empty");
    if (params.max_iters < 1) {
        throw std::invalid_argument("iteration budget must be at least 1");
    }
    if (!(params.reflection > 0.0) || !(params.expansion > 0.0) ||
        !(params.contraction > 0.0) || !(params.shrink > 0.0)) {
        throw std::invalid_argument("simplex coefficients must be positive");
    }

    const std::size_t d = start.size();
    std::vector<std::vector<double>> simplex;
    simplex.reserve(d + 1);
    simplex.push_back(start);
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> point = start;
        point[i] += params.initial_step;
        simplex.push_back(std::move(point));
    }

    NelderMeadResult result;
    int evaluations = 0;
    const auto eval = [&](const std::vector<double>& x) {
        ++evaluations;
        return objective(x);
    };

    std::vector<double> vals;
    vals.reserve(d + 1);
    for (const auto& point : simplex) vals.push_back(eval(point));

    for (int it = 0; it < params.max_iters; ++it) {
        // Ascending by value, ties kept in insertion order.
        std::vector<std::size_t> order(d + 1);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t l, std::size_t r) {
                             return vals[l] < vals[r];
                         });
        std::vector<std::vector<double>> sorted_simplex(d + 1);
        std::vector<double> sorted_vals(d + 1);
        for (std::size_t i = 0; i <= d; ++i) {
            sorted_simplex[i] = std::move(simplex[order[i]]);
            sorted_vals[i] = vals[order[i]];
        }
        simplex = std::move(sorted_simplex);
        vals = std::move(sorted_vals);

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t axis = 0; axis < d; ++axis) {
                centroid[axis] += simplex[i][axis];
            }
        }
        for (double& c : centroid) c /= static_cast<double>(d);

        // Point at centroid + t * (centroid - worst vertex).
        const auto along = [&](double t) {
            std::vector<double> x(d);
            for (std::size_t axis = 0; axis < d; ++axis) {
                x[axis] = centroid[axis] + t * (centroid[axis] - simplex[d][axis]);
            }
            return x;
        };

        std::vector<double> reflected = along(params.reflection);
        const double f_reflected = eval(reflected);
        if (f_reflected < vals[0]) {
            std::vector<double> expanded = along(params.expansion);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                simplex[d] = std::move(expanded);
                vals[d] = f_expanded;
            } else {
                simplex[d] = std::move(reflected);
                vals[d] = f_reflected;
            }
        } else if (f_reflected < vals[d - 1]) {
            simplex[d] = std::move(reflected);
            vals[d] = f_reflected;
        } else {
            std::vector<double> contracted = along(-params.contraction);
            const double f_contracted = eval(contracted);
            if (f_contracted < vals[d]) {
                simplex[d] = std::move(contracted);
                vals[d] = f_contracted;
            } else {
                for (std::size_t i = 1; i <= d; ++i) {
                    for (std::size_t axis = 0; axis < d; ++axis) {
                        simplex[i][axis] =
                            simplex[0][axis] +
                            params.shrink * (simplex[i][axis] - simplex[0][axis]);
                    }
                    vals[i] = eval(simplex[i]);
                }
            }
        }

        std::size_t best = 0;
        for (std::size_t i = 1; i <= d; ++i) {
            if (vals[i] < vals[best]) best = i;
        }
        result.best_value_history.push_back(vals[best]);
        if (on_iteration) on_iteration(it, simplex[best], vals[best]);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i) {
        if (vals[i] < vals[best]) best = i;
    }
    result.best_point = simplex[best];
    result.best_value = vals[best];
    result.evaluations = evaluations;
    return result;
}

IterationTrace crab_run(const CrabProblem& problem, const CrabAnsatz& ansatz,
                        const NelderMeadParams& nm_params) {
    validate(problem);
    validate(ansatz);
    IterationTrace trace;
    ShotSampler sampler{problem.seed, 0};
    const TrotterPlan plan{problem.steps_per_interval};

    const auto objective = [&](const std::vector<double>& coefficients) {
        const PulseSequence pulse = sample_pulse(
            ansatz, coefficients, problem.dt, problem.num_intervals);
        const ControlHamiltonian ch{problem.h0, problem.mu, pulse};
        const QuantumState psi_t =
            trotter_evolve(problem.psi0, ch, plan, Direction::forward);
        return 1.0 - swap_test(psi_t, problem.tau, problem.backend,
                               problem.shots, sampler, &trace.ledger);
    };

    int exp_before = 0;
    std::uint64_t shots_before = 0;
    double prev_cost = 0.0;
    bool have_prev = false;
    const auto on_iteration = [&](int it, const std::vector<double>& best,
                                  double best_value) {
        const double fid = 1.0 - best_value;
        IterationRow row;
        row.k = it + 1;
        row.cost = fid;
        row.delta_cost = have_prev ? fid - prev_cost : 0.0;
        row.fidelity = fid;
        row.pulse =
            sample_pulse(ansatz, best, problem.dt, problem.num_intervals);
        row.experiments = trace.ledger.total() - exp_before;
        row.shots = trace.ledger.total_shots() - shots_before;
        trace.rows.push_back(std::move(row));
        exp_before = trace.ledger.total();
        shots_before = trace.ledger.total_shots();
        prev_cost = fid;
        have_prev = true;
    };

    const NelderMeadResult result =
        nelder_mead(objective, ansatz.coefficients, nm_params, on_iteration);
    trace.best_coefficients = result.best_point;
    trace.final_pulse = sample_pulse(ansatz, result.best_point, problem.dt,
                                     problem.num_intervals);
    trace.stop_reason = "iteration limit reached";
    return trace;
}

}  // namespace qoc
