#pragma once

#include <cstdint>

namespace qoc {

// Error-budget knobs for a sampled optimization run. The combined tolerance
// depends on the problem's control operator and penalty weight, so it is
// recomputed on demand rather than cached here.
struct ErrorBudget {
    double eps_ts = 0.0;        // propagator splitting error, operator-norm units
    double eps_m = 0.0;         // tolerated pulse-update fluctuation
    std::int64_t n_avg = 1;     // independent repetitions averaged per update
    std::int64_t shots = 0;     // shots per experiment
    double sigma_b_sq_max = 0.25;  // worst-case single-bit measurement variance
};

void validate(const ErrorBudget& budget);

// Combined update tolerance: eps_m + 3 * eps_ts * |mu| / alpha.
double combined_epsilon(const ErrorBudget& budget, double mu_norm,
                        double alpha_penalty);

// Gate-synthesis cost model constants (Solovay-Kitaev style compilation).
struct SKModel {
    double d_sk = 1.0;
    double c_sk = 1.0;
    std::int64_t term_count = 1;  // L, number of Hamiltonian terms
    std::int64_t locality = 1;    // kappa, max qubits touched per term
    double c_max = 1.0;           // largest group norm entering the splitting
};

void validate(const SKModel& sk);

// Upper bound on the variance of one sampled pulse update:
// (c_sq + mu_norm^2) / (4 * alpha_penalty^2 * m).
double variance_bound(double alpha_penalty, double m, double c_sq,
                      double mu_norm);

// Smallest shot count m so that var_at_one_shot / (m * n_avg * eps_m^2)
// drops to at most the failure probability delta. var_at_one_shot is the
// variance bound evaluated at m = 1.
std::int64_t required_shots(double var_at_one_shot, double eps_m,
                            std::int64_t n_avg, double delta);

// Cost-change scale below which sampled iterations may lose monotonicity:
// with eps = eps_m + 3*eps_ts*mu_norm/alpha, returns
// 4*T*eps*mu_norm + 4*(T/alpha)*xi_max*eps + 4*eps_ts.
double monotonicity_threshold(double total_time, double alpha_penalty,
                              double mu_norm, double xi_max, double eps_m,
                              double eps_ts);

// Compiled gate count for one Trotterized evolution: with
// G = c_max^2 * T^2 * L^3 / eps_ts, returns d_sk * G * ln(G/eps_ts)^c_sk.
// Natural log; the unspecified base only shifts constants, not scaling.
double gate_count(double eps_ts, const SKModel& sk, double total_time);

// Experiment tally per primitive invocation or optimizer update.
enum class Algorithm {
    oea,
    taea_lcu,
    taea_block,
    krotov_update,
    grape_update,
};

// Number of distinct experiment configurations one invocation consumes.
// lcu_terms is the unitary-decomposition length D (LCU paths only; pass 1
// for block-encoded or non-TAEA algorithms). A pulse update spends one
// amplitude estimate plus the two overlap configurations that refresh the
// terminal-overlap scalar.
std::int64_t count_experiments(Algorithm algorithm, std::int64_t lcu_terms = 1);

}  // namespace qoc
