#include "qoc/analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qoc {

void validate(const ErrorBudget& budget) {
    if (budget.eps_ts < 0.0 || budget.eps_m < 0.0) {
        throw std::invalid_argument("error budget tolerances must be nonnegative");
    }
    if (budget.n_avg < 1) {
        throw std::invalid_argument("error budget averaging count must be at least 1");
    }
    if (budget.shots < 0) {
        throw std::invalid_argument("error budget shot count must be nonnegative");
    }
    if (budget.sigma_b_sq_max < 0.0 || budget.sigma_b_sq_max > 0.25) {
        throw std::invalid_argument(
            "single-bit variance cap must lie in [0, 0.25]");
    }
}

double combined_epsilon(const ErrorBudget& budget, double mu_norm,
                        double alpha_penalty) {
    validate(budget);
    if (mu_norm < 0.0) {
        throw std::invalid_argument("operator norm must be nonnegative");
    }
    if (alpha_penalty <= 0.0) {
        throw std::invalid_argument("penalty weight must be positive");
    }
    return budget.eps_m + 3.0 * budget.eps_ts * mu_norm / alpha_penalty;
}

void validate(const SKModel& sk) {
    if (sk.d_sk <= 0.0 || sk.c_sk <= 0.0) {
        throw std::invalid_argument("compilation constants must be positive");
    }
    if (sk.term_count < 1) {
        throw std::invalid_argument("term count must be at least 1");
    }
    if (sk.locality < 1) {
        throw std::invalid_argument("locality must be at least 1");
    }
    if (sk.c_max <= 0.0) {
        throw std::invalid_argument("group norm bound must be positive");
    }
}

double variance_bound(double alpha_penalty, double m, double c_sq,
                      double mu_norm) {
    if (alpha_penalty <= 0.0 || m <= 0.0 || c_sq <= 0.0 || mu_norm <= 0.0) {
        throw std::invalid_argument("variance bound inputs must be positive");
    }
    return (c_sq + mu_norm * mu_norm) /
           (4.0 * alpha_penalty * alpha_penalty * m);
}

std::int64_t required_shots(double var_at_one_shot, double eps_m,
                            std::int64_t n_avg, double delta) {
    if (var_at_one_shot <= 0.0) {
        throw std::invalid_argument("one-shot variance must be positive");
    }
    if (eps_m <= 0.0) {
        throw std::invalid_argument("fluctuation tolerance must be positive");
    }
    if (n_avg < 1) {
        throw std::invalid_argument("averaging count must be at least 1");
    }
    if (delta <= 0.0 || delta > 1.0) {
        throw std::invalid_argument("failure probability must lie in (0, 1]");
    }
    const double exact = var_at_one_shot / (static_cast<double>(n_avg) *
                                            eps_m * eps_m * delta);
    // Shave a relative ulp-scale margin so an analytically integral target
    // (e.g. 0.5 / 0.01) is not pushed up by rounding in the division above.
    const double m = std::ceil(exact * (1.0 - 1e-12));
    if (m < 1.0) {
        return 1;
    }
    if (m >= 9.0e18) {
        throw std::overflow_error("required shot count exceeds 64-bit range");
    }
    return static_cast<std::int64_t>(m);
}

double monotonicity_threshold(double total_time, double alpha_penalty,
                              double mu_norm, double xi_max, double eps_m,
                              double eps_ts) {
    if (total_time < 0.0 || mu_norm < 0.0 || xi_max < 0.0 || eps_m < 0.0 ||
        eps_ts < 0.0) {
        throw std::invalid_argument("threshold inputs must be nonnegative");
    }
    if (alpha_penalty <= 0.0) {
        throw std::invalid_argument("penalty weight must be positive");
    }
    const double eps = eps_m + 3.0 * eps_ts * mu_norm / alpha_penalty;
    return 4.0 * total_time * eps * mu_norm +
           4.0 * (total_time / alpha_penalty) * xi_max * eps + 4.0 * eps_ts;
}

double gate_count(double eps_ts, const SKModel& sk, double total_time) {
    validate(sk);
    if (eps_ts <= 0.0) {
        throw std::invalid_argument("splitting tolerance must be positive");
    }
    if (total_time <= 0.0) {
        throw std::invalid_argument("total time must be positive");
    }
    const double terms = static_cast<double>(sk.term_count);
    const double base = sk.c_max * sk.c_max * total_time * total_time * terms *
                        terms * terms / eps_ts;
    return sk.d_sk * base * std::pow(std::log(base / eps_ts), sk.c_sk);
}

std::int64_t count_experiments(Algorithm algorithm, std::int64_t lcu_terms) {
    switch (algorithm) {
        case Algorithm::oea:
            return 2;
        case Algorithm::taea_lcu:
            if (lcu_terms < 1) {
                throw std::invalid_argument(
                    "unitary decomposition length must be at least 1");
            }
            return 2 * lcu_terms;
        case Algorithm::taea_block:
            return 2;
        case Algorithm::krotov_update:
            if (lcu_terms < 1) {
                throw std::invalid_argument(
                    "unitary decomposition length must be at least 1");
            }
            // One amplitude estimate (2*lcu_terms configurations on the LCU
            // path, callers pass 1 for block encoding giving 2) plus the two
            // overlap configurations refreshing the terminal-overlap scalar.
            return 2 * lcu_terms + 2;
        case Algorithm::grape_update:
            return 2;
    }
    throw std::invalid_argument("unknown algorithm tag");
}

}  // namespace qoc
