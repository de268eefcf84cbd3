#include "qoc/control.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qoc/analysis.hpp"

namespace {

using qoc::cplx;

qoc::PauliSum single(const std::string& axes, double coeff = 1.0) {
    qoc::PauliSum s;
    s.terms.push_back({coeff, axes});
    return s;
}

qoc::PulseSequence flat_pulse(double dt, int n, double value) {
    qoc::PulseSequence p;
    p.dt = dt;
    p.values.assign(static_cast<std::size_t>(n), value);
    return p;
}

// 1-qubit flip problem: drift Z, control X, |0> -> |1>.
qoc::KrotovProblem flip_problem(double dt, int n, double xi0) {
    qoc::KrotovProblem p;
    p.h0 = single("Z");
    p.mu = single("X");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::basis(1, 1);
    p.pulse0 = flat_pulse(dt, n, xi0);
    return p;
}

oracle::Mat dense_ham(const qoc::PauliSum& h0, const qoc::PauliSum& mu,
                      double xi, Eigen::Index dim) {
    oracle::Mat h = oracle::Mat::Zero(dim, dim);
    if (!h0.terms.empty()) h += oracle::dense_sum(h0);
    if (!mu.terms.empty()) h += xi * oracle::dense_sum(mu);
    return h;
}

double dense_fidelity(const qoc::PauliSum& h0, const qoc::PauliSum& mu,
                      const std::vector<double>& values, double dt,
                      const qoc::QuantumState& psi0,
                      const qoc::QuantumState& tau) {
    const Eigen::Index dim = Eigen::Index(1) << psi0.num_qubits;
    oracle::Vec psi = oracle::to_vec(psi0);
    for (double v : values) {
        const oracle::Mat u = oracle::expm_hermitian(dense_ham(h0, mu, v, dim), dt);
        psi = u * psi;
    }
    const oracle::Vec tv = oracle::to_vec(tau);
    const cplx overlap = (tv.adjoint() * psi)(0);
    return std::norm(overlap);
}

// Classical rendering of one sequential update: dense exponentials for every
// propagator, terminal overlap and transition element as plain inner
// products.
double dense_update_value(const qoc::KrotovProblem& p,
                          const qoc::PulseSequence& prev, int j,
                          const qoc::PulseSequence& partial) {
    const int n = prev.num_intervals();
    const Eigen::Index dim = Eigen::Index(1) << p.psi0.num_qubits;
    const oracle::Mat mu_d = oracle::dense_sum(p.mu);
    const auto step = [&](double xi) {
        return oracle::expm_hermitian(dense_ham(p.h0, p.mu, xi, dim), prev.dt);
    };

    oracle::Vec psi_t = oracle::to_vec(p.psi0);
    for (int i = 0; i < n; ++i) {
        const oracle::Mat u = step(prev.values[static_cast<std::size_t>(i)]);
        psi_t = u * psi_t;
    }
    const oracle::Vec tau_v = oracle::to_vec(p.tau);
    const cplx z_tau_psi = (tau_v.adjoint() * psi_t)(0);
    const cplx z1 = std::conj(z_tau_psi);

    oracle::Vec back = tau_v;
    for (int i = n - 1; i >= j; --i) {
        const oracle::Mat u = step(prev.values[static_cast<std::size_t>(i)]);
        back = u.adjoint() * back;
    }
    oracle::Vec psi = oracle::to_vec(p.psi0);
    for (int i = 0; i < j; ++i) {
        const oracle::Mat u = step(partial.values[static_cast<std::size_t>(i)]);
        psi = u * psi;
    }
    const oracle::Mat uj = step(prev.values[static_cast<std::size_t>(j)]);
    psi = uj * psi;

    const oracle::Vec mpsi = mu_d * psi;
    const cplx w = (back.adjoint() * mpsi)(0);
    return std::imag(z1 * w) / p.alpha_penalty;
}

TEST_CASE("fluence integrates the squared field over the grid") {
    qoc::PulseSequence pulse;
    pulse.dt = 0.5;
    pulse.values = {0.1, -0.2, 0.3};
    CHECK(qoc::pulse_fluence(pulse) == doctest::Approx(0.07));
    pulse.dt = 0.0;
    CHECK_THROWS_AS(qoc::pulse_fluence(pulse), std::invalid_argument);
}

TEST_CASE("superposition anchor overlaps both inputs in every regime") {
    const qoc::QuantumState zero = qoc::QuantumState::basis(1, 0);
    const qoc::QuantumState one = qoc::QuantumState::basis(1, 1);

    const auto score = [](const qoc::QuantumState& z, const qoc::QuantumState& a,
                          const qoc::QuantumState& b) {
        return std::min(std::abs(qoc::inner_product(z, a)),
                        std::abs(qoc::inner_product(z, b)));
    };

    SUBCASE("identical states") {
        const qoc::QuantumState z = qoc::superposition_anchor(zero, zero);
        CHECK(score(z, zero, zero) == doctest::Approx(1.0));
    }
    SUBCASE("orthogonal states") {
        const qoc::QuantumState z = qoc::superposition_anchor(zero, one);
        CHECK(score(z, zero, one) >= 0.7);
    }
    SUBCASE("antipodal pair defeats the first mixture but not the second") {
        qoc::QuantumState minus_zero = zero;
        for (auto& a : minus_zero.amps) a = -a;
        const qoc::QuantumState z = qoc::superposition_anchor(zero, minus_zero);
        CHECK(score(z, zero, minus_zero) >= 0.7);
    }
    SUBCASE("quarter-phase pair") {
        qoc::QuantumState i_zero = zero;
        for (auto& a : i_zero.amps) a *= cplx(0.0, 1.0);
        const qoc::QuantumState z = qoc::superposition_anchor(zero, i_zero);
        CHECK(score(z, zero, i_zero) >= 0.7);
    }
    SUBCASE("random pairs keep a healthy floor") {
        std::mt19937_64 rng(11);
        for (int rep = 0; rep < 60; ++rep) {
            const int nq = 1 + static_cast<int>(rng() % 3);
            const qoc::QuantumState a = oracle::random_state(rng, nq);
            const qoc::QuantumState b = oracle::random_state(rng, nq);
            const qoc::QuantumState z = qoc::superposition_anchor(a, b);
            CHECK(std::abs(z.norm() - 1.0) < 1e-12);
            CHECK(score(z, a, b) >= 0.3);
        }
    }
    SUBCASE("width mismatch is rejected") {
        CHECK_THROWS_AS(
            qoc::superposition_anchor(zero, qoc::QuantumState::basis(2, 0)),
            std::invalid_argument);
    }
}

TEST_CASE("cost evaluates fidelity minus the weighted fluence") {
    qoc::ShotSampler sampler{3, 0};

    SUBCASE("zero field on a matching target") {
        qoc::KrotovProblem p;
        p.mu = single("X");
        p.psi0 = qoc::QuantumState::basis(1, 0);
        p.tau = qoc::QuantumState::basis(1, 0);
        p.pulse0 = flat_pulse(1.0, 3, 0.0);
        CHECK(qoc::krotov_cost(p, p.pulse0, sampler) == doctest::Approx(1.0));
        p.tau = qoc::QuantumState::basis(1, 1);
        CHECK(qoc::krotov_cost(p, p.pulse0, sampler) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("random problems match the dense formula") {
        std::mt19937_64 rng(17);
        for (int rep = 0; rep < 6; ++rep) {
            qoc::KrotovProblem p;
            p.h0 = oracle::random_pauli_sum(rng, 2, 2);
            p.mu = oracle::random_pauli_sum(rng, 2, 2);
            p.psi0 = oracle::random_state(rng, 2);
            p.tau = oracle::random_state(rng, 2);
            p.alpha_penalty = 0.7;
            p.steps_per_interval = 128;
            qoc::PulseSequence pulse;
            pulse.dt = 0.2;
            for (int i = 0; i < 4; ++i) {
                pulse.values.push_back(
                    -0.5 + static_cast<double>(rng() % 1000) / 1000.0);
            }
            const double fid = dense_fidelity(p.h0, p.mu, pulse.values,
                                              pulse.dt, p.psi0, p.tau);
            const double want =
                fid - p.alpha_penalty * qoc::pulse_fluence(pulse);
            CHECK(qoc::krotov_cost(p, pulse, sampler) ==
                  doctest::Approx(want).epsilon(1e-4));
        }
    }
}

TEST_CASE("sequential update vanishes on purely real stationary data") {
    qoc::KrotovProblem p;
    p.mu = single("X");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::from_amplitudes({cplx(M_SQRT1_2), cplx(M_SQRT1_2)});
    p.pulse0 = flat_pulse(0.5, 3, 0.0);
    qoc::ShotSampler sampler{0, 0};
    for (int j = 0; j < 3; ++j) {
        const double delta =
            qoc::krotov_update_step(p, p.pulse0, j, p.pulse0, sampler);
        CHECK(std::abs(delta) < 1e-12);
    }
}

TEST_CASE("sequential update scales inversely with the penalty") {
    qoc::KrotovProblem p = flip_problem(0.2, 5, 0.3);
    p.increment_mode = true;
    qoc::ShotSampler sampler{0, 0};
    const double v1 = qoc::krotov_update_step(p, p.pulse0, 2, p.pulse0, sampler);
    p.alpha_penalty = 2.0;
    const double v2 = qoc::krotov_update_step(p, p.pulse0, 2, p.pulse0, sampler);
    CHECK(std::abs(v1) > 1e-3);
    CHECK(v1 == doctest::Approx(2.0 * v2).epsilon(1e-12));
}

TEST_CASE("sequential updates track the dense classical value across sweeps") {
    qoc::KrotovProblem p = flip_problem(0.1, 10, 0.1);
    const double eps_ts = qoc::trotter_error_bound(1.0, 1.0, 10);
    const double mu_norm = qoc::spectral_norm(p.mu);

    SUBCASE("exact backend within the splitting allowance") {
        const double tol = 3.0 * eps_ts * mu_norm / p.alpha_penalty;
        qoc::ShotSampler sampler{0, 0};
        qoc::PulseSequence prev = p.pulse0;
        for (int k = 1; k <= 2; ++k) {
            qoc::PulseSequence partial = prev;
            for (int j = 0; j < prev.num_intervals(); ++j) {
                const double got =
                    qoc::krotov_update_step(p, prev, j, partial, sampler);
                const double value = dense_update_value(p, prev, j, partial);
                const double old_v = prev.values[static_cast<std::size_t>(j)];
                const double want = value - old_v;  // replacement update
                CHECK(std::abs(got - want) <= tol);
                partial.values[static_cast<std::size_t>(j)] = old_v + got;
            }
            prev = partial;
        }
    }

    SUBCASE("sampled backend within splitting plus shot allowance") {
        p.backend = qoc::Backend::sampled;
        p.shots = 10000;
        const double tol = 3.0 * eps_ts * mu_norm / p.alpha_penalty +
                           5.0 / (p.alpha_penalty *
                                  std::sqrt(static_cast<double>(p.shots)));
        qoc::ShotSampler sampler{42, 0};
        for (int j : {0, 5, 9}) {
            const double got =
                qoc::krotov_update_step(p, p.pulse0, j, p.pulse0, sampler);
            const double value = dense_update_value(p, p.pulse0, j, p.pulse0);
            const double want = value - p.pulse0.values[static_cast<std::size_t>(j)];
            CHECK(std::abs(got - want) <= tol);
        }
    }
}

TEST_CASE("factored co-state equals direct backward propagation") {
    std::mt19937_64 rng(23);
    qoc::KrotovProblem p;
    p.h0 = oracle::random_pauli_sum(rng, 2, 2);
    p.mu = oracle::random_pauli_sum(rng, 2, 2);
    p.psi0 = oracle::random_state(rng, 2);
    p.tau = oracle::random_state(rng, 2);
    p.steps_per_interval = 2;
    qoc::PulseSequence pulse;
    pulse.dt = 0.3;
    pulse.values = {0.2, -0.4, 0.5, 0.1, -0.3};
    p.pulse0 = pulse;

    const qoc::ControlHamiltonian ch{p.h0, p.mu, pulse};
    const qoc::TrotterPlan plan{p.steps_per_interval};
    const qoc::QuantumState psi_t =
        qoc::trotter_evolve(p.psi0, ch, plan, qoc::Direction::forward);
    const cplx scalar = qoc::inner_product(p.tau, psi_t);  // <tau|psi(T)>

    // Direct path: scale tau by the terminal overlap first, then push the
    // unnormalized vector backward interval by interval.
    qoc::QuantumState projected = p.tau;
    for (auto& a : projected.amps) a *= scalar;

    const std::vector<qoc::QuantumState> back =
        qoc::krotov_backward_states(p, pulse);
    qoc::QuantumState direct = projected;
    for (int j = pulse.num_intervals() - 1; j >= 0; --j) {
        direct = qoc::trotter_evolve_interval(direct, ch, plan, j,
                                              qoc::Direction::backward);
        const qoc::QuantumState& factored = back[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < direct.amps.size(); ++i) {
            const cplx want = scalar * factored.amps[i];
            CHECK(std::abs(direct.amps[i] - want) < 1e-9);
        }
    }
}

TEST_CASE("sweep run converges immediately at a fixed point") {
    qoc::KrotovProblem p;
    p.h0 = single("Z");
    p.mu = single("X");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::basis(1, 0);
    p.pulse0 = flat_pulse(0.25, 4, 0.0);
    p.delta_j_min = 1e-12;
    const qoc::IterationTrace trace = qoc::krotov_run(p);

    CHECK(trace.converged);
    CHECK(trace.rows.size() == 2);
    CHECK(trace.rows[0].cost == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(trace.rows[1].cost == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(trace.rows[1].delta_cost) < 1e-9);
    for (double v : trace.final_pulse.values) CHECK(std::abs(v) < 1e-9);
    CHECK(trace.rows[0].experiments == 2);
    CHECK(trace.rows[1].experiments == 4 * 2 + 2);
}

TEST_CASE("sweep run is monotone on the canonical flip with exact readout") {
    qoc::KrotovProblem p = flip_problem(0.1, 30, 0.1);
    p.max_iters = 25;
    p.delta_j_min = -1e9;  // forces the full budget to expose the plateau
    const qoc::IterationTrace trace = qoc::krotov_run(p);

    CHECK(trace.rows.size() == 26);
    CHECK_FALSE(trace.converged);
    CHECK(trace.stop_reason == "iteration limit reached");
    for (std::size_t k = 1; k < trace.rows.size(); ++k) {
        CHECK(trace.rows[k].delta_cost >= -1e-9);
    }
    CHECK(trace.rows.back().cost > trace.rows.front().cost + 0.05);

    // Cost decomposition holds row by row.
    for (const auto& row : trace.rows) {
        const double recomposed =
            row.fidelity - p.alpha_penalty * qoc::pulse_fluence(row.pulse);
        CHECK(row.cost == doctest::Approx(recomposed).epsilon(1e-12));
    }

    // Final cost agrees with an independent cost evaluation of the final pulse.
    qoc::ShotSampler sampler{0, 0};
    CHECK(qoc::krotov_cost(p, trace.final_pulse, sampler) ==
          doctest::Approx(trace.rows.back().cost).epsilon(1e-9));
}

TEST_CASE("sweep run under sampling keeps the averaged cost climbing") {
    // Shot budget straight from the tail-bound helper at a 0.01 tolerance.
    const double var1 = qoc::variance_bound(1.0, 1.0, 1.0, 1.0);
    const std::int64_t shots = qoc::required_shots(var1, 0.01, 1, 1.0);
    CHECK(shots == 5000);

    qoc::KrotovProblem base = flip_problem(0.2, 15, 0.1);
    base.backend = qoc::Backend::sampled;
    base.shots = static_cast<std::uint64_t>(shots);
    base.steps_per_interval = 4;
    base.max_iters = 12;
    base.delta_j_min = -1e9;  // full budget; averaging needs equal lengths

    const double noise_floor = qoc::default_stop_threshold(base);
    const int seeds = 8;
    std::vector<double> mean_delta(13, 0.0);
    double mean_first = 0.0;
    double mean_last = 0.0;
    for (int s = 0; s < seeds; ++s) {
        qoc::KrotovProblem p = base;
        p.seed = static_cast<std::uint64_t>(s) + 1;
        const qoc::IterationTrace trace = qoc::krotov_run(p);
        REQUIRE(trace.rows.size() == 13);
        for (std::size_t k = 1; k < trace.rows.size(); ++k) {
            mean_delta[k] += trace.rows[k].delta_cost / seeds;
        }
        mean_first += trace.rows.front().cost / seeds;
        mean_last += trace.rows.back().cost / seeds;
    }
    for (std::size_t k = 1; k < mean_delta.size(); ++k) {
        CHECK(mean_delta[k] >= -noise_floor);
    }
    CHECK(mean_last > mean_first + 0.05);
}

TEST_CASE("gradient vanishes when the control commutes with the state") {
    qoc::GrapeProblem p;
    p.h0 = single("Z");
    p.mu = single("Z");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::from_amplitudes({cplx(M_SQRT1_2), cplx(M_SQRT1_2)});
    p.pulse0 = flat_pulse(0.3, 4, 0.2);
    qoc::ShotSampler sampler{0, 0};
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(qoc::grape_gradient(p, p.pulse0, j, sampler)) < 1e-12);
    }
}

TEST_CASE("gradient shrinks to zero with the interval length") {
    qoc::GrapeProblem p;
    p.h0 = single("Z");
    p.mu = single("X");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::basis(1, 1);
    p.pulse0 = flat_pulse(1e-12, 5, 0.4);
    qoc::ShotSampler sampler{0, 0};
    CHECK(std::abs(qoc::grape_gradient(p, p.pulse0, 2, sampler)) < 1e-9);
}

TEST_CASE("gradient error against the dense slope scales linearly in dt") {
    qoc::GrapeProblem base;
    base.h0 = single("Z");
    base.mu = single("X");
    base.psi0 = qoc::QuantumState::basis(1, 0);
    base.tau = qoc::QuantumState::basis(1, 1);
    base.steps_per_interval = 16;  // keeps splitting bias far below the signal

    const double total_time = 3.0;
    std::vector<double> rel_err;
    for (const double dt : {0.1, 0.05, 0.025}) {
        const int n = static_cast<int>(std::lround(total_time / dt));
        qoc::PulseSequence pulse;
        pulse.dt = dt;
        for (int j = 0; j < n; ++j) {
            const double t = (static_cast<double>(j) + 0.5) * dt;
            pulse.values.push_back(0.3 * std::sin(2.2 * t));
        }
        const int j = n / 2;
        qoc::GrapeProblem prob = base;
        prob.pulse0 = pulse;
        qoc::ShotSampler sampler{0, 0};
        const double est = qoc::grape_gradient(prob, pulse, j, sampler);

        const auto fid_at = [&](double uj) {
            std::vector<double> values = pulse.values;
            values[static_cast<std::size_t>(j)] = uj;
            return dense_fidelity(prob.h0, prob.mu, values, dt, prob.psi0,
                                  prob.tau);
        };
        const double u0 = pulse.values[static_cast<std::size_t>(j)];
        const double h = 1e-6;
        const double fd = (fid_at(u0 + h) - fid_at(u0 - h)) / (2.0 * h);
        REQUIRE(std::abs(fd) > 1e-6);
        rel_err.push_back(std::abs(est - fd) / std::abs(fd));
    }
    const double r1 = rel_err[0] / rel_err[1];
    const double r2 = rel_err[1] / rel_err[2];
    CHECK(r1 >= 1.5);
    CHECK(r1 <= 2.5);
    CHECK(r2 >= 1.5);
    CHECK(r2 <= 2.5);
}

TEST_CASE("ascent run leaves a stationary pulse unchanged") {
    qoc::GrapeProblem p;
    p.h0 = single("Z");
    p.mu = single("Z");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::from_amplitudes({cplx(M_SQRT1_2), cplx(M_SQRT1_2)});
    p.pulse0 = flat_pulse(0.3, 5, 0.2);
    p.max_iters = 3;
    const qoc::IterationTrace trace = qoc::grape_run(p);
    for (double v : trace.final_pulse.values) {
        CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
    }
    for (const auto& row : trace.rows) {
        CHECK(row.cost == doctest::Approx(trace.rows[0].cost).epsilon(1e-12));
    }
}

TEST_CASE("ascent run climbs monotonically on the canonical flip") {
    qoc::GrapeProblem p;
    p.h0 = single("Z");
    p.mu = single("X");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::basis(1, 1);
    p.pulse0 = flat_pulse(0.1, 30, 0.1);
    p.max_iters = 60;
    p.steps_per_interval = 16;
    const qoc::IterationTrace trace = qoc::grape_run(p);

    REQUIRE(trace.rows.size() == 61);
    for (std::size_t k = 1; k < trace.rows.size(); ++k) {
        CHECK(trace.rows[k].delta_cost >= -1e-6);
    }
    // The default rate is deliberately conservative; the climb is slow but
    // strictly upward.
    CHECK(trace.rows.back().cost > trace.rows.front().cost + 1e-4);
    CHECK(trace.rows[1].experiments == 2 * 30 + 1);

    // A deterministic aggressive-rate run actually reaches the target.
    qoc::GrapeProblem fast = p;
    fast.learning_rate = 1.5;
    fast.max_iters = 40;
    fast.steps_per_interval = 1;
    const qoc::IterationTrace fast_trace = qoc::grape_run(fast);
    CHECK(fast_trace.rows.back().cost >
          fast_trace.rows.front().cost + 0.5);
}

TEST_CASE("ascent run improves under sampling across seeds") {
    qoc::GrapeProblem base;
    base.h0 = single("Z");
    base.mu = single("X");
    base.psi0 = qoc::QuantumState::basis(1, 0);
    base.tau = qoc::QuantumState::basis(1, 1);
    base.pulse0 = flat_pulse(0.1, 30, 0.1);
    base.backend = qoc::Backend::sampled;
    base.shots = 10000;
    base.learning_rate = 1.5;
    base.max_iters = 40;

    double mean_gain = 0.0;
    int improved = 0;
    const int seeds = 6;
    for (int s = 0; s < seeds; ++s) {
        qoc::GrapeProblem p = base;
        p.seed = static_cast<std::uint64_t>(s) + 101;
        const qoc::IterationTrace trace = qoc::grape_run(p);
        const double gain = trace.rows.back().cost - trace.rows.front().cost;
        mean_gain += gain / seeds;
        if (gain > 0.0) ++improved;
    }
    CHECK(mean_gain > 0.5);
    CHECK(improved == seeds);
}

TEST_CASE("simplex search minimizes a shifted quadratic") {
    const std::vector<double> target{0.3, -0.7};
    const auto objective = [&](const std::vector<double>& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += (x[i] - target[i]) * (x[i] - target[i]);
        }
        return s;
    };
    qoc::NelderMeadParams params;
    params.max_iters = 200;
    const qoc::NelderMeadResult result =
        qoc::nelder_mead(objective, {0.0, 0.0}, params);
    CHECK(std::abs(result.best_point[0] - target[0]) < 1e-6);
    CHECK(std::abs(result.best_point[1] - target[1]) < 1e-6);
    CHECK(result.best_value < 1e-10);
    CHECK(result.evaluations > 200);
    for (std::size_t i = 1; i < result.best_value_history.size(); ++i) {
        CHECK(result.best_value_history[i] <=
              result.best_value_history[i - 1] + 1e-15);
    }
    CHECK_THROWS_AS(qoc::nelder_mead(objective, {}, params),
                    std::invalid_argument);
}

TEST_CASE("trig ansatz sampling is deterministic and matches its basis") {
    const qoc::CrabAnsatz a1 = qoc::make_trig_ansatz(3, 3.0, 7);
    const qoc::CrabAnsatz a2 = qoc::make_trig_ansatz(3, 3.0, 7);
    const qoc::CrabAnsatz a3 = qoc::make_trig_ansatz(3, 3.0, 8);
    CHECK(a1.coefficients == std::vector<double>{0.1, 0.1, 0.1});

    const std::vector<double> coeffs{0.4, -0.2, 0.9};
    const qoc::PulseSequence p1 = qoc::sample_pulse(a1, coeffs, 0.1, 30);
    const qoc::PulseSequence p2 = qoc::sample_pulse(a2, coeffs, 0.1, 30);
    const qoc::PulseSequence p3 = qoc::sample_pulse(a3, coeffs, 0.1, 30);
    CHECK(p1.values == p2.values);
    CHECK(p1.values != p3.values);

    for (int j = 0; j < 30; ++j) {
        const double t = (static_cast<double>(j) + 0.5) * 0.1;
        double want = 0.0;
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            want += coeffs[i] * a1.basis[i](t);
        }
        CHECK(p1.values[static_cast<std::size_t>(j)] ==
              doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("coefficient search sits still on a flat objective") {
    qoc::CrabProblem p;
    p.mu = single("Z");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::basis(1, 0);
    p.dt = 0.1;
    p.num_intervals = 10;
    const qoc::CrabAnsatz ansatz = qoc::make_trig_ansatz(2, 1.0, 3);
    qoc::NelderMeadParams nm;
    nm.max_iters = 10;
    const qoc::IterationTrace trace = qoc::crab_run(p, ansatz, nm);
    REQUIRE(trace.rows.size() == 10);
    for (const auto& row : trace.rows) {
        CHECK(row.cost == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(trace.ledger.count(qoc::ExperimentKind::swap_test) ==
          trace.ledger.total());
}

TEST_CASE("constant-basis search matches a grid scan") {
    qoc::CrabProblem p;
    p.mu = single("X");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::basis(1, 1);
    p.dt = 0.1;
    p.num_intervals = 10;

    qoc::CrabAnsatz constant;
    constant.basis.emplace_back([](double) { return 1.0; });
    constant.coefficients.push_back(0.0);

    qoc::NelderMeadParams nm;
    nm.max_iters = 120;
    const qoc::IterationTrace trace = qoc::crab_run(p, constant, nm);
    REQUIRE(trace.best_coefficients.size() == 1);
    const double c_star = trace.best_coefficients[0];

    // Dense 1-D oracle: F(c) = sin^2(c * T) for a bare X drive over T = 1.
    const auto infidelity = [&](double c) {
        const double s = std::sin(c * 1.0);
        return 1.0 - s * s;
    };
    double grid_best = 1e300;
    for (double c = -3.0; c <= 3.0; c += 0.001) {
        grid_best = std::min(grid_best, infidelity(c));
    }
    CHECK(infidelity(c_star) <= grid_best + 1e-3);
    CHECK(std::abs(std::abs(c_star) - M_PI / 2.0) < 0.01);
    CHECK(trace.rows.back().fidelity > 0.999);
}

TEST_CASE("trig-basis search reaches the flip target") {
    qoc::CrabProblem p;
    p.h0 = single("Z");
    p.mu = single("X");
    p.psi0 = qoc::QuantumState::basis(1, 0);
    p.tau = qoc::QuantumState::basis(1, 1);
    p.dt = 0.1;
    p.num_intervals = 30;

    const qoc::CrabAnsatz ansatz = qoc::make_trig_ansatz(3, 3.0, 1);
    const qoc::IterationTrace trace = qoc::crab_run(p, ansatz);
    CHECK(trace.rows.back().fidelity >= 0.99);
    CHECK(trace.best_coefficients.size() == 3);
    CHECK(trace.ledger.count(qoc::ExperimentKind::swap_test) ==
          trace.ledger.total());
}

TEST_CASE("standalone updates and gradients charge the documented tallies") {
    qoc::ShotSampler sampler{0, 0};

    SUBCASE("unitary-sum estimator with a two-term control") {
        qoc::KrotovProblem p = flip_problem(0.2, 4, 0.1);
        p.mu.terms.push_back({0.5, "Z"});
        qoc::ExperimentLedger ledger;
        qoc::krotov_update_step(p, p.pulse0, 1, p.pulse0, sampler, &ledger);
        const auto d =
            static_cast<std::int64_t>(qoc::lcu_decompose(p.mu).terms.size());
        CHECK(d == 2);
        CHECK(ledger.total() ==
              qoc::count_experiments(qoc::Algorithm::krotov_update, d));
        CHECK(ledger.count(qoc::ExperimentKind::oea_real) == 1);
        CHECK(ledger.count(qoc::ExperimentKind::oea_imag) == 1);
        CHECK(ledger.count(qoc::ExperimentKind::taea_lcu) == 4);
    }

    SUBCASE("block-encoded estimator") {
        qoc::KrotovProblem p = flip_problem(0.2, 4, 0.1);
        p.mu.terms.push_back({0.5, "Z"});
        p.use_block_encoding = true;
        qoc::ExperimentLedger ledger;
        qoc::krotov_update_step(p, p.pulse0, 1, p.pulse0, sampler, &ledger);
        CHECK(ledger.total() ==
              qoc::count_experiments(qoc::Algorithm::krotov_update, 1));
        CHECK(ledger.count(qoc::ExperimentKind::taea_block) == 2);
    }

    SUBCASE("gradient estimate") {
        qoc::GrapeProblem p;
        p.h0 = single("Z");
        p.mu = single("X");
        p.psi0 = qoc::QuantumState::basis(1, 0);
        p.tau = qoc::QuantumState::basis(1, 1);
        p.pulse0 = flat_pulse(0.1, 5, 0.1);
        qoc::ExperimentLedger ledger;
        qoc::grape_gradient(p, p.pulse0, 2, sampler, &ledger);
        CHECK(ledger.total() ==
              qoc::count_experiments(qoc::Algorithm::grape_update));
        CHECK(ledger.count(qoc::ExperimentKind::swap_test) == 2);
    }

    SUBCASE("sweep-run rows account their ledger slice") {
        qoc::KrotovProblem p = flip_problem(0.25, 3, 0.1);
        p.backend = qoc::Backend::sampled;
        p.shots = 64;
        p.max_iters = 2;
        p.delta_j_min = -1e9;
        const qoc::IterationTrace trace = qoc::krotov_run(p);
        REQUIRE(trace.rows.size() == 3);
        CHECK(trace.rows[0].experiments == 2);
        CHECK(trace.rows[1].experiments == 3 * 2 + 2);
        CHECK(trace.rows[2].experiments == 3 * 2 + 2);
        std::int64_t total = 0;
        for (const auto& row : trace.rows) total += row.experiments;
        CHECK(total == trace.ledger.total());
        CHECK(trace.rows[1].shots >= 64 * 8);
    }
}

}  // namespace
