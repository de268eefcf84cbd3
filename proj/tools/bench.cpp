// Timing comparison between the serial reference kernels and the OpenMP
// kernels, on the three workloads that dominate optimizer runtime: a single
// Pauli-string exponential, a full inner product, and a complete
// product-formula propagation. The serial path is the testing reference, so
// the bench also verifies both paths agree on every workload it times.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qoc/hamiltonian.hpp"
#include "qoc/state.hpp"

namespace {

using Clock = std::chrono::steady_clock;

// Keeps the optimizer from deleting the timed bodies.
volatile double g_sink = 0.0;

qoc::QuantumState random_state(std::mt19937_64& rng, int num_qubits) {
    std::normal_distribution<double> gauss;
    std::vector<qoc::cplx> amps(std::size_t{1} << num_qubits);
    double norm_sq = 0.0;
    for (auto& a : amps) {
        a = {gauss(rng), gauss(rng)};
        norm_sq += std::norm(a);
    }
    const double scale = 1.0 / std::sqrt(norm_sq);
    for (auto& a : amps) a *= scale;
    return qoc::QuantumState::from_amplitudes(std::move(amps));
}

std::string mixed_axes(int num_qubits) {
    const char cycle[3] = {'X', 'Y', 'Z'};
    std::string axes;
    for (int q = 0; q < num_qubits; ++q) axes.push_back(cycle[q % 3]);
    return axes;
}

// Runs body in doubling batches until the budget elapses; returns ns/call.
template <typename Body>
double time_per_call_ns(double budget_ms, Body&& body) {
    body();  // warm caches and the OpenMP thread pool
    std::int64_t reps = 1;
    for (;;) {
        const auto start = Clock::now();
        for (std::int64_t r = 0; r < reps; ++r) body();
        const double elapsed_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        if (elapsed_ms >= budget_ms) {
            return elapsed_ms * 1e6 / static_cast<double>(reps);
        }
        reps *= 2;
    }
}

std::string format_ns(double ns) {
    char buf[32];
    if (ns < 1e3) {
        std::snprintf(buf, sizeof buf, "%.0f ns", ns);
    } else if (ns < 1e6) {
        std::snprintf(buf, sizeof buf, "%.2f us", ns / 1e3);
    } else {
        std::snprintf(buf, sizeof buf, "%.3f ms", ns / 1e6);
    }
    return buf;
}

double max_amplitude_delta(const qoc::QuantumState& a, const qoc::QuantumState& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.amps.size(); ++i) {
        worst = std::max(worst, std::abs(a.amps[i] - b.amps[i]));
    }
    return worst;
}

struct Workload {
    std::string name;
    qoc::QuantumState (*run)(const qoc::QuantumState&, const qoc::ControlHamiltonian&);
};

qoc::QuantumState run_pauli_exp(const qoc::QuantumState& state,
                                const qoc::ControlHamiltonian& ch) {
    return qoc::apply_pauli_exponential(state, ch.mu.terms.front(), 0.3);
}

qoc::QuantumState run_trotter(const qoc::QuantumState& state,
                              const qoc::ControlHamiltonian& ch) {
    qoc::TrotterPlan plan;
    plan.steps_per_interval = 2;
    return qoc::trotter_evolve(state, ch, plan, qoc::Direction::forward);
}

}  // namespace

int main(int argc, char** argv) {
    double budget_ms = 80.0;
    if (argc > 1) {
        budget_ms = std::strtod(argv[1], nullptr);
        if (!(budget_ms > 0.0)) {
            std::fprintf(stderr, "usage: %s [budget-ms-per-cell]\n", argv[0]);
            return 2;
        }
    }

    const bool previous_mode = qoc::parallel_execution();
#ifdef _OPENMP
    const int threads = omp_get_max_threads();
    std::printf("OpenMP threads: %d%s\n", threads,
                threads == 1 ? " (single-threaded host: the parallel column "
                               "measures pure region overhead)"
                             : "");
#else
    std::printf("built without OpenMP: both columns run the serial kernels\n");
#endif
    std::printf("%-14s %6s %14s %14s %9s\n", "workload", "qubits", "serial/call",
                "parallel/call", "speedup");

    for (const int n : {4, 8, 10, 12}) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(n));
        const qoc::QuantumState state = random_state(rng, n);
        const qoc::QuantumState other = random_state(rng, n);

        qoc::ControlHamiltonian ch;
        ch.h0.terms.push_back({1.0, mixed_axes(n)});
        ch.h0.terms.push_back({0.5, std::string(static_cast<std::size_t>(n), 'Z')});
        ch.mu.terms.push_back({1.0, mixed_axes(n)});
        ch.pulse.dt = 0.1;
        ch.pulse.values.assign(8, 0.3);

        const Workload workloads[] = {{"pauli_exp", run_pauli_exp},
                                      {"trotter_evolve", run_trotter}};
        for (const auto& w : workloads) {
            qoc::set_parallel_execution(false);
            const qoc::QuantumState out_serial = w.run(state, ch);
            const double serial_ns = time_per_call_ns(
                budget_ms, [&] { g_sink = w.run(state, ch).amps[0].real(); });

            qoc::set_parallel_execution(true);
            const qoc::QuantumState out_parallel = w.run(state, ch);
            const double parallel_ns = time_per_call_ns(
                budget_ms, [&] { g_sink = w.run(state, ch).amps[0].real(); });

            const double delta = max_amplitude_delta(out_serial, out_parallel);
            if (delta != 0.0) {
                std::fprintf(stderr,
                             "MISMATCH: %s at %d qubits differs between kernel "
                             "paths (max amplitude delta %.3e)\n",
                             w.name.c_str(), n, delta);
                qoc::set_parallel_execution(previous_mode);
                return 1;
            }
            std::printf("%-14s %6d %14s %14s %8.2fx\n", w.name.c_str(), n,
                        format_ns(serial_ns).c_str(), format_ns(parallel_ns).c_str(),
                        serial_ns / parallel_ns);
        }

        // Reductions are blocked identically in both paths, so the inner
        // product must agree bit for bit, not just to rounding.
        qoc::set_parallel_execution(false);
        const qoc::cplx ip_serial = qoc::inner_product(state, other);
        const double ip_serial_ns = time_per_call_ns(budget_ms, [&] {
            g_sink = qoc::inner_product(state, other).real();
        });
        qoc::set_parallel_execution(true);
        const qoc::cplx ip_parallel = qoc::inner_product(state, other);
        const double ip_parallel_ns = time_per_call_ns(budget_ms, [&] {
            g_sink = qoc::inner_product(state, other).real();
        });
        if (ip_serial != ip_parallel) {
            std::fprintf(stderr,
                         "MISMATCH: inner_product at %d qubits is not "
                         "bit-identical between kernel paths\n",
                         n);
            qoc::set_parallel_execution(previous_mode);
            return 1;
        }
        std::printf("%-14s %6d %14s %14s %8.2fx\n", "inner_product", n,
                    format_ns(ip_serial_ns).c_str(), format_ns(ip_parallel_ns).c_str(),
                    ip_serial_ns / ip_parallel_ns);
    }

    qoc::set_parallel_execution(previous_mode);
    std::printf("all workloads agree between kernel paths "
                "(inner products bit-identical)\n");
    return 0;
}
