#include "qoc/runner.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "qoc/analysis.hpp"
#include "qoc/primitives.hpp"

namespace qoc {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

// Shortest round-trip decimal rendering, locale-independent by construction.
std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Schema access helpers: every failure names the offending field.
// ---------------------------------------------------------------------------

[[noreturn]] void schema_fail(const std::string& field, const std::string& why) {
    throw ConfigError("schema_violation", field, field + ": " + why, kExitSchema);
}

const json* find(const json& j, const std::string& key) {
    if (!j.is_object()) return nullptr;
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double need_number(const json& j, const std::string& field) {
    if (!j.is_number()) schema_fail(field, "expected a number");
    return j.get<double>();
}

std::int64_t need_integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) schema_fail(field, "expected an integer");
    return j.get<std::int64_t>();
}

std::string need_string(const json& j, const std::string& field) {
    if (!j.is_string()) schema_fail(field, "expected a string");
    return j.get<std::string>();
}

bool need_bool(const json& j, const std::string& field) {
    if (!j.is_boolean()) schema_fail(field, "expected a boolean");
    return j.get<bool>();
}

// ---------------------------------------------------------------------------
// Problem parsing
// ---------------------------------------------------------------------------

PauliSum parse_pauli_sum(const json& arr, const std::string& field) {
    if (!arr.is_array()) schema_fail(field, "expected an array of [coefficient, axes] pairs");
    PauliSum sum;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string entry_field = field + "[" + std::to_string(i) + "]";
        const json& entry = arr[i];
        if (!entry.is_array() || entry.size() != 2) {
            schema_fail(entry_field, "expected a [coefficient, axes] pair");
        }
        const double coeff = need_number(entry[0], entry_field + ".coefficient");
        const std::string axes = need_string(entry[1], entry_field + ".axes");
        if (axes.empty()) {
            throw ConfigError("bad_axes", entry_field,
                              entry_field + ": axes string is empty", kExitBadAxes);
        }
        for (char c : axes) {
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
                throw ConfigError(
                    "bad_axes", entry_field,
                    entry_field + ": axes string \"" + axes +
                        "\" contains unsupported operator '" + std::string(1, c) + "'",
                    kExitBadAxes);
            }
        }
        sum.terms.push_back({coeff, axes});
    }
    return sum;
}

int sum_width(const PauliSum& sum) {
    return sum.terms.empty() ? 0 : static_cast<int>(sum.terms.front().axes.size());
}

void check_sum_width(const PauliSum& sum, const std::string& field, int want) {
    for (std::size_t i = 0; i < sum.terms.size(); ++i) {
        const int w = static_cast<int>(sum.terms[i].axes.size());
        if (w != want) {
            throw ConfigError("width_mismatch", field + "[" + std::to_string(i) + "]",
                              field + "[" + std::to_string(i) + "]: operator acts on " +
                                  std::to_string(w) + " qubits, expected " +
                                  std::to_string(want),
                              kExitWidth);
        }
    }
}

QuantumState parse_state(const json& j, const std::string& field, int width) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (width <= 0) {
            schema_fail(field, "named state needs operators to fix the qubit count");
        }
        const std::uint64_t dim = std::uint64_t(1) << width;
        if (name == "zero") return QuantumState::basis(width, 0);
        if (name == "one") return QuantumState::basis(width, dim - 1);
        if (name == "plus") {
            std::vector<cplx> amps(dim, cplx(1.0 / std::sqrt(double(dim)), 0.0));
            return QuantumState::from_amplitudes(std::move(amps));
        }
        schema_fail(field, "unknown state name \"" + name +
                               "\" (expected zero, one, plus, or an amplitude list)");
    }
    if (!j.is_array()) schema_fail(field, "expected a state name or [re, im] pairs");
    std::vector<cplx> amps;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& entry = j[i];
        const std::string entry_field = field + "[" + std::to_string(i) + "]";
        if (!entry.is_array() || entry.size() != 2) {
            schema_fail(entry_field, "expected an [re, im] pair");
        }
        amps.emplace_back(need_number(entry[0], entry_field + ".re"),
                          need_number(entry[1], entry_field + ".im"));
    }
    const std::size_t dim = amps.size();
    if (dim < 2 || (dim & (dim - 1)) != 0) {
        throw ConfigError("width_mismatch", field,
                          field + ": amplitude count " + std::to_string(dim) +
                              " is not a power of two",
                          kExitWidth);
    }
    int nq = 0;
    while ((std::size_t(1) << nq) < dim) ++nq;
    if (nq > kMaxQubits) {
        throw ConfigError("width_cap", field,
                          field + ": " + std::to_string(nq) + " qubits exceed the cap of " +
                              std::to_string(kMaxQubits),
                          kExitWidth);
    }
    if (width > 0 && nq != width) {
        throw ConfigError("width_mismatch", field,
                          field + ": state spans " + std::to_string(nq) +
                              " qubits, operators span " + std::to_string(width),
                          kExitWidth);
    }
    double norm_sq = 0.0;
    for (const cplx& a : amps) norm_sq += std::norm(a);
    const double norm = std::sqrt(norm_sq);
    if (std::abs(norm - 1.0) > 1e-6) {
        throw ConfigError("state_norm", field,
                          field + ": norm " + format_number(norm) +
                              " deviates from 1 by more than 1e-6",
                          kExitStateNorm);
    }
    for (cplx& a : amps) a /= norm;
    return QuantumState::from_amplitudes(std::move(amps));
}

PulseSequence parse_pulse(const json& j, const std::string& field) {
    if (!j.is_object()) schema_fail(field, "expected an object");
    PulseSequence pulse;
    const json* dt = find(j, "dt");
    if (dt == nullptr) schema_fail(field + ".dt", "missing");
    pulse.dt = need_number(*dt, field + ".dt");
    if (!(pulse.dt > 0.0)) schema_fail(field + ".dt", "must be positive");
    const json* values = find(j, "values");
    const json* count = find(j, "num_intervals");
    if (values != nullptr) {
        if (!values->is_array() || values->empty()) {
            schema_fail(field + ".values", "expected a non-empty array of numbers");
        }
        for (std::size_t i = 0; i < values->size(); ++i) {
            pulse.values.push_back(
                need_number((*values)[i], field + ".values[" + std::to_string(i) + "]"));
        }
    } else if (count != nullptr) {
        const std::int64_t n = need_integer(*count, field + ".num_intervals");
        if (n < 1) schema_fail(field + ".num_intervals", "must be at least 1");
        double initial = 0.0;
        if (const json* iv = find(j, "initial_value")) {
            initial = need_number(*iv, field + ".initial_value");
        }
        pulse.values.assign(static_cast<std::size_t>(n), initial);
    } else {
        schema_fail(field, "needs either values or num_intervals");
    }
    return pulse;
}

Backend parse_backend(const std::string& name, const std::string& field) {
    if (name == "exact") return Backend::exact;
    if (name == "sampled") return Backend::sampled;
    schema_fail(field, "expected \"exact\" or \"sampled\"");
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

json flip_preset(double alpha_penalty) {
    return json{
        {"problem",
         {{"h0", json::array({json::array({1.0, "Z"})})},
          {"mu", json::array({json::array({1.0, "X"})})},
          {"psi0", "zero"},
          {"chi0", "one"},
          {"tau", "one"}}},
        {"pulse", {{"dt", 0.1}, {"num_intervals", 30}, {"initial_value", 0.1}}},
        {"params", {{"alpha_penalty", alpha_penalty}, {"max_iters", 200}}},
    };
}

}  // namespace

json preset_config(const std::string& name) {
    if (name == "flip1q") return flip_preset(1.0);
    // 0.2 is the softest weight at which the replacement sweep still
    // converges on this problem; below ~0.15 the magnified update oscillates.
    if (name == "flip1q_soft") return flip_preset(0.2);
    throw ConfigError("schema_violation", "preset",
                      "preset: unknown preset \"" + name + "\"", kExitSchema);
}

std::vector<std::string> preset_names() { return {"flip1q", "flip1q_soft"}; }

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

RunConfig parse_config(const json& document, const std::string& algorithm) {
    if (!document.is_object()) schema_fail("config", "expected a JSON object");

    const json* version = find(document, "version");
    if (version == nullptr) schema_fail("version", "missing");
    if (need_integer(*version, "version") != kConfigVersion) {
        throw ConfigError("unsupported_version", "version",
                          "version: expected " + std::to_string(kConfigVersion),
                          kExitSchema);
    }

    // A preset provides the base document; explicit fields override it.
    json merged;
    if (const json* preset = find(document, "preset")) {
        merged = preset_config(need_string(*preset, "preset"));
        json overrides = document;
        overrides.erase("preset");
        merged.merge_patch(overrides);
    } else {
        merged = document;
    }

    RunConfig config;
    config.echo = merged;

    if (!algorithm.empty()) {
        config.algorithm = algorithm;
    } else if (const json* algo = find(merged, "algorithm")) {
        config.algorithm = need_string(*algo, "algorithm");
    } else {
        schema_fail("algorithm", "missing (or pick a subcommand)");
    }
    const bool known =
        config.algorithm == "oea" || config.algorithm == "taea" ||
        config.algorithm == "krotov" || config.algorithm == "grape" ||
        config.algorithm == "crab" || config.algorithm == "resources";
    if (!known) {
        schema_fail("algorithm", "unknown algorithm \"" + config.algorithm + "\"");
    }

    const json* problem = find(merged, "problem");
    if (problem == nullptr) schema_fail("problem", "missing");
    if (const json* h0 = find(*problem, "h0")) {
        config.h0 = parse_pauli_sum(*h0, "problem.h0");
    }
    if (const json* mu = find(*problem, "mu")) {
        config.mu = parse_pauli_sum(*mu, "problem.mu");
    }
    int width = sum_width(config.h0);
    if (width == 0) width = sum_width(config.mu);
    if (width > kMaxQubits) {
        throw ConfigError("width_cap", "problem",
                          "problem: " + std::to_string(width) +
                              " qubits exceed the cap of " + std::to_string(kMaxQubits),
                          kExitWidth);
    }
    check_sum_width(config.h0, "problem.h0", width == 0 ? sum_width(config.h0) : width);
    check_sum_width(config.mu, "problem.mu", width == 0 ? sum_width(config.mu) : width);

    const auto load_state = [&](const char* key, QuantumState& out, bool& flag) {
        if (const json* s = find(*problem, key)) {
            out = parse_state(*s, std::string("problem.") + key, width);
            flag = true;
            if (width == 0) width = out.num_qubits;
        }
    };
    load_state("psi0", config.psi0, config.has_psi0);
    load_state("chi0", config.chi0, config.has_chi0);
    load_state("tau", config.tau, config.has_tau);
    load_state("zeta", config.zeta, config.has_zeta);
    const auto check_state_width = [&](const char* key, const QuantumState& s, bool flag) {
        if (flag && s.num_qubits != width) {
            throw ConfigError("width_mismatch", std::string("problem.") + key,
                              std::string("problem.") + key + ": state spans " +
                                  std::to_string(s.num_qubits) +
                                  " qubits, problem spans " + std::to_string(width),
                              kExitWidth);
        }
    };
    check_state_width("psi0", config.psi0, config.has_psi0);
    check_state_width("chi0", config.chi0, config.has_chi0);
    check_state_width("tau", config.tau, config.has_tau);
    check_state_width("zeta", config.zeta, config.has_zeta);

    if (const json* evolve_chi = find(*problem, "evolve_chi")) {
        config.evolve_chi = need_bool(*evolve_chi, "problem.evolve_chi");
    }

    if (const json* pulse = find(merged, "pulse")) {
        config.pulse = parse_pulse(*pulse, "pulse");
        config.has_pulse = true;
    }

    if (const json* backend = find(merged, "backend")) {
        config.backend = parse_backend(need_string(*backend, "backend"), "backend");
    }
    if (const json* shots = find(merged, "shots")) {
        const std::int64_t m = need_integer(*shots, "shots");
        if (m < 1) schema_fail("shots", "must be at least 1");
        config.shots = static_cast<std::uint64_t>(m);
    }
    const json* seeds = find(merged, "seeds");
    const json* seed = find(merged, "seed");
    if (seeds != nullptr && seed != nullptr) {
        schema_fail("seed", "give either seed or seeds, not both");
    }
    if (seeds != nullptr) {
        if (!seeds->is_array() || seeds->empty()) {
            schema_fail("seeds", "expected a non-empty array of integers");
        }
        config.seeds.clear();
        for (std::size_t i = 0; i < seeds->size(); ++i) {
            const std::int64_t s =
                need_integer((*seeds)[i], "seeds[" + std::to_string(i) + "]");
            if (s < 0) schema_fail("seeds[" + std::to_string(i) + "]", "must be non-negative");
            config.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    } else if (seed != nullptr) {
        const std::int64_t s = need_integer(*seed, "seed");
        if (s < 0) schema_fail("seed", "must be non-negative");
        config.seeds = {static_cast<std::uint64_t>(s)};
    }

    if (const json* params = find(merged, "params")) {
        if (!params->is_object()) schema_fail("params", "expected an object");
        if (const json* v = find(*params, "alpha_penalty")) {
            config.alpha_penalty = need_number(*v, "params.alpha_penalty");
            if (!(config.alpha_penalty > 0.0)) {
                schema_fail("params.alpha_penalty", "must be positive");
            }
        }
        if (const json* v = find(*params, "max_iters")) {
            const std::int64_t n = need_integer(*v, "params.max_iters");
            if (n < 1) schema_fail("params.max_iters", "must be at least 1");
            config.max_iters = static_cast<int>(n);
        }
        if (const json* v = find(*params, "delta_j_min")) {
            if (!v->is_null()) config.delta_j_min = need_number(*v, "params.delta_j_min");
        }
        if (const json* v = find(*params, "learning_rate")) {
            if (!v->is_null()) {
                config.learning_rate = need_number(*v, "params.learning_rate");
                if (!(config.learning_rate > 0.0)) {
                    schema_fail("params.learning_rate", "must be positive");
                }
            }
        }
        if (const json* v = find(*params, "steps_per_interval")) {
            const std::int64_t n = need_integer(*v, "params.steps_per_interval");
            if (n < 1) schema_fail("params.steps_per_interval", "must be at least 1");
            config.steps_per_interval = static_cast<int>(n);
        }
        if (const json* v = find(*params, "increment_mode")) {
            config.increment_mode = need_bool(*v, "params.increment_mode");
        }
        if (const json* v = find(*params, "taea_variant")) {
            config.taea_variant = need_string(*v, "params.taea_variant");
            if (config.taea_variant != "lcu" && config.taea_variant != "block") {
                schema_fail("params.taea_variant", "expected \"lcu\" or \"block\"");
            }
        }
        if (const json* v = find(*params, "n_basis")) {
            const std::int64_t n = need_integer(*v, "params.n_basis");
            if (n < 1) schema_fail("params.n_basis", "must be at least 1");
            config.n_basis = static_cast<int>(n);
        }
        if (const json* v = find(*params, "nm_max_iters")) {
            const std::int64_t n = need_integer(*v, "params.nm_max_iters");
            if (n < 1) schema_fail("params.nm_max_iters", "must be at least 1");
            config.nm_max_iters = static_cast<int>(n);
        }
    }

    if (const json* out_dir = find(merged, "out_dir")) {
        config.out_dir = need_string(*out_dir, "out_dir");
    } else if (const char* env = std::getenv("QOC_OUT_DIR")) {
        config.out_dir = env;
    }

    // Per-algorithm requirements.
    const auto require = [&](bool present, const char* field) {
        if (!present) schema_fail(field, "required for algorithm " + config.algorithm);
    };
    const std::string& algo = config.algorithm;
    if (algo == "oea" || algo == "taea") {
        require(config.has_psi0, "problem.psi0");
        require(config.has_chi0, "problem.chi0");
        if (algo == "taea") require(!config.mu.terms.empty(), "problem.mu");
        if (config.has_zeta) {
            // The superposition map divides by both reference overlaps.
            if (std::abs(inner_product(config.zeta, config.psi0)) < 1e-12 ||
                std::abs(inner_product(config.zeta, config.chi0)) < 1e-12) {
                throw ConfigError("vanishing_overlap", "problem.zeta",
                                  "problem.zeta: reference state is orthogonal to an "
                                  "input state; the superposition map cannot equalize "
                                  "the branch weights",
                                  kExitVanishingOverlap);
            }
        }
    } else if (algo == "krotov" || algo == "grape" || algo == "crab") {
        require(config.has_psi0, "problem.psi0");
        require(config.has_tau, "problem.tau");
        require(!config.mu.terms.empty(), "problem.mu");
        require(config.has_pulse, "pulse");
    } else if (algo == "resources") {
        require(!config.mu.terms.empty(), "problem.mu");
    }
    return config;
}

RunConfig load_config(const std::string& path, const std::string& algorithm) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("config_parse", "config",
                          "config: cannot open \"" + path + "\"", kExitConfigParse);
    }
    json document;
    try {
        in >> document;
    } catch (const json::parse_error& e) {
        throw ConfigError("config_parse", "config",
                          "config: " + std::string(e.what()), kExitConfigParse);
    }
    return parse_config(document, algorithm);
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

const char* kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::oea_real: return "oea_real";
        case ExperimentKind::oea_imag: return "oea_imag";
        case ExperimentKind::taea_lcu: return "taea_lcu";
        case ExperimentKind::taea_block: return "taea_block";
        case ExperimentKind::swap_test: return "swap_test";
    }
    return "unknown";
}

json ledger_json(const ExperimentLedger& ledger) {
    json out;
    for (ExperimentKind kind :
         {ExperimentKind::oea_real, ExperimentKind::oea_imag, ExperimentKind::taea_lcu,
          ExperimentKind::taea_block, ExperimentKind::swap_test}) {
        out[kind_name(kind)] = ledger.count(kind);
    }
    out["experiments"] = ledger.total();
    out["shots"] = ledger.total_shots();
    return out;
}

json trace_json(const IterationTrace& trace) {
    json rows = json::array();
    for (const auto& row : trace.rows) {
        rows.push_back({{"k", row.k},
                        {"J", row.cost},
                        {"delta_J", row.delta_cost},
                        {"fidelity", row.fidelity},
                        {"experiments", row.experiments},
                        {"shots", row.shots},
                        {"noise_limited", row.noise_limited}});
    }
    return rows;
}

json pulse_json(const PulseSequence& pulse) {
    return json{{"dt", pulse.dt}, {"values", pulse.values}};
}

SuperpositionTask make_primitive_task(const RunConfig& config) {
    SuperpositionTask task;
    task.psi0 = config.psi0;
    task.chi0 = config.chi0;
    task.zeta = config.has_zeta ? config.zeta
                                : superposition_anchor(config.psi0, config.chi0);
    if (config.has_pulse) {
        const EvolutionPlan plan{ControlHamiltonian{config.h0, config.mu, config.pulse},
                                 TrotterPlan{config.steps_per_interval}};
        task.u_plan = plan;
        if (config.evolve_chi) task.v_plan = plan;
    }
    return task;
}

json run_primitive_seed(const RunConfig& config, std::uint64_t seed) {
    ShotSampler sampler{seed, 0};
    ExperimentLedger ledger;
    json out{{"seed", seed}};
    const SuperpositionTask task = make_primitive_task(config);
    if (config.algorithm == "oea") {
        const OverlapEstimate est =
            oea(task, config.backend, config.shots, sampler, &ledger);
        out["real"] = est.re;
        out["imag"] = est.im;
        out["modulus"] = std::hypot(est.re, est.im);
        out["success_prob"] = est.success_prob;
    } else {
        cplx amp;
        if (config.taea_variant == "block") {
            const BlockEncoding be = build_block_encoding(config.mu);
            amp = taea_block(task, be, config.backend, config.shots, sampler, &ledger);
        } else {
            amp = taea_lcu(task, config.mu, config.backend, config.shots, sampler,
                           &ledger);
        }
        out["real"] = amp.real();
        out["imag"] = amp.imag();
        out["modulus"] = std::abs(amp);
    }
    out["ledger"] = ledger_json(ledger);
    return out;
}

json optimizer_run_json(const IterationTrace& trace, std::uint64_t seed) {
    json out{{"seed", seed},
             {"converged", trace.converged},
             {"stop_reason", trace.stop_reason},
             {"stop_threshold", trace.stop_threshold},
             {"iterations", trace.rows.empty() ? 0 : trace.rows.back().k},
             {"final_cost", trace.rows.empty() ? 0.0 : trace.rows.back().cost},
             {"final_fidelity", trace.rows.empty() ? 0.0 : trace.rows.back().fidelity},
             {"final_pulse", pulse_json(trace.final_pulse)},
             {"ledger", ledger_json(trace.ledger)},
             {"trace", trace_json(trace)}};
    if (!trace.best_coefficients.empty()) {
        out["best_coefficients"] = trace.best_coefficients;
    }
    return out;
}

IterationTrace run_optimizer_seed(const RunConfig& config, std::uint64_t seed) {
    if (config.algorithm == "krotov") {
        KrotovProblem p;
        p.h0 = config.h0;
        p.mu = config.mu;
        p.psi0 = config.psi0;
        p.tau = config.tau;
        p.alpha_penalty = config.alpha_penalty;
        p.pulse0 = config.pulse;
        p.delta_j_min = config.delta_j_min;
        p.max_iters = config.max_iters;
        p.backend = config.backend;
        p.shots = config.shots;
        p.seed = seed;
        p.increment_mode = config.increment_mode;
        p.use_block_encoding = config.taea_variant == "block";
        p.steps_per_interval = config.steps_per_interval;
        return krotov_run(p);
    }
    if (config.algorithm == "grape") {
        GrapeProblem p;
        p.h0 = config.h0;
        p.mu = config.mu;
        p.psi0 = config.psi0;
        p.tau = config.tau;
        p.pulse0 = config.pulse;
        p.learning_rate = config.learning_rate;
        p.max_iters = config.max_iters;
        p.backend = config.backend;
        p.shots = config.shots;
        p.seed = seed;
        p.steps_per_interval = config.steps_per_interval;
        return grape_run(p);
    }
    CrabProblem p;
    p.h0 = config.h0;
    p.mu = config.mu;
    p.psi0 = config.psi0;
    p.tau = config.tau;
    p.dt = config.pulse.dt;
    p.num_intervals = config.pulse.num_intervals();
    p.backend = config.backend;
    p.shots = config.shots;
    p.seed = seed;
    p.steps_per_interval = config.steps_per_interval;
    const double total_time = p.dt * p.num_intervals;
    const CrabAnsatz ansatz = make_trig_ansatz(config.n_basis, total_time, seed);
    NelderMeadParams nm;
    nm.max_iters = config.nm_max_iters;
    return crab_run(p, ansatz, nm);
}

// Error-budget diagnostics mirrored from the optimizer's stop logic.
json budget_json(const RunConfig& config) {
    json out;
    if (!config.has_pulse || config.mu.terms.empty()) return out;
    const ControlHamiltonian ch{config.h0, config.mu, config.pulse};
    const double c_max = grouped_c_max(ch);
    const double total_time = config.pulse.dt * config.pulse.num_intervals();
    const int substeps = config.pulse.num_intervals() * config.steps_per_interval;
    const double eps_ts =
        c_max > 0.0 ? trotter_error_bound(c_max, total_time, substeps) : 0.0;
    const double mu_norm = spectral_norm(config.mu);
    double eps_m = 0.0;
    if (config.backend == Backend::sampled) {
        const LcuDecomposition lcu = lcu_decompose(config.mu);
        const double c_sq = config.taea_variant == "block"
                                ? lcu.weight_sum * lcu.weight_sum
                                : lcu.weight_sq_sum;
        eps_m = std::sqrt(variance_bound(config.alpha_penalty,
                                         static_cast<double>(config.shots), c_sq,
                                         mu_norm));
    }
    double xi_max = 0.0;
    for (double v : config.pulse.values) xi_max = std::max(xi_max, std::abs(v));
    out["eps_ts"] = eps_ts;
    out["eps_m"] = eps_m;
    out["mu_norm"] = mu_norm;
    out["monotonicity_threshold"] = monotonicity_threshold(
        total_time, config.alpha_penalty, mu_norm, xi_max, eps_m, eps_ts);
    return out;
}

json resources_json(const RunConfig& config) {
    const LcuDecomposition lcu = lcu_decompose(config.mu);
    const int d = static_cast<int>(lcu.terms.size());
    json counts{{"oea", count_experiments(Algorithm::oea)},
                {"taea_lcu", count_experiments(Algorithm::taea_lcu, d)},
                {"taea_block", count_experiments(Algorithm::taea_block)},
                {"krotov_update", count_experiments(Algorithm::krotov_update, d)},
                {"grape_update", count_experiments(Algorithm::grape_update)}};
    json out{{"lcu_terms", d},
             {"lcu_weight_sum", lcu.weight_sum},
             {"experiments", counts}};
    const json budget = budget_json(config);
    if (!budget.empty()) out["budget"] = budget;
    return out;
}

}  // namespace

json run_report(const RunConfig& config) {
    json report{{"tool_version", kToolVersion},
                {"algorithm", config.algorithm},
                {"backend", config.backend == Backend::exact ? "exact" : "sampled"},
                {"shots", config.shots},
                {"config", config.echo}};
    if (config.algorithm == "resources") {
        report["resources"] = resources_json(config);
        return report;
    }

    const std::size_t n_seeds = config.seeds.size();
    std::vector<json> blocks(n_seeds);
    const bool primitive = config.algorithm == "oea" || config.algorithm == "taea";
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_seeds; ++i) {
        if (primitive) {
            blocks[i] = run_primitive_seed(config, config.seeds[i]);
        } else {
            const IterationTrace trace = run_optimizer_seed(config, config.seeds[i]);
            blocks[i] = optimizer_run_json(trace, config.seeds[i]);
        }
    }
    json runs = json::array();
    for (auto& block : blocks) runs.push_back(std::move(block));
    report["runs"] = std::move(runs);
    if (!primitive) {
        const json budget = budget_json(config);
        if (!budget.empty()) report["budget"] = budget;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Output rendering
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kTraceHeader = "k,J,delta_J,fidelity,experiments,shots\n";

void append_trace_row(std::string& out, std::int64_t k, double cost, double delta,
                      double fidelity, std::int64_t experiments,
                      std::uint64_t shots) {
    out += std::to_string(k);
    out += ',';
    out += format_number(cost);
    out += ',';
    out += format_number(delta);
    out += ',';
    out += format_number(fidelity);
    out += ',';
    out += std::to_string(experiments);
    out += ',';
    out += std::to_string(shots);
    out += '\n';
}

std::string trace_csv_from_json(const json& rows) {
    std::string out = kTraceHeader;
    for (const json& row : rows) {
        append_trace_row(out, row.at("k").get<std::int64_t>(),
                         row.at("J").get<double>(), row.at("delta_J").get<double>(),
                         row.at("fidelity").get<double>(),
                         row.at("experiments").get<std::int64_t>(),
                         row.at("shots").get<std::uint64_t>());
    }
    return out;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("io_error", path, path + ": cannot open for writing",
                          kExitIo);
    }
    out << body;
    if (!out) {
        throw ConfigError("io_error", path, path + ": write failed", kExitIo);
    }
}

std::string plot_series_csv(const json& rows, const char* header, const char* key) {
    std::string out = header;
    for (const json& row : rows) {
        out += std::to_string(row.at("k").get<std::int64_t>());
        out += ',';
        out += format_number(row.at(key).get<double>());
        out += '\n';
    }
    return out;
}

}  // namespace

std::string trace_csv(const IterationTrace& trace) {
    std::string out = kTraceHeader;
    for (const auto& row : trace.rows) {
        append_trace_row(out, row.k, row.cost, row.delta_cost, row.fidelity,
                         row.experiments, row.shots);
    }
    return out;
}

std::string estimates_csv(const json& report) {
    std::string out = "seed,real,imag,modulus,experiments,shots\n";
    for (const json& run : report.at("runs")) {
        out += std::to_string(run.at("seed").get<std::uint64_t>());
        out += ',';
        out += format_number(run.at("real").get<double>());
        out += ',';
        out += format_number(run.at("imag").get<double>());
        out += ',';
        out += format_number(run.at("modulus").get<double>());
        out += ',';
        out += std::to_string(run.at("ledger").at("experiments").get<std::int64_t>());
        out += ',';
        out += std::to_string(run.at("ledger").at("shots").get<std::uint64_t>());
        out += '\n';
    }
    return out;
}

void emit_plotdata(const IterationTrace& trace, const std::string& dir) {
    if (trace.rows.empty()) {
        throw std::invalid_argument("trace must be non-empty");
    }
    const json rows = trace_json(trace);
    write_file(dir + "/plot_cost.csv", plot_series_csv(rows, "k,J\n", "J"));
    write_file(dir + "/plot_fidelity.csv",
               plot_series_csv(rows, "k,fidelity\n", "fidelity"));
}

int write_outputs(const RunConfig& config, const json& report) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) {
        throw ConfigError("io_error", config.out_dir,
                          config.out_dir + ": cannot create directory (" +
                              ec.message() + ")",
                          kExitIo);
    }
    int files = 0;
    write_file(config.out_dir + "/report.json", report.dump(2) + "\n");
    ++files;
    if (config.algorithm == "resources") {
        const json& counts = report.at("resources").at("experiments");
        std::string csv = "algorithm,experiments\n";
        for (const auto& [name, value] : counts.items()) {
            csv += name;
            csv += ',';
            csv += std::to_string(value.get<std::int64_t>());
            csv += '\n';
        }
        write_file(config.out_dir + "/resources.csv", csv);
        return files + 1;
    }
    if (config.algorithm == "oea" || config.algorithm == "taea") {
        write_file(config.out_dir + "/estimates.csv", estimates_csv(report));
        return files + 1;
    }
    for (const json& run : report.at("runs")) {
        const std::string path = config.out_dir + "/trace_seed" +
                                 std::to_string(run.at("seed").get<std::uint64_t>()) +
                                 ".csv";
        write_file(path, trace_csv_from_json(run.at("trace")));
        ++files;
    }
    const json& first_rows = report.at("runs").front().at("trace");
    write_file(config.out_dir + "/plot_cost.csv",
               plot_series_csv(first_rows, "k,J\n", "J"));
    write_file(config.out_dir + "/plot_fidelity.csv",
               plot_series_csv(first_rows, "k,fidelity\n", "fidelity"));
    return files + 2;
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

int run_main(int argc, const char* const* argv) {
    CLI::App app{"quantum optimal-control simulation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_override = 0;
    std::int64_t shots_override = 0;
    std::string backend_override;
    std::string out_override;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"oea", "estimate the overlap of two evolved states"},
        {"taea", "estimate a transition amplitude through a control operator"},
        {"krotov", "sequential-update pulse optimization"},
        {"grape", "gradient-ascent pulse optimization"},
        {"crab", "basis-coefficient pulse search"},
        {"resources", "experiment counts and error-budget figures"},
    };
    for (const auto& [name, description] : commands) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "path to the run configuration")
            ->required();
        sub->add_option("--seed", seed_override, "replace the config seed list");
        sub->add_option("--shots", shots_override, "override the shot budget");
        sub->add_option("--backend", backend_override, "exact or sampled");
        sub->add_option("--out", out_override, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    CLI::App* sub = app.get_subcommands().front();

    try {
        RunConfig config = load_config(config_path, sub->get_name());
        if (sub->count("--seed") > 0) config.seeds = {seed_override};
        if (sub->count("--shots") > 0) {
            if (shots_override < 1) schema_fail("shots", "must be at least 1");
            config.shots = static_cast<std::uint64_t>(shots_override);
        }
        if (sub->count("--backend") > 0) {
            config.backend = parse_backend(backend_override, "backend");
        }
        if (sub->count("--out") > 0) config.out_dir = out_override;

        const json report = run_report(config);
        const int files = write_outputs(config, report);
        std::cout << config.algorithm << ": wrote " << files << " file(s) to "
                  << config.out_dir << "\n";
        return 0;
    } catch (const ConfigError& e) {
        const json err{{"error", e.code}, {"field", e.field}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        const json err{{"error", "invalid_problem"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return kExitInternal;
    }
}

}  // namespace qoc
