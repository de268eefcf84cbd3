#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qoc/control.hpp"

namespace qoc {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kConfigVersion = 1;

// Structured validation failure: `code` is a stable machine-readable tag,
// `field` names the offending config entry, and `exit_code` is the process
// status the command-line tool reports. Every code maps to its own exit
// status so scripts can branch without parsing messages.
struct ConfigError : std::runtime_error {
    std::string code;
    std::string field;
    int exit_code;

    ConfigError(std::string code_in, std::string field_in,
                const std::string& message, int exit_code_in)
        : std::runtime_error(message),
          code(std::move(code_in)),
          field(std::move(field_in)),
          exit_code(exit_code_in) {}
};

// Exit statuses, one per error code.
inline constexpr int kExitConfigParse = 2;      // unreadable file / bad JSON
inline constexpr int kExitSchema = 3;           // missing or mistyped field
inline constexpr int kExitBadAxes = 4;          // malformed operator string
inline constexpr int kExitStateNorm = 5;        // state too far from unit norm
inline constexpr int kExitWidth = 6;            // width mismatch or cap breach
inline constexpr int kExitVanishingOverlap = 7; // reference overlaps a state at ~0
inline constexpr int kExitIo = 8;               // output writing failed
inline constexpr int kExitInternal = 9;         // problem rejected downstream

// Fully resolved run description. Produced only by parse_config /
// load_config, which enforce every invariant the fields rely on.
struct RunConfig {
    std::string algorithm;  // oea | taea | krotov | grape | crab | resources
    PauliSum h0;
    PauliSum mu;
    QuantumState psi0;
    QuantumState chi0;  // second overlap branch (primitive runs)
    QuantumState tau;   // optimization target
    QuantumState zeta;  // explicit reference state; default is the built-in anchor
    bool has_psi0 = false;
    bool has_chi0 = false;
    bool has_tau = false;
    bool has_zeta = false;
    bool evolve_chi = false;  // drive the chi branch with the same pulse
    PulseSequence pulse;
    bool has_pulse = false;
    Backend backend = Backend::exact;
    std::uint64_t shots = 10000;
    std::vector<std::uint64_t> seeds{0};
    double alpha_penalty = 1.0;
    int max_iters = 200;
    double delta_j_min = std::numeric_limits<double>::quiet_NaN();
    double learning_rate = std::numeric_limits<double>::quiet_NaN();
    int steps_per_interval = 1;
    bool increment_mode = false;
    std::string taea_variant = "lcu";  // lcu | block
    int n_basis = 3;
    int nm_max_iters = 300;
    std::string out_dir = ".";
    nlohmann::json echo;  // merged config as parsed, embedded in reports
};

// Parses and validates a config document. The optional `algorithm` argument
// is the subcommand name and overrides any algorithm field in the document.
RunConfig parse_config(const nlohmann::json& document,
                       const std::string& algorithm = "");

// Reads the file and delegates to parse_config.
RunConfig load_config(const std::string& path,
                      const std::string& algorithm = "");

// Built-in problem presets addressable from configs as {"preset": NAME}.
nlohmann::json preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Executes the configured run and returns the machine-readable report.
// Pure compute: no files are touched. Multi-seed runs execute in parallel;
// the report content is independent of the parallelism setting.
nlohmann::json run_report(const RunConfig& config);

// Fixed-schema CSV rendering of one optimizer trace (header row included,
// LF line endings, '.' decimal separator).
std::string trace_csv(const IterationTrace& trace);

// Per-seed estimate table for primitive runs, same formatting rules.
std::string estimates_csv(const nlohmann::json& report);

// Writes the (k, J) and (k, fidelity) plot series for a trace into
// `dir`/plot_cost.csv and `dir`/plot_fidelity.csv.
void emit_plotdata(const IterationTrace& trace, const std::string& dir);

// Runs the command and writes report.json plus the CSV artifacts under the
// configured output directory. Returns the number of files written.
int write_outputs(const RunConfig& config, const nlohmann::json& report);

// Full command-line entry point: subcommand dispatch, flag overrides,
// structured error reporting on stderr. Returns the process exit status.
int run_main(int argc, const char* const* argv);

}  // namespace qoc
