#ifndef SUBKAM_CONFIG_HPP
#define SUBKAM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "subkam/errors.hpp"
#include "subkam/kam.hpp"

namespace subkam {

enum class Command { Reduce, Measure, Verify, Sweep };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct ProblemConfig {
    std::string potential;         // potential file, resolved against the config directory; empty for synthetic
    std::string synthetic = "cos"; // built-in seed used when no file is given
    double alpha = 0.5;
    double beta = 0.5;
    double lambda = 1.0;
    double eps = 1e-5;
    int d = 1;
    int N = 32;
};

struct ParamsConfig {
    std::vector<double> lo{2.6};
    std::vector<double> hi{2.8};
    std::size_t samples = 1; // a single sample sits at the box centre
    std::uint64_t seed = 1;
    std::string sampling = "halton"; // halton | grid
};

struct MeasureConfig {
    std::vector<double> gammas{0.2, 0.1, 0.05};
    std::vector<int> K{8}; // one resonance level per entry
    std::vector<std::string> families{"R0", "R1", "R2", "R11"};
    double cross_check_fraction = 0.01;
    std::vector<double> r0_box{-0.5, 0.5}; // 1-D box for the exact R0 oracle comparison, empty to skip
};

struct VerifyConfig {
    std::string checkpoint; // directory written by reduce, resolved against the config directory
    bool dynamics = true;
    double horizon = 100.0;
    double dt = 0.02;
    double record_interval = 1.0;
    double rho = 0.5;
    double p = 1.0;
    std::vector<double> phi0;
    int points = 20;
};

struct SweepConfig {
    std::vector<int> cutoffs{16, 32, 64, 128};
    std::vector<double> betas{0.25, 0.5};
    int K = 8;
    int seeds = 5;
};

struct OutputConfig {
    bool trajectories = true;
    bool checkpoint = true;
};

struct RunConfig {
    Command command = Command::Reduce;
    ProblemConfig problem;
    KamParams kam;
    ParamsConfig params;
    MeasureConfig measure;
    VerifyConfig verify;
    SweepConfig sweep;
    OutputConfig outputs;
    std::string base_dir = "."; // directory relative paths are resolved against

    std::string resolve(const std::string& path) const;
};

class ConfigError : public ParameterError {
public:
    explicit ConfigError(std::vector<std::string> violations);
    std::vector<std::string> violations;
};

// Parses a JSON run configuration, filling defaults. Syntax errors report line and column;
// otherwise every violation (unknown key, wrong type, constraint breach) is collected.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

// Every constraint violation of an assembled configuration.
std::vector<std::string> config_violations(const RunConfig& cfg);

} // namespace subkam

#endif
