#ifndef SUBKAM_COMMANDS_HPP
#define SUBKAM_COMMANDS_HPP

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "subkam/config.hpp"

namespace subkam {

enum class ExitCode : int {
    Ok = 0,
    Internal = 1,
    Config = 2,
    Divergence = 3,
    EmptySet = 4,
    Gate = 5,
    Io = 6,
    Resonance = 7,
    StepSize = 8,
};

struct ErrorClass {
    ExitCode code = ExitCode::Internal;
    std::string reason; // config, divergence, empty_parameter_set, gate, io, resonance, step_size, internal
};

ErrorClass classify(const std::exception& e);

struct RunOptions {
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed; // overrides params.seed
    unsigned threads = 0;              // 0 keeps the hardware default
};

struct RunOutcome {
    ExitCode code = ExitCode::Ok;
    std::string reason = "ok";
    std::string message;
};

// Executes the configured command, writing artifacts under opts.out_dir. Errors are caught, mapped to an
// exit code and recorded in <out>/error.json.
RunOutcome run(const RunConfig& cfg, const RunOptions& opts);

// Fitted exponent of y ~ x^e by least squares in log-log coordinates over entries with x, y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct DegradationPoint {
    double beta = 0.0;
    int N = 0;
    double gamma_beta = 0.0;       // mean over seeds of [[F]]^beta / [[R]]^beta
    double gamma_beta_alpha = 0.0; // mean over seeds of [[F]]^{beta,alpha} / [[R]]^beta
};

// Solves the homological equation for averaged z zbar seeds with Gamma^beta decay at each cutoff.
std::vector<DegradationPoint> degradation_sweep(const KamParams& base, const std::vector<int>& cutoffs,
                                                const std::vector<double>& betas, int K, int seeds, std::uint64_t seed);

} // namespace subkam

#endif
