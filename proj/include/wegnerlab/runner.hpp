#pragma once

#include <iosfwd>

#include "wegnerlab/config.hpp"

namespace wegnerlab {

// Exit codes: 0 success, 1 statistical/verification check failed,
// 2 precondition or model error, 3 numerical resolution error, 64 usage.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitModelError = 2;
inline constexpr int kExitResolutionError = 3;
inline constexpr int kExitUsage = 64;

int run_certificate(const ExperimentConfig& config, std::ostream& log);
int run_ids(const ExperimentConfig& config, std::ostream& log);
int run_sample_check(const ExperimentConfig& config, std::ostream& log);
int run_spectrum(const ExperimentConfig& config, std::ostream& log);

/// Maps thrown errors onto the exit-code contract.
int run_guarded(int (*command)(const ExperimentConfig&, std::ostream&),
                const ExperimentConfig& config, std::ostream& log,
                std::ostream& err);

}  // namespace wegnerlab
