#pragma once

#include "run_config.hpp"

namespace semopt::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitNotConverged = 4;

int run_forward(const RunConfig& cfg);
int run_gradcheck(const RunConfig& cfg);
int run_optimize(const RunConfig& cfg);
int run_convergence(const RunConfig& cfg);
int run_schedule(const RunConfig& cfg);
int run_bench(const RunConfig& cfg);

int run_command(const RunConfig& cfg);

}  // namespace semopt::cli
