#pragma once

#include "kfp/config.hpp"

namespace kfp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSolverFailure = 3;
inline constexpr int kExitVerificationFailure = 4;

/// Execute one validated configuration and write its artifacts under
/// cfg.out_dir. Returns a process exit code; failures also leave a
/// machine-readable error.json in the output directory.
int run(const RunConfig& cfg);

/// Sample an expression string onto a grid.
ScalarField sample_expression(const GridSpec& g, const std::string& src);

/// Least-squares slope of log(error) against log(h).
double fit_order(const std::vector<double>& h, const std::vector<double>& err);

} // namespace kfp
