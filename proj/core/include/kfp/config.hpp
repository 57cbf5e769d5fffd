#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfp/coefficients.hpp"
#include "kfp/lcp.hpp"
#include "kfp/stochastic.hpp"

namespace kfp {

/// Carries every validation problem found, not just the first.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> errs);
    std::vector<std::string> errors;
};

enum class RunMode { Solve, Verify, Convergence, Oracle };

std::string to_string(RunMode m);

struct OracleConfig {
    long n_paths = 100000;
    int gh_order = 8;
    int basis_degree = 3;
    double tolerance = 5e-2;
    VxGrid dp_grid;
    BoxDomain probe;
    double start_v = 0.0;
    double start_x = 0.0;
    std::string payoff_src;
};

/// Fully resolved run configuration. `echo` is the defaulted configuration
/// embedded verbatim into every emitted report.
struct RunConfig {
    RunMode mode = RunMode::Solve;
    int schema_version = 1;

    BoxDomain domain;
    std::vector<int> n_v, n_x;
    int n_t = 0;

    CoefficientSpec coeff;
    std::string f_src = "0";
    std::string psi_src = "-1000000";
    std::string g_src = "0";
    std::string u_exact_src;

    SolverConfig solver;
    OracleConfig oracle;
    std::vector<int> convergence_levels{16, 32, 64};

    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool emit_timings = false;

    nlohmann::ordered_json echo;

    GridSpec grid() const { return GridSpec::make(domain, n_v, n_x, n_t); }
};

RunConfig parse_config_json(const nlohmann::ordered_json& j);
RunConfig parse_config(const std::string& path);

} // namespace kfp
