#pragma once

#include <cstdint>
#include <functional>

#include "kfp/march.hpp"

namespace kfp {

/// Trajectories of the kinetic Langevin system dV = sqrt(2) dW, dX = V dt,
/// sampled exactly in distribution per step. Layout: component-major within
/// a step, steps within a path.
struct PathBatch {
    int d = 1;
    long n_paths = 0;
    int n_steps = 0;
    double t0 = 0.0, t1 = 0.0;
    std::uint64_t seed = 0;
    /// Size n_paths * (n_steps + 1) * d each.
    std::vector<double> V, X;

    long idx(long path, int step, int comp) const {
        return (path * (n_steps + 1) + step) * d + comp;
    }
    double v_at(long path, int step, int comp = 0) const { return V[idx(path, step, comp)]; }
    double x_at(long path, int step, int comp = 0) const { return X[idx(path, step, comp)]; }
};

/// One exact Gaussian step per interval: over a step of width dt,
/// dV ~ N(0, 2 dt), dX = V dt + noise with Var 2 dt^3 / 3 and covariance
/// dt^2 against dV, sampled through the 2x2 Cholesky factor. Paths use
/// independent counter-based streams, so a batch is reproducible from its
/// seed regardless of traversal order.
PathBatch simulate_paths(const Eigen::VectorXd& v0, const Eigen::VectorXd& x0, double t0,
                         double t1, int n_steps, long n_paths, std::uint64_t seed);

/// Gauss-Hermite rule for E[f(Z)], Z standard normal: nodes and weights
/// with sum(w) = 1.
struct GaussHermite {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
    explicit GaussHermite(int order);
};

/// Uniform rectangle in (v, x), d = 1.
struct VxGrid {
    double v_lo = 0, v_hi = 1;
    double x_lo = 0, x_hi = 1;
    int n_v = 3, n_x = 3;

    double hv() const { return (v_hi - v_lo) / (n_v - 1); }
    double hx() const { return (x_hi - x_lo) / (n_x - 1); }
    long nodes() const { return static_cast<long>(n_v) * n_x; }
    double v(int i) const { return v_lo + hv() * i; }
    double x(int j) const { return x_lo + hx() * j; }
    long at(int i, int j) const { return static_cast<long>(j) * n_v + i; }
};

/// Bilinear interpolation with clamping to the rectangle.
double interp_vx(const VxGrid& g, const std::vector<double>& values, double v, double x);

/// Backward Markov-chain value recursion for the optimal stopping problem.
/// level[m] holds the value with m steps to maturity; level[0] is the
/// payoff itself and level[n_steps] the full-horizon value.
struct DpResult {
    VxGrid grid;
    double horizon = 0.0;
    int n_steps = 0;
    bool payoff_clipped = false;
    std::vector<std::vector<double>> level;

    const std::vector<double>& value() const { return level.back(); }
};

/// Dynamic programming on the (v, x) grid with one exact Gaussian
/// transition per step (Gauss-Hermite quadrature, bilinear interpolation).
/// Payoffs larger than 1e12 in magnitude are clipped and flagged.
DpResult value_by_dynamic_programming(const std::function<double(double, double)>& payoff,
                                      const VxGrid& grid, double horizon, int n_steps,
                                      int gh_order);

struct StoppingValue {
    double value = 0.0;
    double standard_error = 0.0;
    long n_paths = 0;
    int effective_degree = 0;   // reduced when the regression is rank-deficient
};

/// Longstaff-Schwartz lower-biased estimate of the stopping value at
/// (v0, x0) and time 0 with horizon T. Polynomial regression basis in
/// (v, x) up to total degree basis_degree, fitted on in-the-money paths.
StoppingValue lsmc_value(const std::function<double(double, double)>& payoff, double v0,
                         double x0, double horizon, int n_steps, long n_paths,
                         int basis_degree, std::uint64_t seed);

struct GapReport {
    double max_abs_gap = 0.0;
    double mean_abs_gap = 0.0;
    long n_probe_nodes = 0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Compare the final time level of a marched PDE field against a DP value
/// surface on an interior probe box (d = 1).
GapReport compare_with_pde(const ScalarField& u_pde, const DpResult& oracle,
                           const BoxDomain& probe, double tolerance);

/// Full cross-validation pipeline: DP oracle on its own (wider) grid, PDE
/// march with A = I, f = 0, the payoff as obstacle and DP values as
/// Kolmogorov data, then the probe-box comparison.
struct OracleComparison {
    DpResult dp;
    MarchResult pde;
    GapReport gap;
};

struct OraclePipeline {
    GridSpec pde_grid;                               // d = 1
    VxGrid dp_grid;
    int gh_order = 8;
    std::function<double(double, double)> payoff;    // (v, x)
    BoxDomain probe;
    double tolerance = 5e-2;
    SolverConfig solver;
};

OracleComparison run_pde_vs_dp(const OraclePipeline& p);

} // namespace kfp
