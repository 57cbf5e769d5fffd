#pragma once

#include <stdexcept>
#include <string>

#include "kfp/assembly.hpp"

namespace kfp {

struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    enum class Method { Psor, Penalized };
    Method method = Method::Psor;
    double omega = 1.5;            // PSOR relaxation, in (0, 2)
    double tol = 1e-8;             // complementarity tolerance (max norm)
    long max_iter = 0;             // 0 -> 10 * slice dimension
    double epsilon_penalty = 1e-8;
    int newton_max = 50;

    void validate() const;
    long effective_max_iter(long dim) const { return max_iter > 0 ? max_iter : 10 * dim; }
};

struct LcpResult {
    Eigen::VectorXd u;
    long iterations = 0;
    double complementarity_residual = 0.0;  // max |min(Mu - q, u - psi)|
    double linear_residual = 0.0;           // max |Mu - q| where u > psi + tol
};

/// Max-norm of min(Mu - q, u - psi).
double complementarity_residual(const LcpSlice& s, const Eigen::VectorXd& u);

/// Projected SOR. u0 must dominate the obstacle. Throws SolverFailure when
/// max_iter sweeps leave the complementarity residual above tol.
LcpResult solve_lcp_psor(const LcpSlice& s, const SolverConfig& cfg, const Eigen::VectorXd& u0);

/// Penalized formulation M u + (1/eps) min(u - psi, 0) = q solved by
/// semismooth Newton on the active set. Throws SolverFailure on
/// non-convergence within newton_max.
LcpResult solve_lcp_penalized(const LcpSlice& s, const SolverConfig& cfg);

} // namespace kfp
