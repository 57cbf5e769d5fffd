#pragma once

#include <string>
#include <vector>

#include "kfp/lcp.hpp"
#include "kfp/norms.hpp"

namespace kfp {

/// Violation of the compatibility requirement psi <= g on the Kolmogorov
/// boundary.
struct OrderingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolveReport {
    std::vector<long> iterations;             // per time slice
    double complementarity_residual = 0.0;    // max over slices
    double linear_residual = 0.0;
    double u_W = 0.0;
    double g_W = 0.0;
    double f_l2hm1 = 0.0;
    double wall_seconds = 0.0;
    long slice_dimension = 0;
    std::string method;
};

struct MarchResult {
    ScalarField u;
    SolveReport report;
};

/// Nodewise discrete check of psi <= g on the Kolmogorov boundary
/// (tolerance 1e-12): the whole t_lo level plus every data node of later
/// levels.
bool check_ordering(const ScalarField& psi, const ScalarField& gdata);

/// March the obstacle problem over all time levels. Data nodes carry g;
/// every interior node satisfies the slice complementarity system within
/// cfg.tol. Throws OrderingError up front when psi > g on the data set and
/// SolverFailure if a slice does not converge.
MarchResult march(const CoefficientField& A, const ScalarField& f, const ScalarField& psi,
                  const ScalarField& gdata, const SolverConfig& cfg);

/// Unconstrained Dirichlet march (the degenerate obstacle psi -> -inf),
/// solved with a sparse direct factorization per slice.
ScalarField solve_dirichlet(const CoefficientField& A, const ScalarField& f,
                            const ScalarField& gdata);

} // namespace kfp
