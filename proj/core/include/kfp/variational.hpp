#pragma once

#include "kfp/coefficients.hpp"
#include "kfp/grid.hpp"

namespace kfp {

/// Flux j with div_v(A j) = f - Yw enforced per slice, plus the discrete
/// H^{-1} aggregate of the divergence defect (direct-solver roundoff).
struct FluxCertificate {
    VFlux j;
    double divergence_residual = 0.0;
};

/// Per-slice Lax-Milgram construction: solve div_v(A grad_v phi) = f - Yw
/// on Omega_v with phi = 0 on the velocity boundary and return j = grad_v
/// phi on staggered faces. Throws on linear-solve failure.
FluxCertificate recover_flux(const ScalarField& w, const ScalarField& f,
                             const CoefficientField& A);

/// Quadratic energy 1/2 (A(grad_v u - j)) . (grad_v u - j) integrated over
/// the space-time box. Diagonal entries of A are harmonically averaged onto
/// faces; mixed entries are evaluated at interior nodes with centered
/// gradients and face-averaged fluxes.
double eval_J_pair(const ScalarField& u, const VFlux& j, const CoefficientField& A);

/// J[w, f]: the energy of eval_J_pair at the recovered flux. Nonnegative by
/// ellipticity; zero exactly at discrete solutions of the unconstrained
/// problem up to discretization error.
double eval_J(const ScalarField& w, const ScalarField& f, const CoefficientField& A);

/// Weak-form residual  iiint A grad_v u . grad_v phi + iint (f - Yu, phi).
/// phi must vanish on the velocity boundary (test class L2(H^1_c)); the
/// duality pairing is the discrete L2 pairing since all data are gridded.
double weak_residual(const ScalarField& u, const ScalarField& f, const CoefficientField& A,
                     const ScalarField& phi);

/// One-sided variational inequality gap for the admissible competitor w:
/// the weak residual tested against w - u. For a discrete solution u of the
/// complementarity system this is >= -O(tol) whenever w >= psi and w
/// matches u on the data nodes. Throws on inadmissible w.
double variational_inequality_gap(const ScalarField& u, const ScalarField& w,
                                  const ScalarField& f, const CoefficientField& A,
                                  const ScalarField& psi);

/// Nodewise nonnegativity of w on the sub-box `region` (tolerance 1e-12),
/// the discrete a.e. characterization of ordering in the W space.
bool is_nonneg_W(const ScalarField& w, const BoxDomain& region);

} // namespace kfp
