#pragma once

#include <memory>
#include <span>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "kfp/grid.hpp"

namespace kfp {

/// Riesz solver realizing the H^{-1}(Omega_v) norm: for densities g on one
/// v-slice, || g ||_{H^{-1}} = || grad w ||_{L2} where -Lap_v w = g with
/// w = 0 on the velocity boundary. The Dirichlet Laplacian is factorized
/// once per grid and reused across slices.
class VRieszSolver {
public:
    explicit VRieszSolver(const GridSpec& g);

    /// H^{-1} norm of one v-slice (length v_count()).
    double slice_hm1_norm(std::span<const double> slice) const;

    long interior_count() const { return static_cast<long>(interior_of_vnode_.size() ? n_interior_ : 0); }

private:
    GridSpec grid_;
    long n_interior_ = 0;
    std::vector<long> interior_of_vnode_; // -1 for boundary v-nodes
    std::vector<double> interior_weight_; // trapezoid weight per interior node
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Trapezoidal L2(Omega_xt, L2(Omega_v)) norm over the full grid.
double norm_l2(const ScalarField& u);

/// || grad_v u || in L2(Omega_xt, L2(Omega_v)); staggered face differences.
double grad_v_l2(const ScalarField& u);

/// L2(Omega_xt, H1(Omega_v)) with the per-slice sum norm
/// ||u||_{L2} + ||grad_v u||_{L2}.
double norm_h1_v(const ScalarField& u);

/// L2(Omega_xt, H^{-1}(Omega_v)) aggregate of per-slice Riesz norms.
double norm_hm1_v(const ScalarField& gfield);
double norm_hm1_v(const ScalarField& gfield, const VRieszSolver& riesz);

/// The W norm: norm_h1_v(u) + L2-aggregate of per-slice H^{-1} norms of Yu.
double norm_W(const ScalarField& u);
double norm_W(const ScalarField& u, const VRieszSolver& riesz);

/// ||u||_{L2} / ||grad_v u||_{L2} for fields vanishing on the velocity
/// boundary. Throws if u does not vanish there or has zero gradient.
double poincare_ratio(const ScalarField& u);

} // namespace kfp
