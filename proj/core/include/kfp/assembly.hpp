#pragma once

#include <Eigen/SparseCore>
#include <utility>
#include <vector>

#include "kfp/coefficients.hpp"
#include "kfp/grid.hpp"

namespace kfp {

/// Sparse operator on one time slice. Row-compressed storage; rows are PDE
/// equations (no quadrature weights baked in).
struct SparseOperator {
    long dim = 0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> mat;
};

/// Worst-row structure diagnostics for M-matrix checks.
struct RowStructure {
    double min_diagonal = 0.0;
    double max_offdiagonal = 0.0;   // most positive off-diagonal entry
    double min_dominance = 0.0;     // min over rows of diag - sum |offdiag|
};
RowStructure row_structure(const SparseOperator& op);

/// Unknown numbering for one time slice of the marching system.
///
/// A slice node (iv, ix) is an unknown iff v is interior on every axis and
/// x is not an inflow face for the node's velocity: data sits where
/// (v, -1) . N_xt > 0, so v_a > 0 removes the x_hi face on axis a and
/// v_a < 0 the x_lo face.
struct SliceMaps {
    long n_unknown = 0;
    std::vector<long> unknown_of;                 // indexed by iv + V * ix; -1 = data node
    std::vector<std::pair<long, long>> nodes;     // unknown -> (iv_flat, ix_flat)

    long slice_node(long iv, long ix, long v_count) const { return iv + v_count * ix; }
};
SliceMaps build_slice_maps(const GridSpec& g);

/// True iff the node carries Kolmogorov data at time levels >= 1.
bool is_data_node(const GridSpec& g, std::span<const int> iv, std::span<const int> ix);

/// Second-order flux form of -div_v(A grad_v .) on one time level, with
/// homogeneous Dirichlet elimination of the velocity boundary. Index space:
/// interior v nodes x all x nodes. Mixed entries of a full A use centered
/// cross stencils; their quadrature is restricted to interior v nodes.
/// Requires A to pass verify_ellipticity.
SparseOperator assemble_diffusion(const CoefficientField& A, int time_index);

/// First-order upwind v . grad_x on the same index space as
/// assemble_diffusion, following the apply_Y convention (one-sided toward
/// +sign(v) with fallback at grid edges).
SparseOperator assemble_transport(const GridSpec& g);

/// One implicit Euler time level as a linear complementarity problem:
/// M u = q, u >= psi, componentwise complementarity. M has the transport
/// and diffusion contributions with signs such that
/// M = I/h_t - div_v(A grad_v .) - v . grad_x, and q = prev/h_t - f plus
/// the Dirichlet folds of boundary data g.
struct LcpSlice {
    SparseOperator M;
    Eigen::VectorXd q;
    Eigen::VectorXd psi;
    int time_index = 0;
    SliceMaps maps;
};

LcpSlice build_time_step(const CoefficientField& A, int time_index,
                         const ScalarField& f, const ScalarField& psi,
                         const ScalarField& gdata,
                         std::span<const double> prev_level);

} // namespace kfp
