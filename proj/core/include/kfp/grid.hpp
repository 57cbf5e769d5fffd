#pragma once

#include <functional>
#include <span>
#include <vector>

#include "kfp/geometry.hpp"

namespace kfp {

/// Tensor grid over Omega_v x Omega_x x [t_lo, t_hi].
///
/// Nodes include both box faces on every axis; spacings are
/// (hi - lo) / (n - 1). Flat node numbering runs v fastest, then x, then t,
/// and within the v (resp. x) block axis 0 is fastest.
struct GridSpec {
    BoxDomain dom;
    std::vector<int> n_v;
    std::vector<int> n_x;
    int n_t = 0;
    std::vector<double> h_v;
    std::vector<double> h_x;
    double h_t = 0.0;

    static GridSpec make(const BoxDomain& dom, std::vector<int> n_v,
                         std::vector<int> n_x, int n_t);

    /// Cube helper: n nodes on every axis of dom.
    static GridSpec cube(const BoxDomain& dom, int n);

    int dim() const { return static_cast<int>(n_v.size()); }

    long v_count() const;   // nodes per (x,t) slice
    long x_count() const;   // x nodes per time level
    long xt_count() const { return x_count() * n_t; }
    long total_nodes() const { return v_count() * x_count() * n_t; }

    double vcoord(int axis, int i) const { return dom.v_lo[axis] + h_v[axis] * i; }
    double xcoord(int axis, int i) const { return dom.x_lo[axis] + h_x[axis] * i; }
    double tcoord(int k) const { return dom.t_lo + h_t * k; }

    // Multi-index <-> flat conversions within the v and x blocks.
    long v_flat(std::span<const int> iv) const;
    long x_flat(std::span<const int> ix) const;
    void v_multi(long flat, std::span<int> iv) const;
    void x_multi(long flat, std::span<int> ix) const;

    long node(long iv_flat, long ix_flat, int k) const {
        return (static_cast<long>(k) * x_count() + ix_flat) * v_count() + iv_flat;
    }

    /// Trapezoid weight along one v axis (h at interior nodes, h/2 on faces).
    double v_axis_weight(int axis, int i) const {
        return (i == 0 || i == n_v[axis] - 1) ? 0.5 * h_v[axis] : h_v[axis];
    }
    double x_axis_weight(int axis, int i) const {
        return (i == 0 || i == n_x[axis] - 1) ? 0.5 * h_x[axis] : h_x[axis];
    }
    double t_weight(int k) const {
        return (k == 0 || k == n_t - 1) ? 0.5 * h_t : h_t;
    }

    /// Product trapezoid weight over the v block.
    double v_weight(std::span<const int> iv) const;
    /// Product trapezoid weight over the x block times the t weight.
    double xt_weight(std::span<const int> ix, int k) const;

    bool same_shape(const GridSpec& o) const;
};

/// Nodal scalar field over a GridSpec.
struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    static ScalarField zeros(const GridSpec& g);
    static ScalarField constant(const GridSpec& g, double c);

    /// Sample a closed-form function u(v, x, t) at every node.
    static ScalarField sample(
        const GridSpec& g,
        const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>& fn);

    double& at(long iv, long ix, int k) { return values[grid.node(iv, ix, k)]; }
    double at(long iv, long ix, int k) const { return values[grid.node(iv, ix, k)]; }

    /// Contiguous v-slice at fixed (x, t).
    std::span<double> v_slice(long ix, int k) {
        return {values.data() + grid.node(0, ix, k), static_cast<size_t>(grid.v_count())};
    }
    std::span<const double> v_slice(long ix, int k) const {
        return {values.data() + grid.node(0, ix, k), static_cast<size_t>(grid.v_count())};
    }
};

/// Velocity flux on staggered faces: component i lives on faces between
/// v-nodes adjacent along axis i (n_v[i]-1 positions on that axis, nodal on
/// every other axis, nodal in x and t).
struct VFlux {
    GridSpec grid;
    std::vector<std::vector<double>> comp;

    static VFlux zeros(const GridSpec& g);

    /// Faces along axis per (x,t) slice.
    long face_count_v(int axis) const;
    /// Flat face index within a component's v-block; iv is the multi-index of
    /// the lower adjacent node.
    long face_flat(int axis, std::span<const int> iv) const;
    long face_index(int axis, std::span<const int> iv, long ix, int k) const {
        return (static_cast<long>(k) * grid.x_count() + ix) * face_count_v(axis) +
               face_flat(axis, iv);
    }
};

/// Iterate all v multi-indices of a grid; fn(iv_flat, iv_multi).
void for_each_v(const GridSpec& g, const std::function<void(long, std::span<const int>)>& fn);
/// Iterate all x multi-indices of a grid; fn(ix_flat, ix_multi).
void for_each_x(const GridSpec& g, const std::function<void(long, std::span<const int>)>& fn);

} // namespace kfp
