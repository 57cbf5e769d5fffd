#pragma once

#include <Eigen/Dense>

namespace kfp {

/// Point z = (v, x, t) in phase space R^d x R^d x R.
struct Point {
    Eigen::VectorXd v;
    Eigen::VectorXd x;
    double t = 0.0;

    Point() = default;
    Point(Eigen::VectorXd v_, Eigen::VectorXd x_, double t_);

    int dim() const { return static_cast<int>(v.size()); }
};

/// Axis-aligned box Omega_v x Omega_x x (t_lo, t_hi).
///
/// Boxes are the only supported domain shape; every face is either a pure
/// velocity face or an (x,t) face with an axis-aligned outer normal.
struct BoxDomain {
    Eigen::VectorXd v_lo, v_hi;
    Eigen::VectorXd x_lo, x_hi;
    double t_lo = 0.0, t_hi = 1.0;

    int dim() const { return static_cast<int>(v_lo.size()); }

    /// Throws std::invalid_argument unless lo < hi componentwise and the
    /// v/x extents have equal dimension.
    void validate() const;

    /// Containment in the closure, with a small geometric tolerance.
    bool contains(const Point& p, double tol = 1e-12) const;

    static BoxDomain unit_box(int d);
    static BoxDomain make(std::vector<double> v_lo, std::vector<double> v_hi,
                          std::vector<double> x_lo, std::vector<double> x_hi,
                          double t_lo, double t_hi);
};

enum class BoundaryClass {
    Interior,
    KolmogorovBoundary,
    NonKolmogorovBoundary,
};

/// Galilean composition z0 ∘ z = (v0 + v, x0 + x + t v0, t0 + t).
Point group_compose(const Point& z0, const Point& z);

/// Group inverse z^{-1} = (-v, -x + t v, -t).
Point group_inverse(const Point& z);

/// Anisotropic dilation delta_r(z) = (r v, r^3 x, r^2 t), r > 0.
Point dilate(double r, const Point& z);

/// Classify a point of the closed box against the Kolmogorov boundary.
///
/// A point on a pure velocity face (with (x,t) interior) always carries
/// data. A point on an (x,t) face carries data iff (v,-1) . N_xt > 0 for
/// the face normal; on edges shared by several (x,t) faces the point is
/// Kolmogorov if any adjacent face qualifies. Ties (v,-1) . N_xt = 0 are
/// NonKolmogorov.
///
/// n_xt is the caller's outer normal in (x,t) (length d+1); it is honored
/// when nonzero and ignored on pure velocity faces. Throws if p is outside
/// the closure of dom.
BoundaryClass classify_boundary_point(const BoxDomain& dom, const Point& p,
                                      const Eigen::VectorXd& n_xt);

} // namespace kfp
