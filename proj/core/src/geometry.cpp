#include "kfp/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace kfp {

Point::Point(Eigen::VectorXd v_, Eigen::VectorXd x_, double t_)
    : v(std::move(v_)), x(std::move(x_)), t(t_) {
    if (v.size() != x.size() || v.size() < 1) {
        throw std::invalid_argument("Point: v and x must have equal dimension d >= 1");
    }
}

void BoxDomain::validate() const {
    const auto d = v_lo.size();
    if (d < 1 || v_hi.size() != d || x_lo.size() != d || x_hi.size() != d) {
        throw std::invalid_argument("BoxDomain: inconsistent dimensions");
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(v_lo[i] < v_hi[i]) || !(x_lo[i] < x_hi[i])) {
            throw std::invalid_argument("BoxDomain: lo < hi must hold componentwise");
        }
    }
    if (!(t_lo < t_hi)) {
        throw std::invalid_argument("BoxDomain: t_lo < t_hi must hold");
    }
}

bool BoxDomain::contains(const Point& p, double tol) const {
    if (p.dim() != dim()) return false;
    for (int i = 0; i < dim(); ++i) {
        if (p.v[i] < v_lo[i] - tol || p.v[i] > v_hi[i] + tol) return false;
        if (p.x[i] < x_lo[i] - tol || p.x[i] > x_hi[i] + tol) return false;
    }
    return p.t >= t_lo - tol && p.t <= t_hi + tol;
}

BoxDomain BoxDomain::unit_box(int d) {
    BoxDomain b;
    b.v_lo = Eigen::VectorXd::Zero(d);
    b.v_hi = Eigen::VectorXd::Ones(d);
    b.x_lo = Eigen::VectorXd::Zero(d);
    b.x_hi = Eigen::VectorXd::Ones(d);
    b.t_lo = 0.0;
    b.t_hi = 1.0;
    b.validate();
    return b;
}

BoxDomain BoxDomain::make(std::vector<double> v_lo, std::vector<double> v_hi,
                          std::vector<double> x_lo, std::vector<double> x_hi,
                          double t_lo, double t_hi) {
    auto to_vec = [](const std::vector<double>& a) {
        return Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())).eval();
    };
    BoxDomain b;
    b.v_lo = to_vec(v_lo);
    b.v_hi = to_vec(v_hi);
    b.x_lo = to_vec(x_lo);
    b.x_hi = to_vec(x_hi);
    b.t_lo = t_lo;
    b.t_hi = t_hi;
    b.validate();
    return b;
}

Point group_compose(const Point& z0, const Point& z) {
    if (z0.dim() != z.dim()) {
        throw std::invalid_argument("group_compose: dimension mismatch");
    }
    Point out;
    out.v = z0.v + z.v;
    out.x = z0.x + z.x + z.t * z0.v;
    out.t = z0.t + z.t;
    return out;
}

Point group_inverse(const Point& z) {
    Point out;
    out.v = -z.v;
    out.x = -z.x + z.t * z.v;
    out.t = -z.t;
    return out;
}

Point dilate(double r, const Point& z) {
    if (!(r > 0.0)) {
        throw std::invalid_argument("dilate: r must be positive");
    }
    Point out;
    out.v = r * z.v;
    out.x = (r * r * r) * z.x;
    out.t = (r * r) * z.t;
    return out;
}

namespace {

// Reference scale for on-face tests.
double face_tol(const BoxDomain& dom) {
    double scale = std::abs(dom.t_hi - dom.t_lo);
    for (int i = 0; i < dom.dim(); ++i) {
        scale = std::max({scale, dom.v_hi[i] - dom.v_lo[i], dom.x_hi[i] - dom.x_lo[i]});
    }
    return 1e-12 * std::max(scale, 1.0);
}

} // namespace

BoundaryClass classify_boundary_point(const BoxDomain& dom, const Point& p,
                                      const Eigen::VectorXd& n_xt) {
    dom.validate();
    if (p.dim() != dom.dim()) {
        throw std::invalid_argument("classify_boundary_point: dimension mismatch");
    }
    const double tol = face_tol(dom);
    if (!dom.contains(p, tol)) {
        throw std::invalid_argument("classify_boundary_point: point outside domain closure");
    }
    const int d = dom.dim();

    bool on_v_face = false;
    for (int i = 0; i < d; ++i) {
        if (std::abs(p.v[i] - dom.v_lo[i]) <= tol || std::abs(p.v[i] - dom.v_hi[i]) <= tol) {
            on_v_face = true;
        }
    }

    // Candidate (x,t) face normals the point lies on, as vectors in R^{d+1}.
    std::vector<Eigen::VectorXd> xt_normals;
    for (int i = 0; i < d; ++i) {
        if (std::abs(p.x[i] - dom.x_lo[i]) <= tol) {
            Eigen::VectorXd n = Eigen::VectorXd::Zero(d + 1);
            n[i] = -1.0;
            xt_normals.push_back(std::move(n));
        }
        if (std::abs(p.x[i] - dom.x_hi[i]) <= tol) {
            Eigen::VectorXd n = Eigen::VectorXd::Zero(d + 1);
            n[i] = 1.0;
            xt_normals.push_back(std::move(n));
        }
    }
    if (std::abs(p.t - dom.t_lo) <= tol) {
        Eigen::VectorXd n = Eigen::VectorXd::Zero(d + 1);
        n[d] = -1.0;
        xt_normals.push_back(std::move(n));
    }
    if (std::abs(p.t - dom.t_hi) <= tol) {
        Eigen::VectorXd n = Eigen::VectorXd::Zero(d + 1);
        n[d] = 1.0;
        xt_normals.push_back(std::move(n));
    }

    const bool on_xt_face = !xt_normals.empty();
    if (!on_v_face && !on_xt_face) return BoundaryClass::Interior;

    // Pure velocity boundary with (x,t) interior: always Kolmogorov.
    if (on_v_face && !on_xt_face) return BoundaryClass::KolmogorovBoundary;

    // On the (x,t) boundary: strict sign test against every face the point
    // lies on, plus the caller-provided normal when nonzero.
    auto drift_dot = [&](const Eigen::VectorXd& n) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += p.v[i] * n[i];
        s += -1.0 * n[d];
        return s;
    };
    if (n_xt.size() == d + 1 && n_xt.norm() > 0.0) {
        if (drift_dot(n_xt) > 0.0) return BoundaryClass::KolmogorovBoundary;
    }
    for (const auto& n : xt_normals) {
        if (drift_dot(n) > 0.0) return BoundaryClass::KolmogorovBoundary;
    }
    return BoundaryClass::NonKolmogorovBoundary;
}

} // namespace kfp
