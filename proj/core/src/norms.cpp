#include "kfp/norms.hpp"

#include <cmath>
#include <stdexcept>

#include "kfp/field_ops.hpp"

namespace kfp {

namespace {

bool v_on_boundary(const GridSpec& g, std::span<const int> iv) {
    for (int a = 0; a < g.dim(); ++a) {
        if (iv[a] == 0 || iv[a] == g.n_v[a] - 1) return true;
    }
    return false;
}

// Face quadrature weight: full spacing along the face axis, trapezoid in the
// cross directions.
double h_factor(const GridSpec& g, int axis, std::span<const int> iv) {
    double w = g.h_v[axis];
    for (int b = 0; b < g.dim(); ++b) {
        if (b != axis) w *= g.v_axis_weight(b, iv[b]);
    }
    return w;
}

// Sum of w * u^2 over the v block of one slice.
double slice_l2_sq(const GridSpec& g, std::span<const double> slice) {
    double s = 0.0;
    std::vector<int> iv(g.dim());
    for (long vf = 0; vf < g.v_count(); ++vf) {
        g.v_multi(vf, iv);
        s += g.v_weight(iv) * slice[vf] * slice[vf];
    }
    return s;
}

// Sum of face-weighted squared v-gradient over one slice.
double slice_grad_sq(const GridSpec& g, std::span<const double> slice) {
    const int d = g.dim();
    double s = 0.0;
    std::vector<int> iv(d);
    std::vector<long> stride(d);
    long st = 1;
    for (int a = 0; a < d; ++a) {
        stride[a] = st;
        st *= g.n_v[a];
    }
    for (long vf = 0; vf < g.v_count(); ++vf) {
        g.v_multi(vf, iv);
        for (int a = 0; a < d; ++a) {
            if (iv[a] + 1 >= g.n_v[a]) continue;
            double w = h_factor(g, a, iv);
            const double diff = (slice[vf + stride[a]] - slice[vf]) / g.h_v[a];
            s += w * diff * diff;
        }
    }
    return s;
}

} // namespace

double norm_l2(const ScalarField& u) {
    const GridSpec& g = u.grid;
    double total = 0.0;
    std::vector<int> ix(g.dim());
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            total += g.xt_weight(ix, k) * slice_l2_sq(g, u.v_slice(xf, k));
        }
    }
    return std::sqrt(total);
}

double grad_v_l2(const ScalarField& u) {
    const GridSpec& g = u.grid;
    double total = 0.0;
    std::vector<int> ix(g.dim());
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            total += g.xt_weight(ix, k) * slice_grad_sq(g, u.v_slice(xf, k));
        }
    }
    return std::sqrt(total);
}

double norm_h1_v(const ScalarField& u) {
    const GridSpec& g = u.grid;
    double total = 0.0;
    std::vector<int> ix(g.dim());
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            const auto slice = u.v_slice(xf, k);
            const double h1 = std::sqrt(slice_l2_sq(g, slice)) + std::sqrt(slice_grad_sq(g, slice));
            total += g.xt_weight(ix, k) * h1 * h1;
        }
    }
    return std::sqrt(total);
}

VRieszSolver::VRieszSolver(const GridSpec& g) : grid_(g) {
    const int d = g.dim();
    const long V = g.v_count();
    interior_of_vnode_.assign(static_cast<size_t>(V), -1);
    std::vector<int> iv(d);
    for (long vf = 0; vf < V; ++vf) {
        g.v_multi(vf, iv);
        if (!v_on_boundary(g, iv)) {
            interior_of_vnode_[vf] = n_interior_++;
            interior_weight_.push_back(g.v_weight(iv));
        }
    }

    std::vector<long> stride(d);
    long st = 1;
    for (int a = 0; a < d; ++a) {
        stride[a] = st;
        st *= g.n_v[a];
    }

    std::vector<Eigen::Triplet<double>> trips;
    for (long vf = 0; vf < V; ++vf) {
        g.v_multi(vf, iv);
        for (int a = 0; a < d; ++a) {
            if (iv[a] + 1 >= g.n_v[a]) continue;
            const long lo = interior_of_vnode_[vf];
            const long hi = interior_of_vnode_[vf + stride[a]];
            if (lo < 0 && hi < 0) continue;
            const double c = h_factor(g, a, iv) / (g.h_v[a] * g.h_v[a]);
            if (lo >= 0) trips.emplace_back(lo, lo, c);
            if (hi >= 0) trips.emplace_back(hi, hi, c);
            if (lo >= 0 && hi >= 0) {
                trips.emplace_back(lo, hi, -c);
                trips.emplace_back(hi, lo, -c);
            }
        }
    }
    Eigen::SparseMatrix<double> L(n_interior_, n_interior_);
    L.setFromTriplets(trips.begin(), trips.end());
    ldlt_.compute(L);
    if (ldlt_.info() != Eigen::Success) {
        throw std::runtime_error("VRieszSolver: Dirichlet Laplacian factorization failed");
    }
}

double VRieszSolver::slice_hm1_norm(std::span<const double> slice) const {
    Eigen::VectorXd rhs(n_interior_);
    long i = 0;
    for (long vf = 0; vf < static_cast<long>(interior_of_vnode_.size()); ++vf) {
        if (interior_of_vnode_[vf] >= 0) {
            rhs[i] = interior_weight_[i] * slice[vf];
            ++i;
        }
    }
    const Eigen::VectorXd w = ldlt_.solve(rhs);
    if (ldlt_.info() != Eigen::Success) {
        throw std::runtime_error("VRieszSolver: Dirichlet solve failed");
    }
    return std::sqrt(std::max(0.0, rhs.dot(w)));
}

double norm_hm1_v(const ScalarField& gfield) {
    VRieszSolver riesz(gfield.grid);
    return norm_hm1_v(gfield, riesz);
}

double norm_hm1_v(const ScalarField& gfield, const VRieszSolver& riesz) {
    const GridSpec& g = gfield.grid;
    double total = 0.0;
    std::vector<int> ix(g.dim());
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            const double s = riesz.slice_hm1_norm(gfield.v_slice(xf, k));
            total += g.xt_weight(ix, k) * s * s;
        }
    }
    return std::sqrt(total);
}

double norm_W(const ScalarField& u) {
    VRieszSolver riesz(u.grid);
    return norm_W(u, riesz);
}

double norm_W(const ScalarField& u, const VRieszSolver& riesz) {
    return norm_h1_v(u) + norm_hm1_v(apply_Y(u), riesz);
}

double poincare_ratio(const ScalarField& u) {
    const GridSpec& g = u.grid;
    double maxabs = 0.0, maxbdry = 0.0;
    std::vector<int> iv(g.dim());
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            const auto slice = u.v_slice(xf, k);
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                maxabs = std::max(maxabs, std::abs(slice[vf]));
                if (v_on_boundary(g, iv)) maxbdry = std::max(maxbdry, std::abs(slice[vf]));
            }
        }
    }
    if (maxbdry > 1e-12 * std::max(1.0, maxabs)) {
        throw std::invalid_argument("poincare_ratio: field must vanish on the velocity boundary");
    }
    const double grad = grad_v_l2(u);
    if (!(grad > 0.0)) {
        throw std::invalid_argument("poincare_ratio: zero velocity gradient");
    }
    return norm_l2(u) / grad;
}

} // namespace kfp
