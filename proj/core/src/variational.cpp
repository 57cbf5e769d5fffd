#include "kfp/variational.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

#include "kfp/field_ops.hpp"
#include "kfp/norms.hpp"

namespace kfp {

namespace {

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

double face_weight(const GridSpec& g, int axis, std::span<const int> iv) {
    double w = g.h_v[axis];
    for (int b = 0; b < g.dim(); ++b) {
        if (b != axis) w *= g.v_axis_weight(b, iv[b]);
    }
    return w;
}

bool v_interior(const GridSpec& g, std::span<const int> iv) {
    for (int a = 0; a < g.dim(); ++a) {
        if (iv[a] <= 0 || iv[a] >= g.n_v[a] - 1) return false;
    }
    return true;
}

struct VStrides {
    std::vector<long> s;
    explicit VStrides(const GridSpec& g) : s(g.dim()) {
        long st = 1;
        for (int a = 0; a < g.dim(); ++a) {
            s[a] = st;
            st *= g.n_v[a];
        }
    }
};

// Interior-node numbering of the v block shared by the slice solves.
struct VInteriorMap {
    long n = 0;
    std::vector<long> of_vnode;
    std::vector<double> weight;
    explicit VInteriorMap(const GridSpec& g) {
        of_vnode.assign(static_cast<size_t>(g.v_count()), -1);
        std::vector<int> iv(g.dim());
        for (long vf = 0; vf < g.v_count(); ++vf) {
            g.v_multi(vf, iv);
            if (v_interior(g, iv)) {
                of_vnode[vf] = n++;
                weight.push_back(g.v_weight(iv));
            }
        }
    }
};

// Dirichlet form of -div(A grad .) on the v block of one slice.
Eigen::SparseMatrix<double> slice_form(const CoefficientField& A, const GridSpec& g,
                                       const VInteriorMap& map, long xf, int k, bool mixed) {
    const int d = g.dim();
    VStrides vs(g);
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<int> iv(d);
    for (long vf = 0; vf < g.v_count(); ++vf) {
        g.v_multi(vf, iv);
        for (int a = 0; a < d; ++a) {
            if (iv[a] + 1 >= g.n_v[a]) continue;
            const long lo = map.of_vnode[vf];
            const long hi = map.of_vnode[vf + vs.s[a]];
            if (lo < 0 && hi < 0) continue;
            const double a_face = harmonic(A.entry(g.node(vf, xf, k), a, a),
                                           A.entry(g.node(vf + vs.s[a], xf, k), a, a));
            const double c = a_face * face_weight(g, a, iv) / (g.h_v[a] * g.h_v[a]);
            if (lo >= 0) trips.emplace_back(lo, lo, c);
            if (hi >= 0) trips.emplace_back(hi, hi, c);
            if (lo >= 0 && hi >= 0) {
                trips.emplace_back(lo, hi, -c);
                trips.emplace_back(hi, lo, -c);
            }
        }
        if (mixed && v_interior(g, iv)) {
            const double wq = g.v_weight(iv);
            const long node = g.node(vf, xf, k);
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) {
                    if (i == j) continue;
                    const double aij = A.entry(node, i, j);
                    if (aij == 0.0) continue;
                    const double c = wq * aij / (4.0 * g.h_v[i] * g.h_v[j]);
                    for (int sr = -1; sr <= 1; sr += 2) {
                        const long row = map.of_vnode[vf + sr * vs.s[i]];
                        if (row < 0) continue;
                        for (int sc = -1; sc <= 1; sc += 2) {
                            const long col = map.of_vnode[vf + sc * vs.s[j]];
                            if (col < 0) continue;
                            trips.emplace_back(row, col, c * sr * sc);
                        }
                    }
                }
            }
        }
    }
    Eigen::SparseMatrix<double> L(map.n, map.n);
    L.setFromTriplets(trips.begin(), trips.end());
    L.makeCompressed();
    return L;
}

void require_test_function(const ScalarField& phi) {
    const GridSpec& g = phi.grid;
    double maxabs = 0.0, bdry = 0.0;
    std::vector<int> iv(g.dim());
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            const auto slice = phi.v_slice(xf, k);
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                const double a = std::abs(slice[vf]);
                maxabs = std::max(maxabs, a);
                if (!v_interior(g, iv)) bdry = std::max(bdry, a);
            }
        }
    }
    if (bdry > 1e-12 * std::max(1.0, maxabs)) {
        throw std::invalid_argument(
            "test function must vanish on the velocity boundary (H^1_c class)");
    }
}

// iiint A grad_v a . grad_v b with the shared quadrature conventions.
double diffusion_form(const ScalarField& a, const ScalarField& b, const CoefficientField& A) {
    const GridSpec& g = a.grid;
    const int d = g.dim();
    const bool mixed = !A.is_diagonal();
    VStrides vs(g);
    double total = 0.0;
    std::vector<int> iv(d), ix(d);
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            const double wxt = g.xt_weight(ix, k);
            const auto sa = a.v_slice(xf, k);
            const auto sb = b.v_slice(xf, k);
            double acc = 0.0;
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                for (int ax = 0; ax < d; ++ax) {
                    if (iv[ax] + 1 >= g.n_v[ax]) continue;
                    const double a_face = harmonic(A.entry(g.node(vf, xf, k), ax, ax),
                                                   A.entry(g.node(vf + vs.s[ax], xf, k), ax, ax));
                    const double da = (sa[vf + vs.s[ax]] - sa[vf]) / g.h_v[ax];
                    const double db = (sb[vf + vs.s[ax]] - sb[vf]) / g.h_v[ax];
                    acc += face_weight(g, ax, iv) * a_face * da * db;
                }
                if (mixed && v_interior(g, iv)) {
                    const double wq = g.v_weight(iv);
                    const long node = g.node(vf, xf, k);
                    for (int i = 0; i < d; ++i) {
                        for (int j = 0; j < d; ++j) {
                            if (i == j) continue;
                            const double aij = A.entry(node, i, j);
                            if (aij == 0.0) continue;
                            const double dai = (sa[vf + vs.s[i]] - sa[vf - vs.s[i]]) / (2.0 * g.h_v[i]);
                            const double dbj = (sb[vf + vs.s[j]] - sb[vf - vs.s[j]]) / (2.0 * g.h_v[j]);
                            acc += wq * aij * dai * dbj;
                        }
                    }
                }
            }
            total += wxt * acc;
        }
    }
    return total;
}

// iint (f, phi) as the discrete L2 pairing.
double pairing(const ScalarField& f, const ScalarField& phi) {
    const GridSpec& g = f.grid;
    double total = 0.0;
    std::vector<int> iv(g.dim()), ix(g.dim());
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            const double wxt = g.xt_weight(ix, k);
            const auto sf = f.v_slice(xf, k);
            const auto sp = phi.v_slice(xf, k);
            double acc = 0.0;
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                acc += g.v_weight(iv) * sf[vf] * sp[vf];
            }
            total += wxt * acc;
        }
    }
    return total;
}

} // namespace

FluxCertificate recover_flux(const ScalarField& w, const ScalarField& f,
                             const CoefficientField& A) {
    const GridSpec& g = w.grid;
    if (!g.same_shape(f.grid) || !g.same_shape(A.grid)) {
        throw std::invalid_argument("recover_flux: field grids do not match");
    }
    const auto rep = verify_ellipticity(A);
    if (!rep.ok) {
        throw std::invalid_argument("recover_flux: coefficients fail ellipticity: " +
                                    rep.summary());
    }

    const int d = g.dim();
    const bool mixed = !A.is_diagonal();
    const ScalarField Yw = apply_Y(w);
    VInteriorMap map(g);
    VStrides vs(g);
    VRieszSolver riesz(g);

    FluxCertificate cert;
    cert.j = VFlux::zeros(g);

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    std::vector<double> phi(static_cast<size_t>(g.v_count()));
    std::vector<double> resid(static_cast<size_t>(g.v_count()));
    std::vector<int> iv(d), ix(d);
    double resid_sq = 0.0;

    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            const Eigen::SparseMatrix<double> L = slice_form(A, g, map, xf, k, mixed);
            lu.compute(L);
            if (lu.info() != Eigen::Success) {
                throw std::runtime_error("recover_flux: slice solve failed");
            }
            Eigen::VectorXd ell(map.n);
            {
                long i = 0;
                for (long vf = 0; vf < g.v_count(); ++vf) {
                    if (map.of_vnode[vf] >= 0) {
                        const long node = g.node(vf, xf, k);
                        ell[i] = map.weight[i] * (f.values[node] - Yw.values[node]);
                        ++i;
                    }
                }
            }
            const Eigen::VectorXd sol = lu.solve(-ell);

            std::fill(phi.begin(), phi.end(), 0.0);
            for (long vf = 0; vf < g.v_count(); ++vf) {
                if (map.of_vnode[vf] >= 0) phi[vf] = sol[map.of_vnode[vf]];
            }

            // Staggered gradient of phi.
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                for (int a = 0; a < d; ++a) {
                    if (iv[a] + 1 >= g.n_v[a]) continue;
                    cert.j.comp[a][cert.j.face_index(a, iv, xf, k)] =
                        (phi[vf + vs.s[a]] - phi[vf]) / g.h_v[a];
                }
            }

            // Divergence defect as a nodal density, measured in H^{-1}.
            const Eigen::VectorXd defect = L * sol + ell;
            std::fill(resid.begin(), resid.end(), 0.0);
            {
                long i = 0;
                for (long vf = 0; vf < g.v_count(); ++vf) {
                    if (map.of_vnode[vf] >= 0) {
                        resid[vf] = defect[i] / map.weight[i];
                        ++i;
                    }
                }
            }
            const double s = riesz.slice_hm1_norm(resid);
            resid_sq += g.xt_weight(ix, k) * s * s;
        }
    }
    cert.divergence_residual = std::sqrt(resid_sq);
    return cert;
}

double eval_J_pair(const ScalarField& u, const VFlux& j, const CoefficientField& A) {
    const GridSpec& g = u.grid;
    if (!g.same_shape(j.grid) || !g.same_shape(A.grid)) {
        throw std::invalid_argument("eval_J_pair: shapes do not match");
    }
    const int d = g.dim();
    const bool mixed = !A.is_diagonal();
    VStrides vs(g);
    double total = 0.0;
    std::vector<int> iv(d), ix(d);
    std::vector<double> rbar(d);
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            const double wxt = g.xt_weight(ix, k);
            const auto su = u.v_slice(xf, k);
            double acc = 0.0;
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                for (int a = 0; a < d; ++a) {
                    if (iv[a] + 1 >= g.n_v[a]) continue;
                    const double a_face = harmonic(A.entry(g.node(vf, xf, k), a, a),
                                                   A.entry(g.node(vf + vs.s[a], xf, k), a, a));
                    const double r = (su[vf + vs.s[a]] - su[vf]) / g.h_v[a] -
                                     j.comp[a][j.face_index(a, iv, xf, k)];
                    acc += 0.5 * face_weight(g, a, iv) * a_face * r * r;
                }
                if (mixed && v_interior(g, iv)) {
                    // Face-averaged residual at the node for the cross terms.
                    for (int a = 0; a < d; ++a) {
                        const double du = (su[vf + vs.s[a]] - su[vf - vs.s[a]]) / (2.0 * g.h_v[a]);
                        std::vector<int> iv_lo(iv.begin(), iv.end());
                        iv_lo[a] -= 1;
                        const double jl = j.comp[a][j.face_index(a, iv_lo, xf, k)];
                        const double jr = j.comp[a][j.face_index(a, iv, xf, k)];
                        rbar[a] = du - 0.5 * (jl + jr);
                    }
                    const double wq = g.v_weight(iv);
                    const long node = g.node(vf, xf, k);
                    for (int i = 0; i < d; ++i) {
                        for (int jj = 0; jj < d; ++jj) {
                            if (i == jj) continue;
                            acc += 0.5 * wq * A.entry(node, i, jj) * rbar[i] * rbar[jj];
                        }
                    }
                }
            }
            total += wxt * acc;
        }
    }
    return total;
}

double eval_J(const ScalarField& w, const ScalarField& f, const CoefficientField& A) {
    return eval_J_pair(w, recover_flux(w, f, A).j, A);
}

double weak_residual(const ScalarField& u, const ScalarField& f, const CoefficientField& A,
                     const ScalarField& phi) {
    if (!u.grid.same_shape(f.grid) || !u.grid.same_shape(phi.grid) ||
        !u.grid.same_shape(A.grid)) {
        throw std::invalid_argument("weak_residual: field grids do not match");
    }
    require_test_function(phi);
    const ScalarField Yu = apply_Y(u);
    ScalarField fm = f;
    for (size_t i = 0; i < fm.values.size(); ++i) fm.values[i] -= Yu.values[i];
    return diffusion_form(u, phi, A) + pairing(fm, phi);
}

double variational_inequality_gap(const ScalarField& u, const ScalarField& w,
                                  const ScalarField& f, const CoefficientField& A,
                                  const ScalarField& psi) {
    if (!u.grid.same_shape(w.grid) || !u.grid.same_shape(psi.grid)) {
        throw std::invalid_argument("variational_inequality_gap: field grids do not match");
    }
    for (size_t i = 0; i < w.values.size(); ++i) {
        if (w.values[i] < psi.values[i] - 1e-12) {
            throw std::invalid_argument(
                "variational_inequality_gap: competitor falls below the obstacle");
        }
    }
    ScalarField phi = w;
    for (size_t i = 0; i < phi.values.size(); ++i) phi.values[i] -= u.values[i];
    return weak_residual(u, f, A, phi);
}

bool is_nonneg_W(const ScalarField& w, const BoxDomain& region) {
    const GridSpec& g = w.grid;
    const double tol = 1e-12;
    std::vector<int> iv(g.dim()), ix(g.dim());
    for (int k = 0; k < g.n_t; ++k) {
        const double t = g.tcoord(k);
        if (t < region.t_lo - tol || t > region.t_hi + tol) continue;
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            bool in_x = true;
            for (int a = 0; a < g.dim(); ++a) {
                const double x = g.xcoord(a, ix[a]);
                in_x = in_x && x >= region.x_lo[a] - tol && x <= region.x_hi[a] + tol;
            }
            if (!in_x) continue;
            const auto slice = w.v_slice(xf, k);
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                bool in_v = true;
                for (int a = 0; a < g.dim(); ++a) {
                    const double v = g.vcoord(a, iv[a]);
                    in_v = in_v && v >= region.v_lo[a] - tol && v <= region.v_hi[a] + tol;
                }
                if (in_v && slice[vf] < -1e-12) return false;
            }
        }
    }
    return true;
}

} // namespace kfp
