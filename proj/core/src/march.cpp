#include "kfp/march.hpp"

#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>

namespace kfp {

namespace {

void require_instance(const CoefficientField& A, const ScalarField& f, const ScalarField& psi,
                      const ScalarField& gdata) {
    if (!f.grid.same_shape(A.grid) || !f.grid.same_shape(psi.grid) ||
        !f.grid.same_shape(gdata.grid)) {
        throw std::invalid_argument("march: field grids do not match");
    }
    const auto rep = verify_ellipticity(A);
    if (!rep.ok) {
        throw std::invalid_argument("march: coefficients fail ellipticity: " + rep.summary());
    }
}

// Write g into every data node of level k (k = 0: the whole level).
void impose_data(ScalarField& u, const ScalarField& gdata, int k) {
    const GridSpec& g = u.grid;
    std::vector<int> iv(g.dim()), ix(g.dim());
    for (long xf = 0; xf < g.x_count(); ++xf) {
        g.x_multi(xf, ix);
        for (long vf = 0; vf < g.v_count(); ++vf) {
            g.v_multi(vf, iv);
            if (k == 0 || is_data_node(g, iv, ix)) {
                u.at(vf, xf, k) = gdata.at(vf, xf, k);
            }
        }
    }
}

} // namespace

bool check_ordering(const ScalarField& psi, const ScalarField& gdata) {
    const GridSpec& g = psi.grid;
    if (!g.same_shape(gdata.grid)) {
        throw std::invalid_argument("check_ordering: field grids do not match");
    }
    std::vector<int> iv(g.dim()), ix(g.dim());
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                if (k == 0 || is_data_node(g, iv, ix)) {
                    if (gdata.at(vf, xf, k) - psi.at(vf, xf, k) < -1e-12) return false;
                }
            }
        }
    }
    return true;
}

MarchResult march(const CoefficientField& A, const ScalarField& f, const ScalarField& psi,
                  const ScalarField& gdata, const SolverConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    require_instance(A, f, psi, gdata);
    cfg.validate();
    if (!check_ordering(psi, gdata)) {
        throw OrderingError(
            "march: obstacle exceeds boundary data on the Kolmogorov boundary (psi <= g required)");
    }

    const GridSpec& g = f.grid;
    const long V = g.v_count();

    MarchResult out;
    out.u = ScalarField::zeros(g);
    impose_data(out.u, gdata, 0);

    SolveReport& rep = out.report;
    rep.method = cfg.method == SolverConfig::Method::Psor ? "psor" : "penalized";

    for (int k = 1; k < g.n_t; ++k) {
        impose_data(out.u, gdata, k);
        const auto prev = std::span<const double>(
            out.u.values.data() + g.node(0, 0, k - 1), static_cast<size_t>(V * g.x_count()));
        LcpSlice slice = build_time_step(A, k, f, psi, gdata, prev);
        rep.slice_dimension = std::max(rep.slice_dimension, slice.M.dim);

        LcpResult sol;
        if (cfg.method == SolverConfig::Method::Psor) {
            Eigen::VectorXd u0(slice.M.dim);
            for (long r = 0; r < slice.M.dim; ++r) {
                const auto [vf, xf] = slice.maps.nodes[r];
                u0[r] = std::max(prev[vf + V * xf], slice.psi[r]);
            }
            sol = solve_lcp_psor(slice, cfg, u0);
        } else {
            sol = solve_lcp_penalized(slice, cfg);
        }

        for (long r = 0; r < slice.M.dim; ++r) {
            const auto [vf, xf] = slice.maps.nodes[r];
            out.u.at(vf, xf, k) = sol.u[r];
        }
        rep.iterations.push_back(sol.iterations);
        rep.complementarity_residual =
            std::max(rep.complementarity_residual, sol.complementarity_residual);
        rep.linear_residual = std::max(rep.linear_residual, sol.linear_residual);
    }

    VRieszSolver riesz(g);
    rep.u_W = norm_W(out.u, riesz);
    rep.g_W = norm_W(gdata, riesz);
    rep.f_l2hm1 = norm_hm1_v(f, riesz);
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

ScalarField solve_dirichlet(const CoefficientField& A, const ScalarField& f,
                            const ScalarField& gdata) {
    require_instance(A, f, f, gdata);
    const GridSpec& g = f.grid;
    const long V = g.v_count();

    ScalarField u = ScalarField::zeros(g);
    impose_data(u, gdata, 0);

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    for (int k = 1; k < g.n_t; ++k) {
        impose_data(u, gdata, k);
        const auto prev = std::span<const double>(
            u.values.data() + g.node(0, 0, k - 1), static_cast<size_t>(V * g.x_count()));
        LcpSlice slice = build_time_step(A, k, f, f, gdata, prev);
        const Eigen::SparseMatrix<double> M = slice.M.mat;
        lu.compute(M);
        if (lu.info() != Eigen::Success) {
            throw SolverFailure("solve_dirichlet: singular slice system");
        }
        const Eigen::VectorXd sol = lu.solve(slice.q);
        for (long r = 0; r < slice.M.dim; ++r) {
            const auto [vf, xf] = slice.maps.nodes[r];
            u.at(vf, xf, k) = sol[r];
        }
    }
    return u;
}

} // namespace kfp
