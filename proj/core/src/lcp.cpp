#include "kfp/lcp.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace kfp {

void SolverConfig::validate() const {
    if (!(omega > 0.0 && omega < 2.0)) {
        throw std::invalid_argument("SolverConfig: omega must lie in (0, 2)");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
    if (!(epsilon_penalty > 0.0)) {
        throw std::invalid_argument("SolverConfig: epsilon_penalty must be positive");
    }
    if (newton_max < 1) throw std::invalid_argument("SolverConfig: newton_max must be >= 1");
}

double complementarity_residual(const LcpSlice& s, const Eigen::VectorXd& u) {
    const Eigen::VectorXd r = s.M.mat * u - s.q;
    double worst = 0.0;
    for (long i = 0; i < s.M.dim; ++i) {
        worst = std::max(worst, std::abs(std::min(r[i], u[i] - s.psi[i])));
    }
    return worst;
}

namespace {

double linear_residual_inactive(const LcpSlice& s, const Eigen::VectorXd& u, double tol) {
    const Eigen::VectorXd r = s.M.mat * u - s.q;
    double worst = 0.0;
    for (long i = 0; i < s.M.dim; ++i) {
        if (u[i] > s.psi[i] + tol) worst = std::max(worst, std::abs(r[i]));
    }
    return worst;
}

} // namespace

LcpResult solve_lcp_psor(const LcpSlice& s, const SolverConfig& cfg, const Eigen::VectorXd& u0) {
    cfg.validate();
    const long n = s.M.dim;
    if (u0.size() != n) throw std::invalid_argument("solve_lcp_psor: bad start vector size");
    for (long i = 0; i < n; ++i) {
        if (u0[i] < s.psi[i] - 1e-12) {
            throw std::invalid_argument("solve_lcp_psor: start vector below obstacle");
        }
    }

    LcpResult res;
    res.u = u0.cwiseMax(s.psi);
    Eigen::VectorXd& u = res.u;
    const long max_iter = cfg.effective_max_iter(n);

    for (long sweep = 1; sweep <= max_iter; ++sweep) {
        for (long i = 0; i < n; ++i) {
            double diag = 0.0, sum = 0.0;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(s.M.mat, i); it;
                 ++it) {
                if (it.col() == i) diag += it.value();
                else sum += it.value() * u[it.col()];
            }
            const double gs = (s.q[i] - sum) / diag;
            u[i] = std::max(s.psi[i], u[i] + cfg.omega * (gs - u[i]));
        }
        res.iterations = sweep;
        res.complementarity_residual = complementarity_residual(s, u);
        if (res.complementarity_residual <= cfg.tol) {
            res.linear_residual = linear_residual_inactive(s, u, cfg.tol);
            return res;
        }
    }
    throw SolverFailure("PSOR did not converge in " + std::to_string(max_iter) +
                        " sweeps (residual " + std::to_string(res.complementarity_residual) +
                        " > tol " + std::to_string(cfg.tol) + ")");
}

LcpResult solve_lcp_penalized(const LcpSlice& s, const SolverConfig& cfg) {
    cfg.validate();
    const long n = s.M.dim;
    const double inv_eps = 1.0 / cfg.epsilon_penalty;

    Eigen::SparseMatrix<double> base = s.M.mat;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(base);
    if (lu.info() != Eigen::Success) {
        throw SolverFailure("penalized solve: singular unconstrained system");
    }

    LcpResult res;
    res.u = lu.solve(s.q);
    Eigen::VectorXd& u = res.u;

    std::vector<char> active(static_cast<size_t>(n), 0);
    const double scale = 1.0 + s.q.cwiseAbs().maxCoeff();

    for (int it = 1; it <= cfg.newton_max; ++it) {
        bool changed = false;
        for (long i = 0; i < n; ++i) {
            const char a = u[i] - s.psi[i] < 0.0 ? 1 : 0;
            if (a != active[i]) changed = true;
            active[i] = a;
        }

        // Penalty residual of the current iterate.
        Eigen::VectorXd F = s.M.mat * u - s.q;
        for (long i = 0; i < n; ++i) {
            if (u[i] - s.psi[i] < 0.0) F[i] += inv_eps * (u[i] - s.psi[i]);
        }
        res.iterations = it;
        if (!changed && F.cwiseAbs().maxCoeff() <= cfg.tol * scale) break;
        if (it == cfg.newton_max) {
            throw SolverFailure("penalized solve: Newton did not converge in " +
                                std::to_string(cfg.newton_max) + " iterations");
        }

        Eigen::SparseMatrix<double> J = base;
        Eigen::VectorXd rhs = s.q;
        for (long i = 0; i < n; ++i) {
            if (active[i]) {
                J.coeffRef(i, i) += inv_eps;
                rhs[i] += inv_eps * s.psi[i];
            }
        }
        lu.compute(J);
        if (lu.info() != Eigen::Success) {
            throw SolverFailure("penalized solve: singular Newton system");
        }
        u = lu.solve(rhs);
    }

    res.complementarity_residual = complementarity_residual(s, u);
    res.linear_residual = linear_residual_inactive(s, u, cfg.tol);
    return res;
}

} // namespace kfp
