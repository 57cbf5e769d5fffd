#include "kfp/stochastic.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "kfp/rng.hpp"

namespace kfp {

PathBatch simulate_paths(const Eigen::VectorXd& v0, const Eigen::VectorXd& x0, double t0,
                         double t1, int n_steps, long n_paths, std::uint64_t seed) {
    if (!(t1 > t0)) throw std::invalid_argument("simulate_paths: need t1 > t0");
    if (n_steps < 0 || n_paths < 1) {
        throw std::invalid_argument("simulate_paths: invalid path or step count");
    }
    const int d = static_cast<int>(v0.size());
    if (x0.size() != d || d < 1) {
        throw std::invalid_argument("simulate_paths: start dimensions do not match");
    }

    PathBatch batch;
    batch.d = d;
    batch.n_paths = n_paths;
    batch.n_steps = n_steps;
    batch.t0 = t0;
    batch.t1 = t1;
    batch.seed = seed;
    batch.V.resize(static_cast<size_t>(n_paths) * (n_steps + 1) * d);
    batch.X.resize(batch.V.size());

    const double dt = n_steps > 0 ? (t1 - t0) / n_steps : 0.0;
    // Cholesky factor of [[2 dt, dt^2], [dt^2, 2 dt^3/3]].
    const double l11 = std::sqrt(2.0 * dt);
    const double l21 = n_steps > 0 ? dt * dt / l11 : 0.0;
    const double l22 = std::sqrt(dt * dt * dt / 6.0);

    for (long p = 0; p < n_paths; ++p) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(p));
        for (int c = 0; c < d; ++c) {
            batch.V[batch.idx(p, 0, c)] = v0[c];
            batch.X[batch.idx(p, 0, c)] = x0[c];
        }
        for (int s = 1; s <= n_steps; ++s) {
            for (int c = 0; c < d; ++c) {
                const double z1 = rng.normal();
                const double z2 = rng.normal();
                const double vprev = batch.V[batch.idx(p, s - 1, c)];
                const double xprev = batch.X[batch.idx(p, s - 1, c)];
                batch.V[batch.idx(p, s, c)] = vprev + l11 * z1;
                batch.X[batch.idx(p, s, c)] = xprev + vprev * dt + l21 * z1 + l22 * z2;
            }
        }
    }
    return batch;
}

GaussHermite::GaussHermite(int order) {
    if (order < 1) throw std::invalid_argument("GaussHermite: order must be >= 1");
    // Golub-Welsch on the Hermite Jacobi matrix, then rescale to the
    // standard-normal weight.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = std::sqrt(k / 2.0);
        J(k - 1, k) = b;
        J(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(order);
    weights.resize(order);
    for (int i = 0; i < order; ++i) {
        nodes[i] = std::sqrt(2.0) * es.eigenvalues()[i];
        const double q0 = es.eigenvectors()(0, i);
        weights[i] = q0 * q0; // already normalized: sum = 1
    }
}

double interp_vx(const VxGrid& g, const std::vector<double>& values, double v, double x) {
    const double fv = std::clamp((v - g.v_lo) / g.hv(), 0.0, static_cast<double>(g.n_v - 1));
    const double fx = std::clamp((x - g.x_lo) / g.hx(), 0.0, static_cast<double>(g.n_x - 1));
    const int i = std::min(static_cast<int>(fv), g.n_v - 2);
    const int j = std::min(static_cast<int>(fx), g.n_x - 2);
    const double av = fv - i, ax = fx - j;
    return (1 - av) * (1 - ax) * values[g.at(i, j)] + av * (1 - ax) * values[g.at(i + 1, j)] +
           (1 - av) * ax * values[g.at(i, j + 1)] + av * ax * values[g.at(i + 1, j + 1)];
}

DpResult value_by_dynamic_programming(const std::function<double(double, double)>& payoff,
                                      const VxGrid& grid, double horizon, int n_steps,
                                      int gh_order) {
    if (!(horizon > 0.0) || n_steps < 1) {
        throw std::invalid_argument("value_by_dynamic_programming: invalid horizon/steps");
    }
    constexpr double kClip = 1e12;

    DpResult dp;
    dp.grid = grid;
    dp.horizon = horizon;
    dp.n_steps = n_steps;
    dp.level.resize(n_steps + 1);

    std::vector<double> psi(static_cast<size_t>(grid.nodes()));
    for (int j = 0; j < grid.n_x; ++j) {
        for (int i = 0; i < grid.n_v; ++i) {
            double p = payoff(grid.v(i), grid.x(j));
            if (std::abs(p) > kClip) {
                p = std::copysign(kClip, p);
                dp.payoff_clipped = true;
            }
            psi[grid.at(i, j)] = p;
        }
    }
    dp.level[0] = psi;

    const double dt = horizon / n_steps;
    const double l11 = std::sqrt(2.0 * dt);
    const double l21 = dt * dt / l11;
    const double l22 = std::sqrt(dt * dt * dt / 6.0);
    const GaussHermite gh(gh_order);

    std::vector<double> next(psi.size());
    for (int m = 1; m <= n_steps; ++m) {
        const std::vector<double>& prev = dp.level[m - 1];
        for (int j = 0; j < grid.n_x; ++j) {
            const double x = grid.x(j);
            for (int i = 0; i < grid.n_v; ++i) {
                const double v = grid.v(i);
                double expect = 0.0;
                for (int a = 0; a < gh.nodes.size(); ++a) {
                    const double z1 = gh.nodes[a];
                    const double vn = v + l11 * z1;
                    const double xbase = x + v * dt + l21 * z1;
                    double inner = 0.0;
                    for (int b = 0; b < gh.nodes.size(); ++b) {
                        inner += gh.weights[b] * interp_vx(grid, prev, vn, xbase + l22 * gh.nodes[b]);
                    }
                    expect += gh.weights[a] * inner;
                }
                next[grid.at(i, j)] = std::max(psi[grid.at(i, j)], expect);
            }
        }
        dp.level[m] = next;
    }
    return dp;
}

namespace {

// Total-degree monomial basis in scaled (v, x).
void fill_basis_row(Eigen::RowVectorXd& row, double v, double x, int degree) {
    int c = 0;
    for (int total = 0; total <= degree; ++total) {
        for (int i = 0; i <= total; ++i) {
            row[c++] = std::pow(v, total - i) * std::pow(x, i);
        }
    }
}

int basis_size(int degree) { return (degree + 1) * (degree + 2) / 2; }

} // namespace

StoppingValue lsmc_value(const std::function<double(double, double)>& payoff, double v0,
                         double x0, double horizon, int n_steps, long n_paths,
                         int basis_degree, std::uint64_t seed) {
    if (basis_degree < 1) throw std::invalid_argument("lsmc_value: basis_degree must be >= 1");
    if (n_steps < 1 || n_paths < 2) {
        throw std::invalid_argument("lsmc_value: need n_steps >= 1 and n_paths >= 2");
    }
    Eigen::VectorXd v0v(1), x0v(1);
    v0v[0] = v0;
    x0v[0] = x0;
    const PathBatch paths = simulate_paths(v0v, x0v, 0.0, horizon, n_steps, n_paths, seed);

    // Scale regressors to O(1) for conditioning.
    const double vscale = std::max(1.0, std::sqrt(2.0 * horizon));
    const double xscale = std::max({1.0, std::abs(x0), std::sqrt(2.0 * horizon * horizon * horizon / 3.0)});

    std::vector<double> cash(static_cast<size_t>(n_paths));
    for (long p = 0; p < n_paths; ++p) {
        cash[p] = payoff(paths.v_at(p, n_steps), paths.x_at(p, n_steps));
    }

    StoppingValue out;
    out.n_paths = n_paths;
    out.effective_degree = basis_degree;

    for (int s = n_steps - 1; s >= 1; --s) {
        std::vector<long> itm;
        for (long p = 0; p < n_paths; ++p) {
            if (payoff(paths.v_at(p, s), paths.x_at(p, s)) > 0.0) itm.push_back(p);
        }
        if (itm.size() < 2) continue;

        int degree = out.effective_degree;
        Eigen::VectorXd coeffs;
        while (degree >= 1) {
            const int nb = basis_size(degree);
            if (static_cast<long>(itm.size()) < nb) {
                --degree;
                continue;
            }
            Eigen::MatrixXd B(itm.size(), nb);
            Eigen::VectorXd y(itm.size());
            Eigen::RowVectorXd row(nb);
            for (size_t r = 0; r < itm.size(); ++r) {
                const long p = itm[r];
                fill_basis_row(row, paths.v_at(p, s) / vscale, paths.x_at(p, s) / xscale, degree);
                B.row(r) = row;
                y[r] = cash[p];
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
            if (qr.rank() < nb) {
                --degree;
                continue;
            }
            coeffs = qr.solve(y);
            break;
        }
        if (degree < 1) continue;
        out.effective_degree = std::min(out.effective_degree, degree);

        const int nb = basis_size(degree);
        Eigen::RowVectorXd row(nb);
        for (const long p : itm) {
            fill_basis_row(row, paths.v_at(p, s) / vscale, paths.x_at(p, s) / xscale, degree);
            const double continuation = row.dot(coeffs);
            const double exercise = payoff(paths.v_at(p, s), paths.x_at(p, s));
            if (exercise >= continuation) cash[p] = exercise;
        }
    }

    double mean = 0.0;
    for (long p = 0; p < n_paths; ++p) mean += cash[p];
    mean /= static_cast<double>(n_paths);
    double var = 0.0;
    for (long p = 0; p < n_paths; ++p) var += (cash[p] - mean) * (cash[p] - mean);
    var /= static_cast<double>(n_paths - 1);

    const double immediate = payoff(v0, x0);
    if (immediate >= mean) {
        out.value = immediate;
        out.standard_error = 0.0;
    } else {
        out.value = mean;
        out.standard_error = std::sqrt(var / static_cast<double>(n_paths));
    }
    return out;
}

GapReport compare_with_pde(const ScalarField& u_pde, const DpResult& oracle,
                           const BoxDomain& probe, double tolerance) {
    const GridSpec& g = u_pde.grid;
    if (g.dim() != 1) throw std::invalid_argument("compare_with_pde: oracle comparison is d = 1");

    GapReport rep;
    rep.tolerance = tolerance;
    const int k = g.n_t - 1;
    double sum = 0.0;
    for (long xf = 0; xf < g.x_count(); ++xf) {
        const double x = g.xcoord(0, xf);
        if (x < probe.x_lo[0] || x > probe.x_hi[0]) continue;
        for (long vf = 0; vf < g.v_count(); ++vf) {
            const double v = g.vcoord(0, vf);
            if (v < probe.v_lo[0] || v > probe.v_hi[0]) continue;
            const double dp_val = interp_vx(oracle.grid, oracle.value(), v, x);
            const double gap = std::abs(u_pde.at(vf, xf, k) - dp_val);
            rep.max_abs_gap = std::max(rep.max_abs_gap, gap);
            sum += gap;
            ++rep.n_probe_nodes;
        }
    }
    rep.mean_abs_gap = rep.n_probe_nodes > 0 ? sum / rep.n_probe_nodes : 0.0;
    rep.pass = rep.max_abs_gap <= tolerance;
    return rep;
}

OracleComparison run_pde_vs_dp(const OraclePipeline& p) {
    const GridSpec& g = p.pde_grid;
    if (g.dim() != 1) throw std::invalid_argument("run_pde_vs_dp: pipeline is d = 1");
    const double horizon = g.dom.t_hi - g.dom.t_lo;

    OracleComparison out;
    // The DP and PDE time steps coincide, so DP level m is the value with m
    // steps to maturity and PDE level m is the value at elapsed time m h_t
    // in the time-to-horizon convention.
    out.dp = value_by_dynamic_programming(p.payoff, p.dp_grid, horizon, g.n_t - 1, p.gh_order);

    const CoefficientField A = CoefficientField::identity(g);
    const ScalarField f = ScalarField::zeros(g);
    const ScalarField psi = ScalarField::sample(
        g, [&](const Eigen::VectorXd& v, const Eigen::VectorXd& x, double) {
            return p.payoff(v[0], x[0]);
        });
    ScalarField gdata = ScalarField::zeros(g);
    for (int k = 0; k < g.n_t; ++k) {
        const auto& level = out.dp.level[k];
        for (long xf = 0; xf < g.x_count(); ++xf) {
            for (long vf = 0; vf < g.v_count(); ++vf) {
                gdata.at(vf, xf, k) =
                    interp_vx(p.dp_grid, level, g.vcoord(0, vf), g.xcoord(0, xf));
            }
        }
    }

    out.pde = march(A, f, psi, gdata, p.solver);
    out.gap = compare_with_pde(out.pde.u, out.dp, p.probe, p.tolerance);
    return out;
}

} // namespace kfp
