#include "kfp/coefficients.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kfp/rng.hpp"

namespace kfp {

bool CoefficientField::is_diagonal() const {
    const int dd = d();
    const long n = grid.total_nodes();
    for (long k = 0; k < n; ++k) {
        for (int i = 0; i < dd; ++i) {
            for (int j = 0; j < dd; ++j) {
                if (i != j && entry(k, i, j) != 0.0) return false;
            }
        }
    }
    return true;
}

CoefficientField CoefficientField::identity(const GridSpec& g) {
    CoefficientSpec spec;
    spec.kind = CoefficientSpec::Kind::Identity;
    return make_coefficients(spec, g);
}

std::string EllipticityReport::summary() const {
    std::ostringstream os;
    os << (ok ? "ok" : "FAILED") << ": spectrum [" << min_eigenvalue << ", " << max_eigenvalue
       << "] (worst nodes " << min_node << ", " << max_node << "), max asymmetry "
       << max_asymmetry;
    return os.str();
}

EllipticityReport verify_ellipticity(const CoefficientField& A) {
    const int d = A.d();
    const long n = A.grid.total_nodes();
    EllipticityReport rep;
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();
    rep.max_eigenvalue = -std::numeric_limits<double>::infinity();

    Eigen::MatrixXd m(d, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (long k = 0; k < n; ++k) {
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                m(i, j) = A.entry(k, i, j);
                rep.max_asymmetry =
                    std::max(rep.max_asymmetry, std::abs(A.entry(k, i, j) - A.entry(k, j, i)));
            }
        }
        if (d == 1) {
            const double e = m(0, 0);
            if (e < rep.min_eigenvalue) { rep.min_eigenvalue = e; rep.min_node = k; }
            if (e > rep.max_eigenvalue) { rep.max_eigenvalue = e; rep.max_node = k; }
        } else {
            es.compute((m + m.transpose()) / 2.0, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues().minCoeff();
            const double hi = es.eigenvalues().maxCoeff();
            if (lo < rep.min_eigenvalue) { rep.min_eigenvalue = lo; rep.min_node = k; }
            if (hi > rep.max_eigenvalue) { rep.max_eigenvalue = hi; rep.max_node = k; }
        }
    }
    const double eps = 1e-10;
    rep.ok = rep.max_asymmetry <= 1e-12 && rep.min_eigenvalue >= A.lambda - eps &&
             rep.max_eigenvalue <= A.Lambda + eps;
    return rep;
}

namespace {

void fill_matrix(CoefficientField& A, long node, const std::vector<double>& m) {
    const int d = A.d();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            A.entry(node, i, j) = m[static_cast<size_t>(i) * d + j];
        }
    }
}

// Random orthogonal matrix from a seeded Gaussian draw (QR with sign fix).
Eigen::MatrixXd random_orthogonal(int d, Rng& rng) {
    if (d == 1) return Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    return q;
}

std::pair<double, double> spectrum_of(const std::vector<double>& m, int d) {
    Eigen::MatrixXd mat(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) mat(i, j) = m[static_cast<size_t>(i) * d + j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

} // namespace

CoefficientField make_coefficients(const CoefficientSpec& spec, const GridSpec& g) {
    const int d = g.dim();
    const long n = g.total_nodes();
    CoefficientField A;
    A.grid = g;
    A.a.assign(static_cast<size_t>(n) * d * d, 0.0);

    switch (spec.kind) {
        case CoefficientSpec::Kind::Identity: {
            for (long k = 0; k < n; ++k) {
                for (int i = 0; i < d; ++i) A.entry(k, i, i) = 1.0;
            }
            A.lambda = A.Lambda = 1.0;
            break;
        }
        case CoefficientSpec::Kind::Diagonal: {
            if (static_cast<int>(spec.diag_values.size()) != d) {
                throw std::invalid_argument("make_coefficients: diagonal kind needs d values");
            }
            double lo = spec.diag_values[0], hi = spec.diag_values[0];
            for (double val : spec.diag_values) {
                if (!(val > 0.0)) {
                    throw std::invalid_argument("make_coefficients: diagonal values must be positive");
                }
                lo = std::min(lo, val);
                hi = std::max(hi, val);
            }
            for (long k = 0; k < n; ++k) {
                for (int i = 0; i < d; ++i) A.entry(k, i, i) = spec.diag_values[i];
            }
            A.lambda = lo;
            A.Lambda = hi;
            break;
        }
        case CoefficientSpec::Kind::Checkerboard: {
            const size_t dd = static_cast<size_t>(d) * d;
            if (spec.A1.size() != dd || spec.A2.size() != dd) {
                throw std::invalid_argument("make_coefficients: checkerboard needs two d x d matrices");
            }
            if (spec.period < 1) {
                throw std::invalid_argument("make_coefficients: checkerboard period must be >= 1");
            }
            const auto [lo1, hi1] = spectrum_of(spec.A1, d);
            const auto [lo2, hi2] = spectrum_of(spec.A2, d);
            if (!(std::min(lo1, lo2) > 0.0)) {
                throw std::invalid_argument("make_coefficients: checkerboard blocks must be SPD");
            }
            std::vector<int> iv(d), ix(d);
            for (int k = 0; k < g.n_t; ++k) {
                for (long xf = 0; xf < g.x_count(); ++xf) {
                    g.x_multi(xf, ix);
                    for (long vf = 0; vf < g.v_count(); ++vf) {
                        g.v_multi(vf, iv);
                        long parity = k / spec.period;
                        for (int a = 0; a < d; ++a) {
                            parity += iv[a] / spec.period + ix[a] / spec.period;
                        }
                        fill_matrix(A, g.node(vf, xf, k), (parity % 2 == 0) ? spec.A1 : spec.A2);
                    }
                }
            }
            A.lambda = std::min(lo1, lo2);
            A.Lambda = std::max(hi1, hi2);
            break;
        }
        case CoefficientSpec::Kind::RandomSpd: {
            if (!(spec.lambda > 0.0) || !(spec.Lambda >= spec.lambda)) {
                throw std::invalid_argument("make_coefficients: need 0 < lambda <= Lambda");
            }
            Rng rng(spec.seed);
            Eigen::VectorXd eigs(d);
            for (long k = 0; k < n; ++k) {
                for (int i = 0; i < d; ++i) eigs[i] = rng.uniform(spec.lambda, spec.Lambda);
                const Eigen::MatrixXd q = random_orthogonal(d, rng);
                Eigen::MatrixXd m = q * eigs.asDiagonal() * q.transpose();
                m = (m + m.transpose()) / 2.0;
                for (int i = 0; i < d; ++i) {
                    for (int j = 0; j < d; ++j) A.entry(k, i, j) = m(i, j);
                }
            }
            A.lambda = spec.lambda;
            A.Lambda = spec.Lambda;
            break;
        }
    }
    return A;
}

} // namespace kfp
