#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kfp/grid.hpp"

namespace kfp {

/// Per-node symmetric d x d diffusion matrix with declared spectral bounds.
///
/// Coefficients are merely measurable: no continuity between nodes is
/// assumed anywhere downstream. Assembly averages them harmonically onto
/// staggered faces.
struct CoefficientField {
    GridSpec grid;
    double lambda = 1.0;
    double Lambda = 1.0;
    /// Row-major d x d block per node, node-major layout.
    std::vector<double> a;

    int d() const { return grid.dim(); }
    double entry(long node, int i, int j) const {
        return a[static_cast<size_t>(node) * d() * d() + i * d() + j];
    }
    double& entry(long node, int i, int j) {
        return a[static_cast<size_t>(node) * d() * d() + i * d() + j];
    }
    bool is_diagonal() const;

    static CoefficientField identity(const GridSpec& g);
};

struct EllipticityReport {
    bool ok = false;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    long min_node = -1;
    long max_node = -1;
    double max_asymmetry = 0.0;
    std::string summary() const;
};

/// Checks symmetry (tol 1e-12) and that every nodal spectrum lies in
/// [lambda - 1e-10, Lambda + 1e-10]. Never throws; failures are reported.
EllipticityReport verify_ellipticity(const CoefficientField& A);

struct CoefficientSpec {
    enum class Kind { Identity, Diagonal, Checkerboard, RandomSpd };
    Kind kind = Kind::Identity;
    /// Diagonal kind: d values.
    std::vector<double> diag_values;
    /// Checkerboard kind: two row-major d x d matrices and a cell period.
    std::vector<double> A1, A2;
    int period = 1;
    /// RandomSpd kind: spectrum bounds and seed.
    double lambda = 1.0;
    double Lambda = 1.0;
    std::uint64_t seed = 0;
};

/// Build a coefficient field; the result always passes verify_ellipticity.
/// Throws std::invalid_argument on inconsistent parameters.
CoefficientField make_coefficients(const CoefficientSpec& spec, const GridSpec& g);

} // namespace kfp
