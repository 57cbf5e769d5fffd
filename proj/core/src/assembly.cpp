#include "kfp/assembly.hpp"

#include <cmath>
#include <stdexcept>

namespace kfp {

RowStructure row_structure(const SparseOperator& op) {
    RowStructure rs;
    rs.min_diagonal = std::numeric_limits<double>::infinity();
    rs.max_offdiagonal = -std::numeric_limits<double>::infinity();
    rs.min_dominance = std::numeric_limits<double>::infinity();
    for (long r = 0; r < op.dim; ++r) {
        double diag = 0.0, off_abs = 0.0, off_max = -std::numeric_limits<double>::infinity();
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(op.mat, r); it; ++it) {
            if (it.col() == r) {
                diag += it.value();
            } else {
                off_abs += std::abs(it.value());
                off_max = std::max(off_max, it.value());
            }
        }
        rs.min_diagonal = std::min(rs.min_diagonal, diag);
        rs.max_offdiagonal = std::max(rs.max_offdiagonal, off_max);
        rs.min_dominance = std::min(rs.min_dominance, diag - off_abs);
    }
    return rs;
}

bool is_data_node(const GridSpec& g, std::span<const int> iv, std::span<const int> ix) {
    for (int a = 0; a < g.dim(); ++a) {
        if (iv[a] == 0 || iv[a] == g.n_v[a] - 1) return true;
    }
    for (int a = 0; a < g.dim(); ++a) {
        const double vel = g.vcoord(a, iv[a]);
        if (vel > 0.0 && ix[a] == g.n_x[a] - 1) return true;
        if (vel < 0.0 && ix[a] == 0) return true;
    }
    return false;
}

SliceMaps build_slice_maps(const GridSpec& g) {
    const long V = g.v_count();
    const long X = g.x_count();
    SliceMaps m;
    m.unknown_of.assign(static_cast<size_t>(V * X), -1);
    std::vector<int> iv(g.dim()), ix(g.dim());
    for (long xf = 0; xf < X; ++xf) {
        g.x_multi(xf, ix);
        for (long vf = 0; vf < V; ++vf) {
            g.v_multi(vf, iv);
            if (!is_data_node(g, iv, ix)) {
                m.unknown_of[vf + V * xf] = m.n_unknown++;
                m.nodes.emplace_back(vf, xf);
            }
        }
    }
    return m;
}

namespace {

// Map covering interior-v x all-x, used by the standalone operators.
SliceMaps build_vinterior_maps(const GridSpec& g) {
    const long V = g.v_count();
    const long X = g.x_count();
    SliceMaps m;
    m.unknown_of.assign(static_cast<size_t>(V * X), -1);
    std::vector<int> iv(g.dim()), ix(g.dim());
    for (long xf = 0; xf < X; ++xf) {
        for (long vf = 0; vf < V; ++vf) {
            g.v_multi(vf, iv);
            bool interior = true;
            for (int a = 0; a < g.dim(); ++a) {
                interior = interior && iv[a] > 0 && iv[a] < g.n_v[a] - 1;
            }
            if (interior) {
                m.unknown_of[vf + V * xf] = m.n_unknown++;
                m.nodes.emplace_back(vf, xf);
            }
        }
    }
    return m;
}

double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

struct Strides {
    std::vector<long> v;  // v-flat stride per axis
    std::vector<long> x;  // x-flat stride per axis
};

Strides make_strides(const GridSpec& g) {
    Strides s;
    s.v.resize(g.dim());
    s.x.resize(g.dim());
    long sv = 1, sx = 1;
    for (int a = 0; a < g.dim(); ++a) {
        s.v[a] = sv;
        sv *= g.n_v[a];
        s.x[a] = sx;
        sx *= g.n_x[a];
    }
    return s;
}

/// Assembler accumulating triplets for unknown columns and folding Dirichlet
/// columns into q (q may be null for the standalone operators, which simply
/// drop the data columns).
struct SliceAssembler {
    const GridSpec& g;
    const SliceMaps& maps;
    Strides strides;
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd* q = nullptr;
    const ScalarField* gdata = nullptr;
    int k = 0;

    SliceAssembler(const GridSpec& g_, const SliceMaps& maps_)
        : g(g_), maps(maps_), strides(make_strides(g_)) {}

    void add(long row, long iv_col, long ix_col, double value) {
        const long sn = iv_col + g.v_count() * ix_col;
        const long col = maps.unknown_of[sn];
        if (col >= 0) {
            trips.emplace_back(row, col, value);
        } else if (q != nullptr) {
            (*q)[row] -= value * gdata->at(iv_col, ix_col, k);
        }
    }

    void add_diffusion(const CoefficientField& A, int time_index, bool mixed);
    void add_transport(double sign);
};

void SliceAssembler::add_diffusion(const CoefficientField& A, int time_index, bool mixed) {
    const int d = g.dim();
    std::vector<int> iv(d), ix(d);
    for (long r = 0; r < maps.n_unknown; ++r) {
        const auto [vf, xf] = maps.nodes[r];
        g.v_multi(vf, iv);
        g.x_multi(xf, ix);
        const long node = g.node(vf, xf, time_index);

        double diag = 0.0;
        for (int a = 0; a < d; ++a) {
            for (int side = -1; side <= 1; side += 2) {
                const long nb_v = vf + side * strides.v[a];
                const long nb_node = g.node(nb_v, xf, time_index);
                const double a_face = harmonic(A.entry(node, a, a), A.entry(nb_node, a, a));
                const double c = a_face / (g.h_v[a] * g.h_v[a]);
                diag += c;
                add(r, nb_v, xf, -c);
            }
        }
        trips.emplace_back(r, r, diag);

        if (!mixed) continue;
        // Centered cross stencils for the off-diagonal entries of A; the
        // quadrature node must itself be v-interior.
        for (int j = 0; j < d; ++j) {
            for (int sigma = -1; sigma <= 1; sigma += 2) {
                const int quad_ivj = iv[j] - sigma;
                if (quad_ivj <= 0 || quad_ivj >= g.n_v[j] - 1) continue;
                const long quad_v = vf - sigma * strides.v[j];
                bool quad_interior = true;
                {
                    std::vector<int> qiv(d);
                    g.v_multi(quad_v, qiv);
                    for (int b = 0; b < d; ++b) {
                        quad_interior = quad_interior && qiv[b] > 0 && qiv[b] < g.n_v[b] - 1;
                    }
                }
                if (!quad_interior) continue;
                const long quad_node = g.node(quad_v, xf, time_index);
                for (int i = 0; i < d; ++i) {
                    if (i == j) continue;
                    const double aij = A.entry(quad_node, i, j);
                    if (aij == 0.0) continue;
                    const double c = sigma * aij / (4.0 * g.h_v[i] * g.h_v[j]);
                    add(r, quad_v + strides.v[i], xf, c);
                    add(r, quad_v - strides.v[i], xf, -c);
                }
            }
        }
    }
}

void SliceAssembler::add_transport(double sign) {
    const int d = g.dim();
    std::vector<int> iv(d), ix(d);
    for (long r = 0; r < maps.n_unknown; ++r) {
        const auto [vf, xf] = maps.nodes[r];
        g.v_multi(vf, iv);
        g.x_multi(xf, ix);
        for (int a = 0; a < d; ++a) {
            const double vel = g.vcoord(a, iv[a]);
            if (vel == 0.0) continue;
            long hi_x, lo_x;
            if (vel > 0.0) {
                if (ix[a] + 1 < g.n_x[a]) { hi_x = xf + strides.x[a]; lo_x = xf; }
                else { hi_x = xf; lo_x = xf - strides.x[a]; }
            } else {
                if (ix[a] >= 1) { hi_x = xf; lo_x = xf - strides.x[a]; }
                else { hi_x = xf + strides.x[a]; lo_x = xf; }
            }
            const double c = sign * vel / g.h_x[a];
            add(r, vf, hi_x, c);
            add(r, vf, lo_x, -c);
        }
    }
}

SparseOperator finish(long dim, std::vector<Eigen::Triplet<double>>& trips) {
    SparseOperator op;
    op.dim = dim;
    op.mat.resize(dim, dim);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    return op;
}

} // namespace

SparseOperator assemble_diffusion(const CoefficientField& A, int time_index) {
    const auto rep = verify_ellipticity(A);
    if (!rep.ok) {
        throw std::invalid_argument("assemble_diffusion: coefficients fail ellipticity: " +
                                    rep.summary());
    }
    const GridSpec& g = A.grid;
    SliceMaps maps = build_vinterior_maps(g);
    SliceAssembler asmbl(g, maps);
    asmbl.add_diffusion(A, time_index, !A.is_diagonal());
    return finish(maps.n_unknown, asmbl.trips);
}

SparseOperator assemble_transport(const GridSpec& g) {
    SliceMaps maps = build_vinterior_maps(g);
    SliceAssembler asmbl(g, maps);
    asmbl.add_transport(+1.0);
    return finish(maps.n_unknown, asmbl.trips);
}

LcpSlice build_time_step(const CoefficientField& A, int time_index,
                         const ScalarField& f, const ScalarField& psi,
                         const ScalarField& gdata,
                         std::span<const double> prev_level) {
    const GridSpec& g = f.grid;
    if (!g.same_shape(A.grid) || !g.same_shape(psi.grid) || !g.same_shape(gdata.grid)) {
        throw std::invalid_argument("build_time_step: field grids do not match");
    }
    if (time_index < 1 || time_index >= g.n_t) {
        throw std::invalid_argument("build_time_step: time index needs a previous level");
    }

    LcpSlice s;
    s.time_index = time_index;
    s.maps = build_slice_maps(g);
    s.q = Eigen::VectorXd::Zero(s.maps.n_unknown);
    s.psi.resize(s.maps.n_unknown);

    SliceAssembler asmbl(g, s.maps);
    asmbl.q = &s.q;
    asmbl.gdata = &gdata;
    asmbl.k = time_index;

    asmbl.add_diffusion(A, time_index, !A.is_diagonal());
    asmbl.add_transport(-1.0);

    const double inv_ht = 1.0 / g.h_t;
    const long V = g.v_count();
    for (long r = 0; r < s.maps.n_unknown; ++r) {
        const auto [vf, xf] = s.maps.nodes[r];
        asmbl.trips.emplace_back(r, r, inv_ht);
        s.q[r] += prev_level[vf + V * xf] * inv_ht - f.at(vf, xf, time_index);
        s.psi[r] = psi.at(vf, xf, time_index);
    }
    s.M = finish(s.maps.n_unknown, asmbl.trips);
    return s;
}

} // namespace kfp
