#include "kfp/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace kfp {

GridSpec GridSpec::make(const BoxDomain& dom, std::vector<int> n_v,
                        std::vector<int> n_x, int n_t) {
    dom.validate();
    const int d = dom.dim();
    if (static_cast<int>(n_v.size()) != d || static_cast<int>(n_x.size()) != d) {
        throw std::invalid_argument("GridSpec: node-count vectors must have length d");
    }
    for (int i = 0; i < d; ++i) {
        if (n_v[i] < 3 || n_x[i] < 3) {
            throw std::invalid_argument("GridSpec: grid axis below minimum 3");
        }
    }
    if (n_t < 3) throw std::invalid_argument("GridSpec: grid axis below minimum 3");

    GridSpec g;
    g.dom = dom;
    g.n_v = std::move(n_v);
    g.n_x = std::move(n_x);
    g.n_t = n_t;
    g.h_v.resize(d);
    g.h_x.resize(d);
    for (int i = 0; i < d; ++i) {
        g.h_v[i] = (dom.v_hi[i] - dom.v_lo[i]) / (g.n_v[i] - 1);
        g.h_x[i] = (dom.x_hi[i] - dom.x_lo[i]) / (g.n_x[i] - 1);
    }
    g.h_t = (dom.t_hi - dom.t_lo) / (n_t - 1);
    return g;
}

GridSpec GridSpec::cube(const BoxDomain& dom, int n) {
    const int d = dom.dim();
    return make(dom, std::vector<int>(d, n), std::vector<int>(d, n), n);
}

long GridSpec::v_count() const {
    long c = 1;
    for (int n : n_v) c *= n;
    return c;
}

long GridSpec::x_count() const {
    long c = 1;
    for (int n : n_x) c *= n;
    return c;
}

long GridSpec::v_flat(std::span<const int> iv) const {
    long f = 0, stride = 1;
    for (int a = 0; a < dim(); ++a) {
        f += stride * iv[a];
        stride *= n_v[a];
    }
    return f;
}

long GridSpec::x_flat(std::span<const int> ix) const {
    long f = 0, stride = 1;
    for (int a = 0; a < dim(); ++a) {
        f += stride * ix[a];
        stride *= n_x[a];
    }
    return f;
}

void GridSpec::v_multi(long flat, std::span<int> iv) const {
    for (int a = 0; a < dim(); ++a) {
        iv[a] = static_cast<int>(flat % n_v[a]);
        flat /= n_v[a];
    }
}

void GridSpec::x_multi(long flat, std::span<int> ix) const {
    for (int a = 0; a < dim(); ++a) {
        ix[a] = static_cast<int>(flat % n_x[a]);
        flat /= n_x[a];
    }
}

double GridSpec::v_weight(std::span<const int> iv) const {
    double w = 1.0;
    for (int a = 0; a < dim(); ++a) w *= v_axis_weight(a, iv[a]);
    return w;
}

double GridSpec::xt_weight(std::span<const int> ix, int k) const {
    double w = t_weight(k);
    for (int a = 0; a < dim(); ++a) w *= x_axis_weight(a, ix[a]);
    return w;
}

bool GridSpec::same_shape(const GridSpec& o) const {
    return n_v == o.n_v && n_x == o.n_x && n_t == o.n_t &&
           (dom.v_lo - o.dom.v_lo).cwiseAbs().maxCoeff() == 0.0 &&
           (dom.v_hi - o.dom.v_hi).cwiseAbs().maxCoeff() == 0.0 &&
           (dom.x_lo - o.dom.x_lo).cwiseAbs().maxCoeff() == 0.0 &&
           (dom.x_hi - o.dom.x_hi).cwiseAbs().maxCoeff() == 0.0 &&
           dom.t_lo == o.dom.t_lo && dom.t_hi == o.dom.t_hi;
}

ScalarField ScalarField::zeros(const GridSpec& g) {
    ScalarField f;
    f.grid = g;
    f.values.assign(static_cast<size_t>(g.total_nodes()), 0.0);
    return f;
}

ScalarField ScalarField::constant(const GridSpec& g, double c) {
    ScalarField f = zeros(g);
    std::fill(f.values.begin(), f.values.end(), c);
    return f;
}

ScalarField ScalarField::sample(
    const GridSpec& g,
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>& fn) {
    ScalarField f = zeros(g);
    const int d = g.dim();
    Eigen::VectorXd v(d), x(d);
    std::vector<int> iv(d), ix(d);
    long idx = 0;
    for (int k = 0; k < g.n_t; ++k) {
        const double t = g.tcoord(k);
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            for (int a = 0; a < d; ++a) x[a] = g.xcoord(a, ix[a]);
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                for (int a = 0; a < d; ++a) v[a] = g.vcoord(a, iv[a]);
                f.values[idx++] = fn(v, x, t);
            }
        }
    }
    return f;
}

VFlux VFlux::zeros(const GridSpec& g) {
    VFlux j;
    j.grid = g;
    j.comp.resize(g.dim());
    for (int a = 0; a < g.dim(); ++a) {
        long faces = 1;
        for (int b = 0; b < g.dim(); ++b) {
            faces *= (b == a) ? (g.n_v[b] - 1) : g.n_v[b];
        }
        j.comp[a].assign(static_cast<size_t>(faces * g.x_count() * g.n_t), 0.0);
    }
    return j;
}

long VFlux::face_count_v(int axis) const {
    long c = 1;
    for (int b = 0; b < grid.dim(); ++b) {
        c *= (b == axis) ? (grid.n_v[b] - 1) : grid.n_v[b];
    }
    return c;
}

long VFlux::face_flat(int axis, std::span<const int> iv) const {
    long f = 0, stride = 1;
    for (int b = 0; b < grid.dim(); ++b) {
        const int n = (b == axis) ? (grid.n_v[b] - 1) : grid.n_v[b];
        f += stride * iv[b];
        stride *= n;
    }
    return f;
}

void for_each_v(const GridSpec& g, const std::function<void(long, std::span<const int>)>& fn) {
    std::vector<int> iv(g.dim(), 0);
    for (long f = 0; f < g.v_count(); ++f) {
        fn(f, iv);
        for (int a = 0; a < g.dim(); ++a) {
            if (++iv[a] < g.n_v[a]) break;
            iv[a] = 0;
        }
    }
}

void for_each_x(const GridSpec& g, const std::function<void(long, std::span<const int>)>& fn) {
    std::vector<int> ix(g.dim(), 0);
    for (long f = 0; f < g.x_count(); ++f) {
        fn(f, ix);
        for (int a = 0; a < g.dim(); ++a) {
            if (++ix[a] < g.n_x[a]) break;
            ix[a] = 0;
        }
    }
}

} // namespace kfp
