#include "kfp/field_ops.hpp"

#include <stdexcept>

namespace kfp {

ScalarField apply_Y(const ScalarField& u) {
    const GridSpec& g = u.grid;
    const int d = g.dim();
    for (int a = 0; a < d; ++a) {
        if (g.n_x[a] < 2) throw std::invalid_argument("apply_Y: need >= 2 nodes per x axis");
    }
    if (g.n_t < 2) throw std::invalid_argument("apply_Y: need >= 2 time levels");

    ScalarField out = ScalarField::zeros(g);
    const long V = g.v_count();
    const long X = g.x_count();

    // Strides of one step along x axis a, in x-flat numbering.
    std::vector<long> x_stride(d);
    {
        long s = 1;
        for (int a = 0; a < d; ++a) {
            x_stride[a] = s;
            s *= g.n_x[a];
        }
    }

    std::vector<int> iv(d), ix(d);
    for (int k = 0; k < g.n_t; ++k) {
        const int kb = (k >= 1) ? k : 1; // backward difference, forward fallback at k=0
        for (long xf = 0; xf < X; ++xf) {
            g.x_multi(xf, ix);
            for (long vf = 0; vf < V; ++vf) {
                g.v_multi(vf, iv);
                const long node = g.node(vf, xf, k);

                double transport = 0.0;
                for (int a = 0; a < d; ++a) {
                    const double vel = g.vcoord(a, iv[a]);
                    if (vel == 0.0) continue;
                    const long s = x_stride[a] * V;
                    long hi_node, lo_node;
                    if (vel > 0.0) {
                        if (ix[a] + 1 < g.n_x[a]) { hi_node = node + s; lo_node = node; }
                        else { hi_node = node; lo_node = node - s; }
                    } else {
                        if (ix[a] >= 1) { hi_node = node; lo_node = node - s; }
                        else { hi_node = node + s; lo_node = node; }
                    }
                    transport += vel * (u.values[hi_node] - u.values[lo_node]) / g.h_x[a];
                }

                const long tstep = X * V;
                const double dudt =
                    (u.values[g.node(vf, xf, kb)] - u.values[g.node(vf, xf, kb) - tstep]) / g.h_t;

                out.values[node] = transport - dudt;
            }
        }
    }
    return out;
}

} // namespace kfp
