#include "kfp/random_fields.hpp"

#include <cmath>

#include "kfp/rng.hpp"

namespace kfp {

ScalarField random_trig_field(const GridSpec& g, std::uint64_t seed, int n_modes,
                              bool vanish_v_boundary) {
    constexpr double kPi = 3.14159265358979323846264338327950288;
    const int d = g.dim();
    Rng rng(seed);

    struct Mode {
        double amp;
        std::vector<int> kv, kx;
        std::vector<double> phase_v, phase_x;
        int kt;
        double phase_t;
    };
    std::vector<Mode> modes(static_cast<size_t>(n_modes));
    for (auto& m : modes) {
        m.amp = rng.uniform(0.2, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        m.kv.resize(d);
        m.kx.resize(d);
        m.phase_v.resize(d);
        m.phase_x.resize(d);
        for (int a = 0; a < d; ++a) {
            m.kv[a] = 1 + static_cast<int>(rng.next_u64() % 3);
            m.kx[a] = 1 + static_cast<int>(rng.next_u64() % 3);
            m.phase_v[a] = rng.uniform(0.0, 2.0 * kPi);
            m.phase_x[a] = rng.uniform(0.0, 2.0 * kPi);
        }
        m.kt = 1 + static_cast<int>(rng.next_u64() % 2);
        m.phase_t = rng.uniform(0.0, 2.0 * kPi);
    }

    const BoxDomain& dom = g.dom;
    return ScalarField::sample(g, [&, modes](const Eigen::VectorXd& v, const Eigen::VectorXd& x,
                                             double t) {
        double total = 0.0;
        for (const auto& m : modes) {
            double val = m.amp;
            for (int a = 0; a < d; ++a) {
                const double vhat = (v[a] - dom.v_lo[a]) / (dom.v_hi[a] - dom.v_lo[a]);
                val *= vanish_v_boundary ? std::sin(kPi * m.kv[a] * vhat)
                                         : std::cos(kPi * m.kv[a] * vhat + m.phase_v[a]);
                const double xhat = (x[a] - dom.x_lo[a]) / (dom.x_hi[a] - dom.x_lo[a]);
                val *= std::cos(kPi * m.kx[a] * xhat + m.phase_x[a]);
            }
            const double that = (t - dom.t_lo) / (dom.t_hi - dom.t_lo);
            val *= std::cos(kPi * m.kt * that + m.phase_t);
            total += val;
        }
        return total;
    });
}

} // namespace kfp
