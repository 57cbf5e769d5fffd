#include "kfp/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace kfp {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_field_csv(const std::string& path, const ScalarField& u) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const GridSpec& g = u.grid;
    const int d = g.dim();

    for (int a = 0; a < d; ++a) out << "v" << (a + 1) << ",";
    for (int a = 0; a < d; ++a) out << "x" << (a + 1) << ",";
    out << "t,value\n";

    std::vector<int> iv(d), ix(d);
    for (int k = 0; k < g.n_t; ++k) {
        for (long xf = 0; xf < g.x_count(); ++xf) {
            g.x_multi(xf, ix);
            for (long vf = 0; vf < g.v_count(); ++vf) {
                g.v_multi(vf, iv);
                for (int a = 0; a < d; ++a) out << format_g17(g.vcoord(a, iv[a])) << ",";
                for (int a = 0; a < d; ++a) out << format_g17(g.xcoord(a, ix[a])) << ",";
                out << format_g17(g.tcoord(k)) << "," << format_g17(u.at(vf, xf, k)) << "\n";
            }
        }
    }
}

void write_vx_csv(const std::string& path, const VxGrid& g, const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "v1,x1,value\n";
    for (int j = 0; j < g.n_x; ++j) {
        for (int i = 0; i < g.n_v; ++i) {
            out << format_g17(g.v(i)) << "," << format_g17(g.x(j)) << ","
                << format_g17(values[g.at(i, j)]) << "\n";
        }
    }
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace kfp
