#include "kfp/config.hpp"

#include <fstream>
#include <sstream>

#include "kfp/expression.hpp"
#include "kfp/march.hpp"

namespace kfp {

namespace {

std::string join_errors(const std::vector<std::string>& errs) {
    std::ostringstream os;
    os << "configuration invalid (" << errs.size() << " error" << (errs.size() == 1 ? "" : "s")
       << "):";
    for (const auto& e : errs) os << "\n  - " << e;
    return os.str();
}

using json = nlohmann::ordered_json;

class Validator {
public:
    explicit Validator(const json& j) : j_(j) {}

    RunConfig run() {
        parse_mode();
        parse_schema();
        parse_domain();
        parse_grid();
        parse_coefficients();
        parse_fields();
        parse_solver();
        parse_oracle();
        parse_convergence();
        parse_misc();
        semantic_checks();
        if (!errors_.empty()) throw ConfigError(std::move(errors_));
        cfg_.echo = resolved_echo();
        return cfg_;
    }

private:
    const json& j_;
    RunConfig cfg_;
    std::vector<std::string> errors_;
    int dim_ = 0;

    void err(const std::string& msg) { errors_.push_back(msg); }

    template <typename T>
    T get_or(const json& o, const std::string& key, const T& fallback) {
        if (!o.contains(key)) return fallback;
        try {
            return o.at(key).get<T>();
        } catch (const json::exception& e) {
            err("field '" + key + "': " + e.what());
            return fallback;
        }
    }

    std::vector<double> get_vec(const json& o, const std::string& key, bool required) {
        if (!o.contains(key)) {
            if (required) err("missing field '" + key + "'");
            return {};
        }
        try {
            if (o.at(key).is_number()) return {o.at(key).get<double>()};
            return o.at(key).get<std::vector<double>>();
        } catch (const json::exception& e) {
            err("field '" + key + "': " + e.what());
            return {};
        }
    }

    void parse_mode() {
        const std::string m = get_or<std::string>(j_, "mode", "solve");
        if (m == "solve") cfg_.mode = RunMode::Solve;
        else if (m == "verify") cfg_.mode = RunMode::Verify;
        else if (m == "convergence") cfg_.mode = RunMode::Convergence;
        else if (m == "oracle") cfg_.mode = RunMode::Oracle;
        else err("mode must be one of solve, verify, convergence, oracle (got '" + m + "')");
    }

    void parse_schema() {
        cfg_.schema_version = get_or<int>(j_, "schema_version", 1);
        if (cfg_.schema_version != 1) {
            err("unsupported schema_version " + std::to_string(cfg_.schema_version));
        }
    }

    void parse_domain() {
        if (!j_.contains("domain")) {
            err("missing field 'domain'");
            cfg_.domain = BoxDomain::unit_box(1);
            dim_ = 1;
            return;
        }
        const json& d = j_.at("domain");
        const auto v_lo = get_vec(d, "v_lo", true);
        const auto v_hi = get_vec(d, "v_hi", true);
        const auto x_lo = get_vec(d, "x_lo", true);
        const auto x_hi = get_vec(d, "x_hi", true);
        const double t_lo = get_or<double>(d, "t_lo", 0.0);
        const double t_hi = get_or<double>(d, "t_hi", 1.0);
        if (v_lo.empty() || v_lo.size() != v_hi.size() || v_lo.size() != x_lo.size() ||
            v_lo.size() != x_hi.size()) {
            err("domain: v_lo, v_hi, x_lo, x_hi must have the same (positive) length");
            cfg_.domain = BoxDomain::unit_box(1);
            dim_ = 1;
            return;
        }
        try {
            cfg_.domain = BoxDomain::make(v_lo, v_hi, x_lo, x_hi, t_lo, t_hi);
            dim_ = cfg_.domain.dim();
        } catch (const std::exception& e) {
            err(std::string("domain: ") + e.what());
            cfg_.domain = BoxDomain::unit_box(static_cast<int>(v_lo.size()));
            dim_ = cfg_.domain.dim();
        }
    }

    void parse_grid() {
        cfg_.n_v.assign(dim_, 16);
        cfg_.n_x.assign(dim_, 16);
        cfg_.n_t = 16;
        if (!j_.contains("grid")) {
            err("missing field 'grid'");
            return;
        }
        const json& g = j_.at("grid");
        auto counts = [&](const std::string& key) {
            std::vector<int> out(dim_, 16);
            if (!g.contains(key)) {
                err("grid: missing '" + key + "'");
                return out;
            }
            try {
                if (g.at(key).is_number()) out.assign(dim_, g.at(key).get<int>());
                else out = g.at(key).get<std::vector<int>>();
            } catch (const json::exception& e) {
                err("grid." + key + ": " + e.what());
            }
            if (static_cast<int>(out.size()) != dim_) {
                err("grid." + key + ": expected " + std::to_string(dim_) + " entries");
                out.assign(dim_, 16);
            }
            return out;
        };
        cfg_.n_v = counts("n_v");
        cfg_.n_x = counts("n_x");
        cfg_.n_t = get_or<int>(g, "n_t", 0);
        if (cfg_.n_t == 0) err("grid: missing 'n_t'");
        for (int n : cfg_.n_v) {
            if (n < 3) err("grid axis below minimum 3 (n_v)");
        }
        for (int n : cfg_.n_x) {
            if (n < 3) err("grid axis below minimum 3 (n_x)");
        }
        if (cfg_.n_t != 0 && cfg_.n_t < 3) err("grid axis below minimum 3 (n_t)");
    }

    void parse_coefficients() {
        if (!j_.contains("coefficients")) return; // identity default
        const json& c = j_.at("coefficients");
        const std::string kind = get_or<std::string>(c, "kind", "identity");
        if (kind == "identity") {
            cfg_.coeff.kind = CoefficientSpec::Kind::Identity;
        } else if (kind == "diagonal") {
            cfg_.coeff.kind = CoefficientSpec::Kind::Diagonal;
            cfg_.coeff.diag_values = get_vec(c, "values", true);
            if (static_cast<int>(cfg_.coeff.diag_values.size()) != dim_) {
                err("coefficients: diagonal kind needs exactly d values");
            }
        } else if (kind == "checkerboard") {
            cfg_.coeff.kind = CoefficientSpec::Kind::Checkerboard;
            cfg_.coeff.A1 = get_vec(c, "A1", true);
            cfg_.coeff.A2 = get_vec(c, "A2", true);
            cfg_.coeff.period = get_or<int>(c, "period", 1);
            const size_t dd = static_cast<size_t>(dim_) * dim_;
            if (cfg_.coeff.A1.size() != dd || cfg_.coeff.A2.size() != dd) {
                err("coefficients: checkerboard blocks must be d*d row-major matrices");
            }
            if (cfg_.coeff.period < 1) err("coefficients: period must be >= 1");
        } else if (kind == "random_spd") {
            cfg_.coeff.kind = CoefficientSpec::Kind::RandomSpd;
            cfg_.coeff.lambda = get_or<double>(c, "lambda", 1.0);
            cfg_.coeff.Lambda = get_or<double>(c, "Lambda", 1.0);
            cfg_.coeff.seed = get_or<std::uint64_t>(c, "seed", 0);
            if (!(cfg_.coeff.lambda > 0.0) || !(cfg_.coeff.Lambda >= cfg_.coeff.lambda)) {
                err("coefficients: need 0 < lambda <= Lambda");
            }
        } else {
            err("coefficients: unknown kind '" + kind + "'");
        }
    }

    void check_expr(const std::string& src, const std::string& name) {
        if (src.empty()) {
            err(name + ": empty expression");
            return;
        }
        try {
            Expression::parse(src, std::max(dim_, 1));
        } catch (const std::exception& e) {
            err(name + ": " + e.what());
        }
    }

    void parse_fields() {
        cfg_.f_src = get_or<std::string>(j_, "f", cfg_.f_src);
        cfg_.psi_src = get_or<std::string>(j_, "psi", cfg_.psi_src);
        cfg_.g_src = get_or<std::string>(j_, "g", cfg_.g_src);
        cfg_.u_exact_src = get_or<std::string>(j_, "u_exact", "");
        check_expr(cfg_.f_src, "f");
        check_expr(cfg_.psi_src, "psi");
        check_expr(cfg_.g_src, "g");
        if (!cfg_.u_exact_src.empty()) check_expr(cfg_.u_exact_src, "u_exact");
        if (cfg_.mode == RunMode::Convergence && cfg_.u_exact_src.empty()) {
            err("convergence mode requires 'u_exact'");
        }
    }

    void parse_solver() {
        if (!j_.contains("solver")) return;
        const json& s = j_.at("solver");
        const std::string method = get_or<std::string>(s, "method", "psor");
        if (method == "psor") cfg_.solver.method = SolverConfig::Method::Psor;
        else if (method == "penalized") cfg_.solver.method = SolverConfig::Method::Penalized;
        else err("solver.method must be psor or penalized");
        cfg_.solver.omega = get_or<double>(s, "omega", cfg_.solver.omega);
        cfg_.solver.tol = get_or<double>(s, "tol", cfg_.solver.tol);
        cfg_.solver.max_iter = get_or<long>(s, "max_iter", cfg_.solver.max_iter);
        cfg_.solver.epsilon_penalty =
            get_or<double>(s, "epsilon_penalty", cfg_.solver.epsilon_penalty);
        cfg_.solver.newton_max = get_or<int>(s, "newton_max", cfg_.solver.newton_max);
        try {
            cfg_.solver.validate();
        } catch (const std::exception& e) {
            err(std::string("solver: ") + e.what());
        }
    }

    void parse_oracle() {
        cfg_.oracle.probe = cfg_.domain;
        cfg_.oracle.dp_grid = VxGrid{cfg_.domain.v_lo[0], cfg_.domain.v_hi[0],
                                     cfg_.domain.x_lo[0], cfg_.domain.x_hi[0], 64, 64};
        if (!j_.contains("oracle")) {
            if (cfg_.mode == RunMode::Oracle) err("oracle mode requires an 'oracle' section");
            return;
        }
        const json& o = j_.at("oracle");
        cfg_.oracle.n_paths = get_or<long>(o, "n_paths", cfg_.oracle.n_paths);
        cfg_.oracle.gh_order = get_or<int>(o, "gh_order", cfg_.oracle.gh_order);
        cfg_.oracle.basis_degree = get_or<int>(o, "basis_degree", cfg_.oracle.basis_degree);
        cfg_.oracle.tolerance = get_or<double>(o, "tolerance", cfg_.oracle.tolerance);
        cfg_.oracle.payoff_src = get_or<std::string>(o, "payoff", "");
        if (o.contains("dp_grid")) {
            const json& dgj = o.at("dp_grid");
            VxGrid& dg = cfg_.oracle.dp_grid;
            dg.v_lo = get_or<double>(dgj, "v_lo", dg.v_lo);
            dg.v_hi = get_or<double>(dgj, "v_hi", dg.v_hi);
            dg.x_lo = get_or<double>(dgj, "x_lo", dg.x_lo);
            dg.x_hi = get_or<double>(dgj, "x_hi", dg.x_hi);
            dg.n_v = get_or<int>(dgj, "n_v", dg.n_v);
            dg.n_x = get_or<int>(dgj, "n_x", dg.n_x);
            if (dg.n_v < 3 || dg.n_x < 3) err("oracle.dp_grid: grid axis below minimum 3");
            if (!(dg.v_lo < dg.v_hi) || !(dg.x_lo < dg.x_hi)) {
                err("oracle.dp_grid: lo < hi required");
            }
        }
        if (o.contains("probe")) {
            const json& p = o.at("probe");
            const auto v_lo = get_vec(p, "v_lo", true);
            const auto v_hi = get_vec(p, "v_hi", true);
            const auto x_lo = get_vec(p, "x_lo", true);
            const auto x_hi = get_vec(p, "x_hi", true);
            if (v_lo.size() == 1 && v_hi.size() == 1 && x_lo.size() == 1 && x_hi.size() == 1) {
                try {
                    cfg_.oracle.probe = BoxDomain::make(v_lo, v_hi, x_lo, x_hi, cfg_.domain.t_lo,
                                                        cfg_.domain.t_hi);
                } catch (const std::exception& e) {
                    err(std::string("oracle.probe: ") + e.what());
                }
            } else {
                err("oracle.probe: expected scalar v_lo/v_hi/x_lo/x_hi (d = 1)");
            }
        }
        if (o.contains("start")) {
            cfg_.oracle.start_v = get_or<double>(o.at("start"), "v", 0.0);
            cfg_.oracle.start_x = get_or<double>(o.at("start"), "x", 0.0);
        }
        if (cfg_.mode == RunMode::Oracle) {
            if (dim_ != 1) err("oracle mode requires d = 1");
            if (cfg_.oracle.payoff_src.empty()) err("oracle: missing 'payoff' expression");
            else check_expr(cfg_.oracle.payoff_src, "oracle.payoff");
            if (cfg_.oracle.n_paths < 2) err("oracle: n_paths must be >= 2");
            if (cfg_.oracle.gh_order < 2) err("oracle: gh_order must be >= 2");
            if (cfg_.oracle.basis_degree < 1) err("oracle: basis_degree must be >= 1");
        }
    }

    void parse_convergence() {
        if (!j_.contains("convergence")) return;
        const json& c = j_.at("convergence");
        if (c.contains("levels")) {
            try {
                cfg_.convergence_levels = c.at("levels").get<std::vector<int>>();
            } catch (const json::exception& e) {
                err(std::string("convergence.levels: ") + e.what());
            }
        }
        if (cfg_.convergence_levels.size() < 2) {
            err("convergence: need at least two refinement levels");
        }
        for (int l : cfg_.convergence_levels) {
            if (l < 3) err("convergence: grid axis below minimum 3");
        }
    }

    void parse_misc() {
        cfg_.out_dir = get_or<std::string>(j_, "output_dir", cfg_.out_dir);
        cfg_.seed = get_or<std::uint64_t>(j_, "seed", cfg_.seed);
        cfg_.emit_timings = get_or<bool>(j_, "emit_timings", cfg_.emit_timings);
    }

    // Pre-flight checks that need sampled fields; only run once the config
    // is otherwise clean.
    void semantic_checks() {
        if (!errors_.empty() || cfg_.mode != RunMode::Solve) return;
        try {
            const GridSpec g = cfg_.grid();
            const Expression psi_e = Expression::parse(cfg_.psi_src, dim_);
            const Expression g_e = Expression::parse(cfg_.g_src, dim_);
            const ScalarField psi = ScalarField::sample(
                g, [&](const Eigen::VectorXd& v, const Eigen::VectorXd& x, double t) {
                    return psi_e.eval(v, x, t);
                });
            const ScalarField gd = ScalarField::sample(
                g, [&](const Eigen::VectorXd& v, const Eigen::VectorXd& x, double t) {
                    return g_e.eval(v, x, t);
                });
            for (double val : psi.values) {
                if (!std::isfinite(val)) {
                    err("psi: expression evaluates to a non-finite value on the grid");
                    break;
                }
            }
            for (double val : gd.values) {
                if (!std::isfinite(val)) {
                    err("g: expression evaluates to a non-finite value on the grid");
                    break;
                }
            }
            if (errors_.empty() && !check_ordering(psi, gd)) {
                err("ordering requirement violated: psi <= g must hold on the Kolmogorov "
                    "boundary");
            }
        } catch (const std::exception& e) {
            err(std::string("pre-flight: ") + e.what());
        }
    }

    json resolved_echo() const {
        json e;
        e["schema_version"] = cfg_.schema_version;
        e["mode"] = to_string(cfg_.mode);
        json dom;
        dom["v_lo"] = std::vector<double>(cfg_.domain.v_lo.data(), cfg_.domain.v_lo.data() + dim_);
        dom["v_hi"] = std::vector<double>(cfg_.domain.v_hi.data(), cfg_.domain.v_hi.data() + dim_);
        dom["x_lo"] = std::vector<double>(cfg_.domain.x_lo.data(), cfg_.domain.x_lo.data() + dim_);
        dom["x_hi"] = std::vector<double>(cfg_.domain.x_hi.data(), cfg_.domain.x_hi.data() + dim_);
        dom["t_lo"] = cfg_.domain.t_lo;
        dom["t_hi"] = cfg_.domain.t_hi;
        e["domain"] = dom;
        e["grid"] = {{"n_v", cfg_.n_v}, {"n_x", cfg_.n_x}, {"n_t", cfg_.n_t}};
        json c;
        switch (cfg_.coeff.kind) {
            case CoefficientSpec::Kind::Identity: c["kind"] = "identity"; break;
            case CoefficientSpec::Kind::Diagonal:
                c["kind"] = "diagonal";
                c["values"] = cfg_.coeff.diag_values;
                break;
            case CoefficientSpec::Kind::Checkerboard:
                c["kind"] = "checkerboard";
                c["A1"] = cfg_.coeff.A1;
                c["A2"] = cfg_.coeff.A2;
                c["period"] = cfg_.coeff.period;
                break;
            case CoefficientSpec::Kind::RandomSpd:
                c["kind"] = "random_spd";
                c["lambda"] = cfg_.coeff.lambda;
                c["Lambda"] = cfg_.coeff.Lambda;
                c["seed"] = cfg_.coeff.seed;
                break;
        }
        e["coefficients"] = c;
        e["f"] = cfg_.f_src;
        e["psi"] = cfg_.psi_src;
        e["g"] = cfg_.g_src;
        if (!cfg_.u_exact_src.empty()) e["u_exact"] = cfg_.u_exact_src;
        e["solver"] = {
            {"method", cfg_.solver.method == SolverConfig::Method::Psor ? "psor" : "penalized"},
            {"omega", cfg_.solver.omega},
            {"tol", cfg_.solver.tol},
            {"max_iter", cfg_.solver.max_iter},
            {"epsilon_penalty", cfg_.solver.epsilon_penalty},
            {"newton_max", cfg_.solver.newton_max}};
        if (cfg_.mode == RunMode::Oracle) {
            e["oracle"] = {{"n_paths", cfg_.oracle.n_paths},
                           {"gh_order", cfg_.oracle.gh_order},
                           {"basis_degree", cfg_.oracle.basis_degree},
                           {"tolerance", cfg_.oracle.tolerance},
                           {"payoff", cfg_.oracle.payoff_src},
                           {"dp_grid",
                            {{"v_lo", cfg_.oracle.dp_grid.v_lo},
                             {"v_hi", cfg_.oracle.dp_grid.v_hi},
                             {"x_lo", cfg_.oracle.dp_grid.x_lo},
                             {"x_hi", cfg_.oracle.dp_grid.x_hi},
                             {"n_v", cfg_.oracle.dp_grid.n_v},
                             {"n_x", cfg_.oracle.dp_grid.n_x}}},
                           {"probe",
                            {{"v_lo", cfg_.oracle.probe.v_lo[0]},
                             {"v_hi", cfg_.oracle.probe.v_hi[0]},
                             {"x_lo", cfg_.oracle.probe.x_lo[0]},
                             {"x_hi", cfg_.oracle.probe.x_hi[0]}}},
                           {"start", {{"v", cfg_.oracle.start_v}, {"x", cfg_.oracle.start_x}}}};
        }
        if (cfg_.mode == RunMode::Convergence) {
            e["convergence"] = {{"levels", cfg_.convergence_levels}};
        }
        e["output_dir"] = cfg_.out_dir;
        e["seed"] = cfg_.seed;
        e["emit_timings"] = cfg_.emit_timings;
        return e;
    }
};

} // namespace

ConfigError::ConfigError(std::vector<std::string> errs)
    : std::runtime_error(join_errors(errs)), errors(std::move(errs)) {}

std::string to_string(RunMode m) {
    switch (m) {
        case RunMode::Solve: return "solve";
        case RunMode::Verify: return "verify";
        case RunMode::Convergence: return "convergence";
        case RunMode::Oracle: return "oracle";
    }
    return "solve";
}

RunConfig parse_config_json(const nlohmann::ordered_json& j) { return Validator(j).run(); }

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file: " + path});
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::ordered_json::parse_error& e) {
        throw ConfigError({std::string("JSON parse error: ") + e.what()});
    }
    return parse_config_json(j);
}

} // namespace kfp
