// config.hpp
// Line-based "key = value" run configuration with dotted section prefixes,
// '#' comments, unknown-key rejection, and full resolution into grid, model,
// norm, initial data, and tolerances.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kwc/grid.hpp"
#include "kwc/io.hpp"
#include "kwc/model.hpp"
#include "kwc/regnorm.hpp"
#include "kwc/stepper.hpp"

namespace kwc {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    // grid
    int dim = 1;
    std::vector<int> shape = {32};
    std::vector<double> spacing = {1.0 / 32.0};
    // model
    double c = 1.0;
    double nu = 0.2;
    double delta_star = 0.1;
    std::string gamma_name = "indicator";
    double gamma_coeff = 0.0;
    std::string g_name = "quadratic_difference";
    double g_scale = 0.5;
    std::string alpha_name = "delta_plus_eta_sq";
    double alpha_value = 1.0;
    std::string alpha0_name = "constant";
    double alpha0_value = 1.0;
    std::string beta_name = "constant";
    double beta_value = 1.0;
    bool relaxed_assumptions = false;
    // norm
    std::string norm_family = "hyperbola";
    double sigma = 0.1;
    double p_exponent = 0.0;  // 0 = auto (1 + sigma)
    // time
    std::string h_text = "auto";
    int steps = 200;
    // initial data
    std::string preset = "ramp";
    double amplitude = M_PI;
    std::uint64_t seed = 1;
    std::string w_snapshot, eta_snapshot, theta_snapshot;
    // source
    std::string source_type = "constant";
    double source_value = 0.0;
    double u_infinity_value = 0.0;
    std::string source_table_text;
    double support_end = std::numeric_limits<double>::infinity();
    // tolerances
    Tolerances tols;
    double slack_coeff = 1e-7;
    double spread_tol = 1e-3;
    double residual_tol = 1e-5;
    // audits
    bool audit_dissipation_flag = true;
    bool audit_lyapunov_flag = true;
    bool audit_omega_flag = false;
    bool audit_apriori_flag = false;
    // output
    std::string output_dir = "out";
    int snapshot_every = 10;

    // resolved objects
    Grid grid;
    ModelSpec spec;
    double h = 0.0;
    double h1_dagger = 0.0;
    InitialData initial;

    TvNorm make_norm() const {
        return TvNorm(RegularizedNorm(family_from_name(norm_family), sigma, p_exponent));
    }
    Field u_infinity_field() const { return constant_field(grid, u_infinity_value); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ' ' || ch == ',' || ch == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& v, int line) {
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    if (v == "pi") return M_PI;
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": not a number: '" + v + "'");
    }
}

inline int parse_int(const std::string& v, int line) {
    try {
        size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": not an integer: '" + v + "'");
    }
}

inline bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError("line " + std::to_string(line) + ": not a boolean: '" + v + "'");
}

}  // namespace detail

inline Field ramp_field(const Grid& grid, double amplitude, int axis = 0) {
    Field f(grid);
    int n = grid.extent(axis);
    for (int i = 0; i < f.size(); ++i) {
        int i0 = i / grid.extent(1), i1 = i % grid.extent(1);
        int idx = axis == 0 ? i0 : i1;
        f[i] = amplitude * idx / double(n - 1);
    }
    return f;
}

inline Field step_field(const Grid& grid, double amplitude, int axis = 0) {
    Field f(grid);
    int n = grid.extent(axis);
    for (int i = 0; i < f.size(); ++i) {
        int i0 = i / grid.extent(1), i1 = i % grid.extent(1);
        int idx = axis == 0 ? i0 : i1;
        f[i] = idx >= n / 2 ? amplitude : 0.0;
    }
    return f;
}

inline InitialData make_preset(std::string name, const Grid& grid, double amplitude,
                               std::uint64_t seed) {
    if (name == "two-grain") name = "two_grain";
    if (name == "random-seeded") name = "random";
    if (name == "ramp") {
        FieldPair v{constant_field(grid, 1.0), constant_field(grid, 1.0)};
        return InitialData::of(std::move(v), ramp_field(grid, amplitude));
    }
    if (name == "step") {
        FieldPair v{constant_field(grid, 1.0), constant_field(grid, 1.0)};
        return InitialData::of(std::move(v), step_field(grid, amplitude));
    }
    if (name == "two_grain") {
        // two oriented grains separated by a disordered band
        Field theta(grid), eta(grid);
        int n0 = grid.extent(0);
        for (int i = 0; i < theta.size(); ++i) {
            int i0 = i / grid.extent(1);
            double x = (i0 + 0.5) / n0;
            theta[i] = i0 >= n0 / 2 ? 0.5 * amplitude : -0.5 * amplitude;
            double d = (x - 0.5) / 0.1;
            eta[i] = 1.0 - 0.5 * std::exp(-d * d);
        }
        FieldPair v{constant_field(grid, 1.0), std::move(eta)};
        return InitialData::of(std::move(v), std::move(theta));
    }
    if (name == "random") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        Field w(grid), eta(grid), theta(grid);
        for (int i = 0; i < w.size(); ++i) {
            w[i] = 0.2 + 0.6 * u01(rng);
            eta[i] = 0.2 + 0.6 * u01(rng);
            theta[i] = amplitude * (2.0 * u01(rng) - 1.0);
        }
        return InitialData::of(FieldPair{std::move(w), std::move(eta)}, std::move(theta));
    }
    throw ConfigError("unknown initial preset: '" + name + "'");
}

inline void resolve_config(RunConfig& cfg) {
    // grid
    if (cfg.dim < 1 || cfg.dim > 2) throw ConfigError("grid.dim: must be 1 or 2");
    if (static_cast<int>(cfg.shape.size()) != cfg.dim)
        throw ConfigError("grid.shape: expected one entry per dimension");
    if (static_cast<int>(cfg.spacing.size()) != cfg.dim)
        throw ConfigError("grid.spacing: expected one entry per dimension");
    std::array<int, 2> shape{cfg.shape[0], cfg.dim == 2 ? cfg.shape[1] : 1};
    std::array<double, 2> spacing{cfg.spacing[0], cfg.dim == 2 ? cfg.spacing[1] : 1.0};
    cfg.grid = Grid(cfg.dim, shape, spacing);

    // model functions
    ModelSpec spec;
    spec.c = cfg.c;
    spec.nu = cfg.nu;
    spec.delta_star = cfg.delta_star;
    spec.relaxed_assumptions = cfg.relaxed_assumptions;
    if (cfg.gamma_name == "indicator") spec.gamma = GammaSmooth::none();
    else if (cfg.gamma_name == "quadratic") spec.gamma = GammaSmooth::quadratic(cfg.gamma_coeff);
    else throw ConfigError("model.gamma: unknown potential '" + cfg.gamma_name + "'");
    if (cfg.g_name == "quadratic_difference") spec.g = SurfaceFn::scaled_sq_difference(cfg.g_scale);
    else if (cfg.g_name == "zero") spec.g = SurfaceFn::constant(0.0);
    else if (cfg.g_name == "kobayashi") {
        if (!cfg.relaxed_assumptions)
            throw ConfigError(
                "model.g: the kobayashi preset violates (A4) nonnegativity; set "
                "model.relaxed_assumptions = true to use it");
        spec.g = SurfaceFn::kobayashi_g(cfg.c);
    } else throw ConfigError("model.g: unknown interaction '" + cfg.g_name + "'");
    if (cfg.alpha_name == "delta_plus_eta_sq") spec.alpha = SurfaceFn::offset_eta_sq(cfg.delta_star);
    else if (cfg.alpha_name == "constant") spec.alpha = SurfaceFn::constant(cfg.alpha_value);
    else throw ConfigError("model.alpha: unknown weight '" + cfg.alpha_name + "'");
    if (cfg.alpha0_name == "constant") spec.alpha0 = SurfaceFn::constant(cfg.alpha0_value);
    else throw ConfigError("model.alpha0: unknown weight '" + cfg.alpha0_name + "'");
    if (cfg.beta_name == "constant") spec.beta = SurfaceFn::constant(cfg.beta_value);
    else throw ConfigError("model.beta: unknown weight '" + cfg.beta_name + "'");

    // source
    if (cfg.source_type == "constant") {
        spec.source = Source::constant(cfg.source_value, cfg.u_infinity_value);
    } else if (cfg.source_type == "table") {
        std::vector<SourceEntry> entries;
        std::istringstream ss(cfg.source_table_text);
        std::string item;
        while (std::getline(ss, item, ';')) {
            item = detail::trim(item);
            if (item.empty()) continue;
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("source.table: entries must be 't:value', got '" + item + "'");
            entries.push_back({detail::parse_double(detail::trim(item.substr(0, colon)), 0),
                               detail::parse_double(detail::trim(item.substr(colon + 1)), 0)});
        }
        if (entries.empty()) throw ConfigError("source.table: empty table");
        spec.source = Source::table(std::move(entries), cfg.u_infinity_value, cfg.support_end);
    } else {
        throw ConfigError("source.type: must be 'constant' or 'table'");
    }
    cfg.spec = spec;

    // model assumptions
    ValidationReport vr = validate(cfg.spec);
    if (!vr.pass) {
        std::string head = vr.issues.empty() ? "validation failed"
                                             : vr.issues.front().assumption + ": " +
                                                   vr.issues.front().detail;
        throw ConfigError(head);
    }

    // norm
    if (!(cfg.sigma > 0.0 && cfg.sigma < 1.0))
        throw ConfigError("norm.sigma: value " + std::to_string(cfg.sigma) + " outside (0,1)");
    family_from_name(cfg.norm_family);  // rejects unknown names
    if (cfg.norm_family == "p_growth" && cfg.p_exponent != 0.0 && !(cfg.p_exponent > 1.0))
        throw ConfigError("norm.p: exponent must exceed 1");

    // time step
    cfg.h1_dagger = step_bound(cfg.spec);
    if (cfg.h_text == "auto") cfg.h = 0.9 * cfg.h1_dagger;
    else cfg.h = detail::parse_double(cfg.h_text, 0);
    if (!(cfg.h > 0.0)) throw ConfigError("time.h: must be positive");
    if (cfg.h > cfg.h1_dagger * (1.0 + 1e-12))
        throw ConfigError("time.h: " + std::to_string(cfg.h) + " exceeds h1_dagger = " +
                          std::to_string(cfg.h1_dagger));
    if (cfg.steps < 0) throw ConfigError("time.steps: must be >= 0");

    // initial data
    if (!cfg.w_snapshot.empty() || !cfg.eta_snapshot.empty() || !cfg.theta_snapshot.empty()) {
        if (cfg.w_snapshot.empty() || cfg.eta_snapshot.empty() || cfg.theta_snapshot.empty())
            throw ConfigError("initial: snapshot start needs all of w/eta/theta paths");
        Field w = read_field(cfg.w_snapshot);
        Field eta = read_field(cfg.eta_snapshot);
        Field theta = read_field(cfg.theta_snapshot);
        if (!w.grid.same(cfg.grid) || !eta.grid.same(cfg.grid) || !theta.grid.same(cfg.grid))
            throw ConfigError("initial: snapshot grids do not match grid block");
        cfg.initial = InitialData::of(FieldPair{std::move(w), std::move(eta)}, std::move(theta));
    } else {
        cfg.initial = make_preset(cfg.preset, cfg.grid, cfg.amplitude, cfg.seed);
    }
    if (!in_d0(cfg.initial))
        throw ConfigError("initial: data outside D0 (needs 0 <= w, eta <= 1 and finite theta)");

    // (A6) when the omega-limit audit is requested
    if (cfg.audit_omega_flag && !cfg.spec.source.eventually_equals_u_infinity(1e-12))
        throw ConfigError(
            "A6: omega-limit audit requires the source to settle at u_infinity "
            "(table tail or zero extension must equal source.u_infinity)");

    if (cfg.snapshot_every < 1) throw ConfigError("output.snapshot_every: must be >= 1");
}

inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        std::string key = detail::trim(s.substr(0, eq));
        std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty key or value");

        if (key == "grid.dim") cfg.dim = detail::parse_int(val, line);
        else if (key == "grid.shape") {
            cfg.shape.clear();
            for (auto& t : detail::split_list(val)) cfg.shape.push_back(detail::parse_int(t, line));
        } else if (key == "grid.spacing") {
            cfg.spacing.clear();
            for (auto& t : detail::split_list(val)) cfg.spacing.push_back(detail::parse_double(t, line));
        } else if (key == "model.c") cfg.c = detail::parse_double(val, line);
        else if (key == "model.nu") cfg.nu = detail::parse_double(val, line);
        else if (key == "model.delta_star") cfg.delta_star = detail::parse_double(val, line);
        else if (key == "model.gamma") cfg.gamma_name = val;
        else if (key == "model.gamma_coeff") cfg.gamma_coeff = detail::parse_double(val, line);
        else if (key == "model.g") cfg.g_name = val;
        else if (key == "model.g_scale") cfg.g_scale = detail::parse_double(val, line);
        else if (key == "model.alpha") cfg.alpha_name = val;
        else if (key == "model.alpha_value") cfg.alpha_value = detail::parse_double(val, line);
        else if (key == "model.alpha0") cfg.alpha0_name = val;
        else if (key == "model.alpha0_value") cfg.alpha0_value = detail::parse_double(val, line);
        else if (key == "model.beta") cfg.beta_name = val;
        else if (key == "model.beta_value") cfg.beta_value = detail::parse_double(val, line);
        else if (key == "model.relaxed_assumptions") cfg.relaxed_assumptions = detail::parse_bool(val, line);
        else if (key == "norm.family") cfg.norm_family = val;
        else if (key == "norm.sigma") cfg.sigma = detail::parse_double(val, line);
        else if (key == "norm.p") cfg.p_exponent = val == "auto" ? 0.0 : detail::parse_double(val, line);
        else if (key == "time.h") cfg.h_text = val;
        else if (key == "time.steps") cfg.steps = detail::parse_int(val, line);
        else if (key == "initial.preset") cfg.preset = val;
        else if (key == "initial.amplitude") cfg.amplitude = detail::parse_double(val, line);
        else if (key == "initial.seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_int(val, line));
        else if (key == "initial.w_snapshot") cfg.w_snapshot = val;
        else if (key == "initial.eta_snapshot") cfg.eta_snapshot = val;
        else if (key == "initial.theta_snapshot") cfg.theta_snapshot = val;
        else if (key == "source.type") cfg.source_type = val;
        else if (key == "source.value") cfg.source_value = detail::parse_double(val, line);
        else if (key == "source.u_infinity") cfg.u_infinity_value = detail::parse_double(val, line);
        else if (key == "source.table") cfg.source_table_text = val;
        else if (key == "source.support_end") cfg.support_end = detail::parse_double(val, line);
        else if (key == "tol.v_step") cfg.tols.v_tol = detail::parse_double(val, line);
        else if (key == "tol.theta_step") cfg.tols.theta_tol = detail::parse_double(val, line);
        else if (key == "tol.slack_coeff") cfg.slack_coeff = detail::parse_double(val, line);
        else if (key == "tol.spread") cfg.spread_tol = detail::parse_double(val, line);
        else if (key == "tol.residual") cfg.residual_tol = detail::parse_double(val, line);
        else if (key == "audit.dissipation") cfg.audit_dissipation_flag = detail::parse_bool(val, line);
        else if (key == "audit.lyapunov") cfg.audit_lyapunov_flag = detail::parse_bool(val, line);
        else if (key == "audit.omega") cfg.audit_omega_flag = detail::parse_bool(val, line);
        else if (key == "audit.apriori") cfg.audit_apriori_flag = detail::parse_bool(val, line);
        else if (key == "output.dir") cfg.output_dir = val;
        else if (key == "output.snapshot_every") cfg.snapshot_every = detail::parse_int(val, line);
        else throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    resolve_config(cfg);
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// Serialization of the resolved configuration, suitable for re-parsing.
inline std::string render_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "grid.dim = " << cfg.dim << "\n";
    os << "grid.shape =";
    for (int i = 0; i < cfg.dim; ++i) os << " " << cfg.shape[i];
    os << "\ngrid.spacing =";
    for (int i = 0; i < cfg.dim; ++i) os << " " << format_double(cfg.spacing[i]);
    os << "\n";
    os << "model.c = " << format_double(cfg.c) << "\n";
    os << "model.nu = " << format_double(cfg.nu) << "\n";
    os << "model.delta_star = " << format_double(cfg.delta_star) << "\n";
    os << "model.gamma = " << cfg.gamma_name << "\n";
    if (cfg.gamma_name == "quadratic") os << "model.gamma_coeff = " << format_double(cfg.gamma_coeff) << "\n";
    os << "model.g = " << cfg.g_name << "\n";
    os << "model.g_scale = " << format_double(cfg.g_scale) << "\n";
    os << "model.alpha = " << cfg.alpha_name << "\n";
    if (cfg.alpha_name == "constant") os << "model.alpha_value = " << format_double(cfg.alpha_value) << "\n";
    os << "model.alpha0 = " << cfg.alpha0_name << "\n";
    os << "model.alpha0_value = " << format_double(cfg.alpha0_value) << "\n";
    os << "model.beta = " << cfg.beta_name << "\n";
    os << "model.beta_value = " << format_double(cfg.beta_value) << "\n";
    if (cfg.relaxed_assumptions) os << "model.relaxed_assumptions = true\n";
    os << "norm.family = " << cfg.norm_family << "\n";
    os << "norm.sigma = " << format_double(cfg.sigma) << "\n";
    if (cfg.norm_family == "p_growth" && cfg.p_exponent > 0.0)
        os << "norm.p = " << format_double(cfg.p_exponent) << "\n";
    os << "time.h = " << format_double(cfg.h) << "\n";
    os << "time.steps = " << cfg.steps << "\n";
    os << "initial.preset = " << cfg.preset << "\n";
    os << "initial.amplitude = " << format_double(cfg.amplitude) << "\n";
    os << "initial.seed = " << cfg.seed << "\n";
    if (!cfg.w_snapshot.empty()) {
        os << "initial.w_snapshot = " << cfg.w_snapshot << "\n";
        os << "initial.eta_snapshot = " << cfg.eta_snapshot << "\n";
        os << "initial.theta_snapshot = " << cfg.theta_snapshot << "\n";
    }
    os << "source.type = " << cfg.source_type << "\n";
    if (cfg.source_type == "constant") os << "source.value = " << format_double(cfg.source_value) << "\n";
    else os << "source.table = " << cfg.source_table_text << "\n";
    os << "source.u_infinity = " << format_double(cfg.u_infinity_value) << "\n";
    if (std::isfinite(cfg.support_end))
        os << "source.support_end = " << format_double(cfg.support_end) << "\n";
    os << "tol.v_step = " << format_double(cfg.tols.v_tol) << "\n";
    os << "tol.theta_step = " << format_double(cfg.tols.theta_tol) << "\n";
    os << "tol.slack_coeff = " << format_double(cfg.slack_coeff) << "\n";
    os << "tol.spread = " << format_double(cfg.spread_tol) << "\n";
    os << "tol.residual = " << format_double(cfg.residual_tol) << "\n";
    os << "audit.dissipation = " << (cfg.audit_dissipation_flag ? "true" : "false") << "\n";
    os << "audit.lyapunov = " << (cfg.audit_lyapunov_flag ? "true" : "false") << "\n";
    os << "audit.omega = " << (cfg.audit_omega_flag ? "true" : "false") << "\n";
    os << "audit.apriori = " << (cfg.audit_apriori_flag ? "true" : "false") << "\n";
    os << "output.dir = " << cfg.output_dir << "\n";
    os << "output.snapshot_every = " << cfg.snapshot_every << "\n";
    return os.str();
}

}  // namespace kwc
