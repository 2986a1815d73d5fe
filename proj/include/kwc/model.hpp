// model.hpp
// Model data: the potentials gamma, g and the weights alpha0, alpha, beta as
// named built-ins with analytic derivatives, the temperature source table,
// assumption validation, and the derived constants of the step analysis
// (h1_dagger, R*, A*, B*, C*, nu*).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kwc/grid.hpp"

namespace kwc {

// Scalar function of (w, eta) with analytic first and second derivatives.
class SurfaceFn {
public:
    enum class Kind {
        constant,             // a
        offset_eta_sq,        // a + eta^2
        scaled_sq_difference, // a*(w - eta)^2
        kobayashi_g,          // 0.5*(w-eta)^2 - 0.5*b*w^2  (relaxed-assumptions preset)
        eta_cubic,            // a + eta^3 - eta
        neg_eta_sq            // a - eta^2
    };

    SurfaceFn() = default;
    SurfaceFn(Kind kind, double a, double b = 0.0) : kind_(kind), a_(a), b_(b) {}

    static SurfaceFn constant(double a) { return {Kind::constant, a}; }
    static SurfaceFn offset_eta_sq(double a) { return {Kind::offset_eta_sq, a}; }
    static SurfaceFn scaled_sq_difference(double a) { return {Kind::scaled_sq_difference, a}; }
    static SurfaceFn kobayashi_g(double b) { return {Kind::kobayashi_g, 0.5, b}; }
    static SurfaceFn eta_cubic(double a) { return {Kind::eta_cubic, a}; }
    static SurfaceFn neg_eta_sq(double a) { return {Kind::neg_eta_sq, a}; }

    Kind kind() const { return kind_; }
    double param_a() const { return a_; }

    double value(double w, double e) const {
        switch (kind_) {
            case Kind::constant: return a_;
            case Kind::offset_eta_sq: return a_ + e * e;
            case Kind::scaled_sq_difference: { double d = w - e; return a_ * d * d; }
            case Kind::kobayashi_g: { double d = w - e; return 0.5 * d * d - 0.5 * b_ * w * w; }
            case Kind::eta_cubic: return a_ + e * e * e - e;
            case Kind::neg_eta_sq: return a_ - e * e;
        }
        return 0.0;
    }

    std::array<double, 2> grad(double w, double e) const {
        switch (kind_) {
            case Kind::constant: return {0.0, 0.0};
            case Kind::offset_eta_sq: return {0.0, 2.0 * e};
            case Kind::scaled_sq_difference: {
                double d = w - e;
                return {2.0 * a_ * d, -2.0 * a_ * d};
            }
            case Kind::kobayashi_g: {
                double d = w - e;
                return {d - b_ * w, -d};
            }
            case Kind::eta_cubic: return {0.0, 3.0 * e * e - 1.0};
            case Kind::neg_eta_sq: return {0.0, -2.0 * e};
        }
        return {0.0, 0.0};
    }

    // (f_ww, f_we, f_ee)
    std::array<double, 3> hess(double w, double e) const {
        (void)w; (void)e;
        switch (kind_) {
            case Kind::constant: return {0.0, 0.0, 0.0};
            case Kind::offset_eta_sq: return {0.0, 0.0, 2.0};
            case Kind::scaled_sq_difference: return {2.0 * a_, -2.0 * a_, 2.0 * a_};
            case Kind::kobayashi_g: return {1.0 - b_, -1.0, 1.0};
            case Kind::eta_cubic: return {0.0, 0.0, 6.0 * e};
            case Kind::neg_eta_sq: return {0.0, 0.0, -2.0};
        }
        return {0.0, 0.0, 0.0};
    }

    double inf_on_unit_square(int k) const {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                m = std::min(m, value(i / double(k - 1), j / double(k - 1)));
        return m;
    }

    double sup_value(int k) const {
        double m = 0.0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                m = std::max(m, std::abs(value(i / double(k - 1), j / double(k - 1))));
        return m;
    }

    double sup_grad(int k) const {
        double m = 0.0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                auto g = grad(i / double(k - 1), j / double(k - 1));
                m = std::max({m, std::abs(g[0]), std::abs(g[1])});
            }
        return m;
    }

    double sup_hess(int k) const {
        double m = 0.0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                auto h = hess(i / double(k - 1), j / double(k - 1));
                m = std::max({m, std::abs(h[0]), std::abs(h[1]), std::abs(h[2])});
            }
        return m;
    }

private:
    Kind kind_ = Kind::constant;
    double a_ = 0.0;
    double b_ = 0.0;
};

// Smooth part of gamma; the [0,1] indicator part is structural and is
// enforced by projection in the stepper, never materialized.
class GammaSmooth {
public:
    enum class Kind { none, quadratic };  // quadratic: 0.5*k*w^2

    GammaSmooth() = default;
    GammaSmooth(Kind kind, double coeff) : kind_(kind), coeff_(coeff) {}
    static GammaSmooth none() { return {}; }
    static GammaSmooth quadratic(double k) { return {Kind::quadratic, k}; }

    Kind kind() const { return kind_; }
    double coeff() const { return coeff_; }
    double value(double w) const { return kind_ == Kind::quadratic ? 0.5 * coeff_ * w * w : 0.0; }
    double deriv(double w) const { return kind_ == Kind::quadratic ? coeff_ * w : 0.0; }
    double sup_on_unit_interval() const { return kind_ == Kind::quadratic ? 0.5 * std::abs(coeff_) : 0.0; }

private:
    Kind kind_ = Kind::none;
    double coeff_ = 0.0;
};

// Piecewise-constant-in-time source. Each entry holds from t_start until the
// next entry; beyond support_end the zero extension applies.
struct SourceEntry {
    double t_start;
    double value;  // spatially constant level
};

class Source {
public:
    Source() = default;
    static Source constant(double v, double u_infinity = 0.0) {
        Source s;
        s.entries_ = {{0.0, v}};
        s.u_infinity_ = u_infinity;
        return s;
    }
    static Source table(std::vector<SourceEntry> entries, double u_infinity,
                        double support_end = std::numeric_limits<double>::infinity()) {
        if (entries.empty()) throw std::invalid_argument("source: empty table");
        for (size_t i = 1; i < entries.size(); ++i)
            if (!(entries[i].t_start > entries[i - 1].t_start))
                throw std::invalid_argument("source: table times must increase");
        Source s;
        s.entries_ = std::move(entries);
        s.u_infinity_ = u_infinity;
        s.support_end_ = support_end;
        return s;
    }

    double u_infinity() const { return u_infinity_; }
    double support_end() const { return support_end_; }
    const std::vector<SourceEntry>& entries() const { return entries_; }

    double value_at(double t) const {
        if (t < 0.0 || t >= support_end_ || entries_.empty()) return 0.0;
        if (t < entries_.front().t_start) return 0.0;  // zero extension before the table
        double v = entries_.front().value;
        for (const auto& e : entries_) {
            if (t >= e.t_start) v = e.value;
            else break;
        }
        return v;
    }

    // Exact average of the zero-extended source over (t0, t1).
    double window_average(double t0, double t1) const {
        if (!(t1 > t0)) throw std::invalid_argument("source: empty window");
        // breakpoints inside the window
        std::vector<double> ts = {t0, t1};
        for (const auto& e : entries_)
            if (e.t_start > t0 && e.t_start < t1) ts.push_back(e.t_start);
        if (support_end_ > t0 && support_end_ < t1) ts.push_back(support_end_);
        if (0.0 > t0 && 0.0 < t1) ts.push_back(0.0);
        std::sort(ts.begin(), ts.end());
        double acc = 0.0;
        for (size_t i = 0; i + 1 < ts.size(); ++i) {
            double mid = 0.5 * (ts[i] + ts[i + 1]);
            acc += value_at(mid) * (ts[i + 1] - ts[i]);
        }
        return acc / (t1 - t0);
    }

    // (A6) for table sources: the source must eventually sit at u_infinity.
    bool eventually_equals_u_infinity(double tol = 0.0) const {
        if (support_end_ < std::numeric_limits<double>::infinity())
            return std::abs(u_infinity_) <= tol;
        return std::abs(entries_.back().value - u_infinity_) <= tol;
    }

private:
    std::vector<SourceEntry> entries_;
    double u_infinity_ = 0.0;
    double support_end_ = std::numeric_limits<double>::infinity();
};

struct ModelSpec {
    double c = 1.0;
    double nu = 0.2;
    double delta_star = 0.1;
    GammaSmooth gamma = GammaSmooth::none();
    SurfaceFn g = SurfaceFn::scaled_sq_difference(0.5);
    SurfaceFn alpha0 = SurfaceFn::constant(1.0);
    SurfaceFn alpha = SurfaceFn::offset_eta_sq(0.1);
    SurfaceFn beta = SurfaceFn::constant(1.0);
    Source source = Source::constant(0.0, 0.0);
    bool relaxed_assumptions = false;

    static ModelSpec defaults() { return ModelSpec{}; }
};

struct ValidationIssue {
    std::string assumption;  // e.g. "A2"
    std::string detail;
    double margin;  // positive = violation size
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    double worst_margin = 0.0;
    bool pass = true;

    std::string summary() const {
        std::ostringstream os;
        os << (pass ? "model validation: PASS" : "model validation: FAIL");
        for (const auto& i : issues)
            os << "\n  " << i.assumption << ": " << i.detail << " (margin " << i.margin << ")";
        return os.str();
    }
};

// Samples (A2)-(A4) on a tensor grid over [0,1]^2. A fixed 16-point base grid
// is always included so refining the sampling never hides a finding.
inline ValidationReport validate(const ModelSpec& spec, int samples_per_axis = 64) {
    if (samples_per_axis < 16) throw std::invalid_argument("validate: samples_per_axis >= 16");
    ValidationReport rep;
    const double tol = 1e-12;

    auto add = [&](const std::string& a, const std::string& d, double margin) {
        rep.issues.push_back({a, d, margin});
        rep.worst_margin = std::max(rep.worst_margin, margin);
        rep.pass = false;
    };

    std::vector<double> pts;
    for (int i = 0; i < 16; ++i) pts.push_back(i / 15.0);
    for (int i = 0; i < samples_per_axis; ++i) pts.push_back(i / double(samples_per_axis - 1));
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    if (!(spec.delta_star > 0.0 && spec.delta_star < 1.0))
        add("A2", "delta_star must lie in (0,1)", 1.0);
    if (spec.nu < 0.0) add("A0", "nu must be >= 0", -spec.nu);

    // A2: positivity above delta_star
    double inf_weights = std::numeric_limits<double>::infinity();
    for (double w : pts)
        for (double e : pts)
            inf_weights = std::min({inf_weights, spec.alpha0.value(w, e), spec.alpha.value(w, e),
                                    spec.beta.value(w, e)});
    if (inf_weights < spec.delta_star - tol)
        add("A2", "inf of alpha0/alpha/beta on [0,1]^2 falls below delta_star",
            spec.delta_star - inf_weights);

    // A2: convexity of alpha and beta (midpoint rule on sampled pairs)
    auto convex_violation = [&](const SurfaceFn& f) {
        double worst = 0.0;
        for (size_t i = 0; i < pts.size(); i += 3)
            for (size_t j = 0; j < pts.size(); j += 3)
                for (size_t k = 0; k < pts.size(); k += 5)
                    for (size_t l = 0; l < pts.size(); l += 5) {
                        double mw = 0.5 * (pts[i] + pts[k]), me = 0.5 * (pts[j] + pts[l]);
                        double lhs = f.value(mw, me);
                        double rhs = 0.5 * (f.value(pts[i], pts[j]) + f.value(pts[k], pts[l]));
                        worst = std::max(worst, lhs - rhs);
                    }
        return worst;
    };
    double va = convex_violation(spec.alpha);
    if (va > tol) add("A2", "alpha not convex on [0,1]^2", va);
    double vb = convex_violation(spec.beta);
    if (vb > tol) add("A2", "beta not convex on [0,1]^2", vb);

    // A2: eta-derivative sign conditions at eta = 0 and eta = 1
    for (double w : pts) {
        if (spec.alpha.grad(w, 0.0)[1] > tol) add("A2", "alpha_eta(w,0) > 0", spec.alpha.grad(w, 0.0)[1]);
        if (spec.beta.grad(w, 0.0)[1] > tol) add("A2", "beta_eta(w,0) > 0", spec.beta.grad(w, 0.0)[1]);
        if (spec.alpha.grad(w, 1.0)[1] < -tol) add("A2", "alpha_eta(w,1) < 0", -spec.alpha.grad(w, 1.0)[1]);
        if (spec.beta.grad(w, 1.0)[1] < -tol) add("A2", "beta_eta(w,1) < 0", -spec.beta.grad(w, 1.0)[1]);
        if (rep.issues.size() > 64) break;  // enough counterexamples
    }

    // A4: g >= 0 and eta-derivative signs
    double gmin = std::numeric_limits<double>::infinity();
    for (double w : pts)
        for (double e : pts) gmin = std::min(gmin, spec.g.value(w, e));
    if (gmin < -tol) {
        if (spec.relaxed_assumptions)
            rep.issues.push_back({"A4", "g takes negative values (allowed: relaxed assumptions)", 0.0});
        else
            add("A4", "g must be nonnegative on [0,1]^2", -gmin);
    }
    double worst_g0 = 0.0, worst_g1 = 0.0;
    for (double w : pts) {
        worst_g0 = std::max(worst_g0, spec.g.grad(w, 0.0)[1]);
        worst_g1 = std::max(worst_g1, -spec.g.grad(w, 1.0)[1]);
    }
    if (worst_g0 > tol) add("A4", "g_eta(w,0) > 0 for some w", worst_g0);
    if (worst_g1 > tol) add("A4", "g_eta(w,1) < 0 for some w", worst_g1);

    return rep;
}

// |g|_{C^2([0,1]^2)} with the max-over-derivatives convention, sampled.
inline double g_c2_norm(const ModelSpec& spec, int samples_per_axis = 64) {
    int k = samples_per_axis;
    return std::max({spec.g.sup_value(k), spec.g.sup_grad(k), spec.g.sup_hess(k)});
}

// h1_dagger = 1 / (2 (1 v |g|_{C^2}))
inline double step_bound(const ModelSpec& spec, int samples_per_axis = 64) {
    return 1.0 / (2.0 * std::max(1.0, g_c2_norm(spec, samples_per_axis)));
}

struct DerivedConstants {
    double h1_dagger;
    double R_star, A_star, B_star, C_star;
    double nu_star;
};

inline DerivedConstants derived_constants(const ModelSpec& spec, double theta0_sup,
                                          double domain_measure, int samples_per_axis = 64) {
    const int k = samples_per_axis;
    const double d = spec.delta_star;
    const double a0_c = spec.alpha0.sup_value(k);
    const double a0_w1inf = std::max(a0_c, spec.alpha0.sup_grad(k));
    const double alpha_c = spec.alpha.sup_value(k);
    const double alpha_c1 = std::max(alpha_c, spec.alpha.sup_grad(k));
    const double beta_c = spec.beta.sup_value(k);
    const double gamma_inf = spec.gamma.sup_on_unit_interval();
    const double g_w2inf = std::max({spec.g.sup_value(k), spec.g.sup_grad(k), spec.g.sup_hess(k)});

    DerivedConstants out;
    out.h1_dagger = step_bound(spec, k);
    double prod = (1.0 + a0_w1inf) * (1.0 + alpha_c1) * (1.0 + beta_c) * (1.0 + gamma_inf) *
                  (1.0 + g_w2inf) * (1.0 + theta0_sup) * (1.0 + domain_measure);
    out.R_star = prod * prod / std::pow(d, 4);
    out.A_star = 2.0 * a0_c * std::max(alpha_c, beta_c) / d;
    out.B_star = std::min({0.5, d / alpha_c, d / beta_c});
    out.C_star = 4.0e4 * std::pow(out.R_star, 5);
    out.nu_star =
        0.99 * std::sqrt(std::min(1.0 / (128.0 * a0_c * out.A_star * out.R_star), 0.5));
    return out;
}

// u_i = (1/h) * integral of the zero-extended source over ((i-1)h, ih).
inline Field sample_source(const ModelSpec& spec, int i, double h, const Grid& grid) {
    if (!(h > 0.0)) throw std::invalid_argument("sample_source: h must be positive");
    if (i < 1) throw std::invalid_argument("sample_source: step index starts at 1");
    double avg = spec.source.window_average((i - 1) * h, i * h);
    return constant_field(grid, avg);
}

struct InitialData {
    FieldPair v0;
    Field theta0;
    double theta0_sup = 0.0;

    static InitialData of(FieldPair v, Field theta) {
        InitialData d;
        d.theta0_sup = max_abs(theta);
        d.v0 = std::move(v);
        d.theta0 = std::move(theta);
        return d;
    }
};

// D0 membership: 0 <= w, eta <= 1 and bounded theta.
inline bool in_d0(const InitialData& init) {
    for (double v : init.v0.w.values)
        if (v < 0.0 || v > 1.0) return false;
    for (double v : init.v0.eta.values)
        if (v < 0.0 || v > 1.0) return false;
    return all_finite(init.theta0);
}

}  // namespace kwc
