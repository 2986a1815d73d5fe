// regnorm.hpp
// The regularized Euclidean norm family {|.|_sigma}: five convex C^1
// approximations with closed-form values, gradients, and growth-bound
// witnesses (q0, q1, r0, r1), plus a sampling-based axiom verifier.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kwc {

enum class NormFamily { hyperbola, yosida, tanh_type, arctan_type, p_growth };

inline const char* family_name(NormFamily f) {
    switch (f) {
        case NormFamily::hyperbola: return "hyperbola";
        case NormFamily::yosida: return "yosida";
        case NormFamily::tanh_type: return "tanh";
        case NormFamily::arctan_type: return "arctan";
        case NormFamily::p_growth: return "p_growth";
    }
    return "?";
}

inline NormFamily family_from_name(const std::string& s) {
    if (s == "hyperbola") return NormFamily::hyperbola;
    if (s == "yosida") return NormFamily::yosida;
    if (s == "tanh") return NormFamily::tanh_type;
    if (s == "arctan") return NormFamily::arctan_type;
    if (s == "p_growth") return NormFamily::p_growth;
    throw std::invalid_argument("unknown norm family: " + s);
}

// Witnesses for the lower bound |xi|_sigma >= q0|xi| - r0 and the gradient
// growth |grad(xi)| <= q1|xi|^r1.
struct BoundWitness {
    double q0, q1, r0, r1;
};

// ln(cosh x) without overflow for large |x|.
inline double log_cosh(double x) {
    double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

class RegularizedNorm {
public:
    RegularizedNorm(NormFamily family, double sigma, double p_exponent = 0.0)
        : family_(family), sigma_(sigma) {
        if (!(sigma > 0.0 && sigma <= 1.0))
            throw std::invalid_argument("regularized norm: sigma must lie in (0,1]");
        if (family == NormFamily::p_growth) {
            p_ = p_exponent > 0.0 ? p_exponent : 1.0 + sigma;  // p(sigma) -> 1 as sigma -> 0
            if (!(p_ > 1.0)) throw std::invalid_argument("p_growth: p must exceed 1");
        }
    }

    NormFamily family() const { return family_; }
    double sigma() const { return sigma_; }
    double p() const { return p_; }

    // value as a function of r = |xi|
    double radial(double r) const {
        const double s = sigma_;
        switch (family_) {
            case NormFamily::hyperbola: return std::sqrt(r * r + s * s) - s;
            case NormFamily::yosida:  // Moreau envelope of |.| (Huber)
                return r <= s ? r * r / (2.0 * s) : r - 0.5 * s;
            case NormFamily::tanh_type: return s * log_cosh(r / s);
            case NormFamily::arctan_type: {
                double x = r / s;
                return (2.0 / M_PI) * (r * std::atan(x) - 0.5 * s * std::log1p(x * x));
            }
            case NormFamily::p_growth: return std::pow(r, p_) / p_;
        }
        return 0.0;
    }

    // d/dr of radial
    double radial_slope(double r) const {
        const double s = sigma_;
        switch (family_) {
            case NormFamily::hyperbola: return r / std::sqrt(r * r + s * s);
            case NormFamily::yosida: return r <= s ? r / s : 1.0;
            case NormFamily::tanh_type: return std::tanh(r / s);
            case NormFamily::arctan_type: return (2.0 / M_PI) * std::atan(r / s);
            case NormFamily::p_growth: return std::pow(r, p_ - 1.0);
        }
        return 0.0;
    }

    // radial_slope(r)/r with its limit at r=0 where that limit is finite.
    // For p_growth with p<2 the ratio is unbounded at 0; the face flux it
    // multiplies vanishes there, so a floored value is only ever used as a
    // lagged diffusivity.
    double slope_ratio(double r) const {
        const double s = sigma_;
        switch (family_) {
            case NormFamily::hyperbola: return 1.0 / std::sqrt(r * r + s * s);
            case NormFamily::yosida: return 1.0 / std::max(r, s);
            case NormFamily::tanh_type: return r < 1e-8 * s ? 1.0 / s : std::tanh(r / s) / r;
            case NormFamily::arctan_type:
                return r < 1e-8 * s ? 2.0 / (M_PI * s) : (2.0 / M_PI) * std::atan(r / s) / r;
            case NormFamily::p_growth: return std::pow(std::max(r, 1e-12), p_ - 2.0);
        }
        return 0.0;
    }

    // d^2/dr^2 of radial (piecewise for yosida); nonnegative by convexity
    double radial_curvature(double r) const {
        const double s = sigma_;
        switch (family_) {
            case NormFamily::hyperbola: {
                double q = r * r + s * s;
                return s * s / (q * std::sqrt(q));
            }
            case NormFamily::yosida: return r <= s ? 1.0 / s : 0.0;
            case NormFamily::tanh_type: {
                double t = std::tanh(r / s);
                return (1.0 - t * t) / s;
            }
            case NormFamily::arctan_type: return (2.0 / M_PI) * s / (s * s + r * r);
            case NormFamily::p_growth:
                return (p_ - 1.0) * std::pow(std::max(r, 1e-12), p_ - 2.0);
        }
        return 0.0;
    }

    double value1(double x) const { return radial(std::abs(x)); }
    double value2(double x, double y) const { return radial(std::hypot(x, y)); }

    double gradient1(double x) const { return x == 0.0 ? 0.0 : radial_slope(std::abs(x)) * (x > 0 ? 1.0 : -1.0); }

    std::array<double, 2> gradient2(double x, double y) const {
        double r = std::hypot(x, y);
        if (r == 0.0) return {0.0, 0.0};
        double s = radial_slope(r) / r;
        return {s * x, s * y};
    }

    BoundWitness witness() const {
        const double s = sigma_;
        switch (family_) {
            case NormFamily::hyperbola: return {1.0, 1.0, s, 0.0};
            case NormFamily::yosida: return {1.0, 1.0, 0.5 * s, 0.0};
            case NormFamily::tanh_type: return {1.0, 1.0, s * std::log(2.0), 0.0};
            case NormFamily::arctan_type:
                // sup of q0*r - n(r) sits at r* = s*cot(pi*s/2); closed form below
                return {1.0 - s, 1.0, -(2.0 * s / M_PI) * std::log(std::sin(M_PI * s / 2.0)), 0.0};
            case NormFamily::p_growth: return {1.0, 1.0, (p_ - 1.0) / p_, p_ - 1.0};
        }
        return {1, 1, 0, 0};
    }

private:
    NormFamily family_;
    double sigma_;
    double p_ = 0.0;
};

// Either the exact Euclidean norm (sigma = 0 branch, diagnostics only) or a
// RegularizedNorm.
class TvNorm {
public:
    static TvNorm exact() { return TvNorm(); }
    TvNorm(const RegularizedNorm& n) : has_norm_(true), norm_(n) {}  // NOLINT(implicit)

    bool is_exact() const { return !has_norm_; }
    const RegularizedNorm& regularized() const {
        if (!has_norm_) throw std::logic_error("TvNorm: exact branch has no RegularizedNorm");
        return norm_;
    }
    double radial(double r) const { return has_norm_ ? norm_.radial(r) : r; }

private:
    TvNorm() = default;
    bool has_norm_ = false;
    RegularizedNorm norm_{NormFamily::hyperbola, 0.5};
};

struct AxiomReport {
    double worst_convexity = 0.0;   // midpoint-rule violation
    double worst_lower = 0.0;       // q0|xi| - r0 - value
    double worst_gradient = 0.0;    // |grad| - q1|xi|^r1
    double worst_chain_low = 0.0;   // value - grad.xi
    double worst_chain_high = 0.0;  // grad.xi - q1|xi|^{1+r1}
    double tolerance = 1e-10;
    bool pass = false;
    std::string worst_check;
    std::array<double, 2> counterexample{0.0, 0.0};

    std::string summary() const {
        std::ostringstream os;
        os << (pass ? "PASS" : "FAIL")
           << " convexity=" << worst_convexity << " lower=" << worst_lower
           << " gradient=" << worst_gradient << " chain_low=" << worst_chain_low
           << " chain_high=" << worst_chain_high;
        if (!pass)
            os << " worst=" << worst_check << " at (" << counterexample[0] << ","
               << counterexample[1] << ")";
        return os.str();
    }
};

// Samples |xi| log-uniformly over [1e-6, 10] plus the origin and checks
// convexity (midpoint rule), the AP2 bounds against the witnesses, and the
// chain value <= grad.xi <= q1|xi|^{1+r1}. Failures are reported, not thrown.
inline AxiomReport verify_axioms(const RegularizedNorm& n, int sample_count,
                                 std::uint64_t seed = 20240513,
                                 const BoundWitness* witness_override = nullptr) {
    if (sample_count < 100) throw std::invalid_argument("verify_axioms: need >= 100 samples");
    const BoundWitness w = witness_override ? *witness_override : n.witness();
    AxiomReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto track = [&](double violation, const char* check, double x, double y) {
        double* slot = nullptr;
        if (std::string(check) == "convexity") slot = &rep.worst_convexity;
        else if (std::string(check) == "lower") slot = &rep.worst_lower;
        else if (std::string(check) == "gradient") slot = &rep.worst_gradient;
        else if (std::string(check) == "chain_low") slot = &rep.worst_chain_low;
        else slot = &rep.worst_chain_high;
        if (violation > *slot) {
            *slot = violation;
            if (violation > rep.tolerance && rep.worst_check.empty()) {
                rep.worst_check = check;
                rep.counterexample = {x, y};
            }
        }
    };

    auto sample_point = [&](bool allow_origin) -> std::array<double, 2> {
        if (allow_origin && unif(rng) < 0.01) return {0.0, 0.0};
        double r = std::pow(10.0, -6.0 + 7.0 * unif(rng));  // 1e-6 .. 10
        double phi = 2.0 * M_PI * unif(rng);
        return {r * std::cos(phi), r * std::sin(phi)};
    };

    for (int k = 0; k < sample_count; ++k) {
        auto a = sample_point(true);
        double r = std::hypot(a[0], a[1]);
        double val = n.value2(a[0], a[1]);
        auto g = n.gradient2(a[0], a[1]);
        double gnorm = std::hypot(g[0], g[1]);
        double dot = g[0] * a[0] + g[1] * a[1];

        track(w.q0 * r - w.r0 - val, "lower", a[0], a[1]);
        track(gnorm - w.q1 * std::pow(r, w.r1), "gradient", a[0], a[1]);
        track(val - dot, "chain_low", a[0], a[1]);
        track(dot - w.q1 * std::pow(r, 1.0 + w.r1), "chain_high", a[0], a[1]);

        auto b = sample_point(false);
        double mid = n.value2(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
        track(mid - 0.5 * (n.value2(a[0], a[1]) + n.value2(b[0], b[1])), "convexity", a[0], a[1]);
    }

    rep.pass = rep.worst_convexity <= rep.tolerance && rep.worst_lower <= rep.tolerance &&
               rep.worst_gradient <= rep.tolerance && rep.worst_chain_low <= rep.tolerance &&
               rep.worst_chain_high <= rep.tolerance;
    return rep;
}

}  // namespace kwc
