// energy.hpp
// Discrete energies: the regularized weighted-TV functional Phi, the free
// energy F_{nu,sigma} with per-term breakdown, the temperature-coupled
// variant, weighted/generalized weighted total variation, and the analytic
// gradient of every smooth part.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "kwc/grid.hpp"
#include "kwc/model.hpp"
#include "kwc/regnorm.hpp"

namespace kwc {

inline Field evaluate_on_cells(const SurfaceFn& f, const FieldPair& v) {
    Field out(v.w.grid);
    for (int i = 0; i < out.size(); ++i) out[i] = f.value(v.w[i], v.eta[i]);
    return out;
}

// Cell-assembled theta data: n_sigma[c] = half-sum over adjacent faces of
// |grad theta|_sigma, grad_sq[c] likewise for the squared gradient. Summing
// cell weights against these reproduces the face quadrature of Phi exactly.
struct ThetaWeights {
    Field n_sigma;
    Field grad_sq;
};

inline ThetaWeights theta_weights(const Field& theta, const TvNorm& norm) {
    FaceData g = face_gradient(theta);
    ThetaWeights out{Field(theta.grid, 0.0), Field(theta.grid, 0.0)};
    for (int a = 0; a < theta.grid.dim(); ++a) {
        const auto& qa = g.axis[a];
        theta.grid.for_each_face(a, [&](int fi, int lo, int hi) {
            double p = qa[fi];
            double nval = 0.5 * norm.radial(std::abs(p));
            double sq = 0.5 * p * p;
            out.n_sigma[lo] += nval;
            out.n_sigma[hi] += nval;
            out.grad_sq[lo] += sq;
            out.grad_sq[hi] += sq;
        });
    }
    return out;
}

// Phi_nu^sigma(v; theta) = sum over faces of m*[avg(alpha)*|grad|_sigma
//                                              + nu^2*avg(beta)*|grad|^2].
inline double phi(const FieldPair& v, const Field& theta, const ModelSpec& spec,
                  const TvNorm& norm, double nu) {
    require_same_grid(v.w.grid, theta.grid, "phi");
    ThetaWeights tw = theta_weights(theta, norm);
    double acc = 0.0;
    for (int i = 0; i < theta.size(); ++i) {
        double a = spec.alpha.value(v.w[i], v.eta[i]);
        double b = spec.beta.value(v.w[i], v.eta[i]);
        acc += a * tw.n_sigma[i] + nu * nu * b * tw.grad_sq[i];
    }
    return acc * theta.grid.cell_measure();
}

inline double phi(const FieldPair& v, const Field& theta, const ModelSpec& spec,
                  const TvNorm& norm) {
    return phi(v, theta, spec, norm, spec.nu);
}

struct EnergyBreakdown {
    double dirichlet_v = 0.0;      // 0.5 |grad v|^2
    double potential_gamma = 0.0;  // integral of gamma smooth part (indicator adds 0 or inf)
    double interaction_g = 0.0;    // integral of g
    double weighted_tv = 0.0;      // integral alpha(v)|grad theta|_sigma
    double theta_dirichlet = 0.0;  // nu^2 integral beta(v)|grad theta|^2
    double total = 0.0;
    double coupling = 0.0;  // c * (u, w); reported separately, not in total
    bool admissible = true; // v inside [0,1]^2 (indicator finite)
};

inline double dirichlet_energy(const Field& f) {
    FaceData g = face_gradient(f);
    return 0.5 * face_inner(g, g);
}

inline EnergyBreakdown free_energy(const FieldPair& v, const Field& theta, const ModelSpec& spec,
                                   const TvNorm& norm) {
    require_same_grid(v.w.grid, theta.grid, "free_energy");
    EnergyBreakdown out;
    const double m = theta.grid.cell_measure();
    const double box_tol = 1e-12;

    out.dirichlet_v = dirichlet_energy(v.w) + dirichlet_energy(v.eta);
    for (int i = 0; i < theta.size(); ++i) {
        double w = v.w[i], e = v.eta[i];
        if (w < -box_tol || w > 1.0 + box_tol || e < -box_tol || e > 1.0 + box_tol)
            out.admissible = false;
        out.potential_gamma += spec.gamma.value(w) * m;
        out.interaction_g += spec.g.value(w, e) * m;
    }
    ThetaWeights tw = theta_weights(theta, norm);
    for (int i = 0; i < theta.size(); ++i) {
        double a = spec.alpha.value(v.w[i], v.eta[i]);
        double b = spec.beta.value(v.w[i], v.eta[i]);
        out.weighted_tv += a * tw.n_sigma[i] * m;
        out.theta_dirichlet += spec.nu * spec.nu * b * tw.grad_sq[i] * m;
    }
    out.total = out.admissible ? out.dirichlet_v + out.potential_gamma + out.interaction_g +
                                     out.weighted_tv + out.theta_dirichlet
                               : std::numeric_limits<double>::infinity();
    return out;
}

inline double gibbs_energy(const Field& u, const FieldPair& v, const Field& theta,
                           const ModelSpec& spec, const TvNorm& norm) {
    EnergyBreakdown b = free_energy(v, theta, spec, norm);
    return b.total + spec.c * inner(u, v.w);
}

// Exact (sigma = 0) total variation under the face quadrature.
inline double total_variation(const Field& theta) {
    FaceData g = face_gradient(theta);
    double s = 0.0;
    for (int a = 0; a < theta.grid.dim(); ++a)
        for (double p : g.axis[a]) s += std::abs(p);
    return s * theta.grid.cell_measure();
}

// Var_rho(theta) with a nonnegative cell weight rho.
inline double weighted_tv(const Field& rho, const Field& theta, const TvNorm& norm) {
    require_same_grid(rho.grid, theta.grid, "weighted_tv");
    for (double r : rho.values)
        if (r < 0.0) throw std::invalid_argument("weighted_tv: weight must be nonnegative");
    ThetaWeights tw = theta_weights(theta, norm);
    double s = 0.0;
    for (int i = 0; i < rho.size(); ++i) s += rho[i] * tw.n_sigma[i];
    return s * rho.grid.cell_measure();
}

// [rho |D theta|] for sign-changing rho, via positive/negative parts.
inline double signed_weighted_tv(const Field& rho, const Field& theta, const TvNorm& norm) {
    require_same_grid(rho.grid, theta.grid, "signed_weighted_tv");
    ThetaWeights tw = theta_weights(theta, norm);
    double pos = 0.0, neg = 0.0;
    for (int i = 0; i < rho.size(); ++i) {
        double r = rho[i];
        if (r >= 0.0) pos += r * tw.n_sigma[i];
        else neg += -r * tw.n_sigma[i];
    }
    return (pos - neg) * rho.grid.cell_measure();
}

// Analytic first variation of the free energy. The v part is the field
//   -Lap v + grad_gamma_s + grad g(v) + grad alpha(v)*N + nu^2 grad beta(v)*Q,
// the theta part the field -div(D grad theta) with the face diffusivity
//   D = avg(alpha)*(n'(|p|)/|p|) + 2 nu^2 avg(beta).
// Finite differences of free_energy against a cell value recover measure()
// times these fields. Requires a regularized norm (the exact-TV gradient is
// undefined).
inline std::pair<FieldPair, Field> energy_gradient(const FieldPair& v, const Field& theta,
                                                   const ModelSpec& spec, const TvNorm& norm) {
    if (norm.is_exact())
        throw std::invalid_argument("energy_gradient: exact TV has no gradient; use sigma > 0");
    require_same_grid(v.w.grid, theta.grid, "energy_gradient");
    const RegularizedNorm& rn = norm.regularized();
    const double nu2 = spec.nu * spec.nu;

    ThetaWeights tw = theta_weights(theta, norm);
    Field lw = neumann_laplacian(v.w);
    Field le = neumann_laplacian(v.eta);
    FieldPair dv{Field(v.w.grid), Field(v.w.grid)};
    for (int i = 0; i < theta.size(); ++i) {
        auto ga = spec.alpha.grad(v.w[i], v.eta[i]);
        auto gb = spec.beta.grad(v.w[i], v.eta[i]);
        auto gg = spec.g.grad(v.w[i], v.eta[i]);
        dv.w[i] = -lw[i] + spec.gamma.deriv(v.w[i]) + gg[0] + ga[0] * tw.n_sigma[i] +
                  nu2 * gb[0] * tw.grad_sq[i];
        dv.eta[i] = -le[i] + gg[1] + ga[1] * tw.n_sigma[i] + nu2 * gb[1] * tw.grad_sq[i];
    }

    FaceData grad = face_gradient(theta);
    FaceData flux(theta.grid);
    for (int a = 0; a < theta.grid.dim(); ++a) {
        const auto& pa = grad.axis[a];
        auto& fa = flux.axis[a];
        theta.grid.for_each_face(a, [&](int fi, int lo, int hi) {
            double p = pa[fi];
            double alpha_avg = 0.5 * (spec.alpha.value(v.w[lo], v.eta[lo]) +
                                      spec.alpha.value(v.w[hi], v.eta[hi]));
            double beta_avg = 0.5 * (spec.beta.value(v.w[lo], v.eta[lo]) +
                                     spec.beta.value(v.w[hi], v.eta[hi]));
            fa[fi] = (alpha_avg * rn.slope_ratio(std::abs(p)) + 2.0 * nu2 * beta_avg) * p;
        });
    }
    Field dtheta = face_divergence(flux);
    for (double& x : dtheta.values) x = -x;
    return {std::move(dv), std::move(dtheta)};
}

}  // namespace kwc
