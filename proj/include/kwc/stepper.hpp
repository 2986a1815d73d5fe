// stepper.hpp
// One time step of the scheme: the box-constrained v-problem solved by
// projected gradient with Barzilai-Borwein steps, then the strictly convex
// theta-problem solved by lagged-diffusivity iteration with direct banded
// SPD solves and a Newton polish. Trajectory orchestration and the three
// time interpolants.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kwc/energy.hpp"
#include "kwc/grid.hpp"
#include "kwc/model.hpp"
#include "kwc/regnorm.hpp"

namespace kwc {

struct Tolerances {
    double v_tol = 1e-9;       // projected-gradient fixed-point residual, Linf
    double theta_tol = 1e-10;  // successive Picard iterates, Linf
    int v_cap = 10000;
    int picard_cap = 400;
};

struct StepFailure : std::runtime_error {
    StepFailure(const std::string& what, double residual_, int iterations_)
        : std::runtime_error(what), residual(residual_), iterations(iterations_) {}
    double residual;
    int iterations;
};

namespace detail {

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// v-step objective in field form (cell measure divided out):
//   J(v)/m = (1/2h)|v - v_prev|^2 + (1/2)|grad v|^2/m-normalized
//          + gamma_s(w) + g(v) + c u w + alpha(v) N + nu^2 beta(v) Q
// with N, Q the cell-assembled theta_prev weights.
struct VProblem {
    const ModelSpec& spec;
    const FieldPair& v_prev;
    const Field& u;
    double h;
    Field n_prev, q_prev;  // N(theta_prev), Q(theta_prev)
    double nu2;

    VProblem(const ModelSpec& s, const FieldPair& vp, const Field& theta_prev, const Field& u_i,
             double h_, const TvNorm& norm)
        : spec(s), v_prev(vp), u(u_i), h(h_), nu2(s.nu * s.nu) {
        ThetaWeights tw = theta_weights(theta_prev, norm);
        n_prev = std::move(tw.n_sigma);
        q_prev = std::move(tw.grad_sq);
    }

    double objective(const FieldPair& v) const {
        const Grid& grid = v.w.grid;
        double acc = 0.0;
        for (int i = 0; i < v.w.size(); ++i) {
            double dw = v.w[i] - v_prev.w[i], de = v.eta[i] - v_prev.eta[i];
            acc += (dw * dw + de * de) / (2.0 * h);
            acc += spec.gamma.value(v.w[i]) + spec.g.value(v.w[i], v.eta[i]) +
                   spec.c * u[i] * v.w[i];
            acc += spec.alpha.value(v.w[i], v.eta[i]) * n_prev[i] +
                   nu2 * spec.beta.value(v.w[i], v.eta[i]) * q_prev[i];
        }
        return acc + (dirichlet_energy(v.w) + dirichlet_energy(v.eta)) / grid.cell_measure();
    }

    FieldPair gradient(const FieldPair& v) const {
        Field lw = neumann_laplacian(v.w);
        Field le = neumann_laplacian(v.eta);
        FieldPair g{Field(v.w.grid), Field(v.w.grid)};
        for (int i = 0; i < v.w.size(); ++i) {
            auto gg = spec.g.grad(v.w[i], v.eta[i]);
            auto ga = spec.alpha.grad(v.w[i], v.eta[i]);
            auto gb = spec.beta.grad(v.w[i], v.eta[i]);
            g.w[i] = (v.w[i] - v_prev.w[i]) / h - lw[i] + spec.gamma.deriv(v.w[i]) + gg[0] +
                     spec.c * u[i] + ga[0] * n_prev[i] + nu2 * gb[0] * q_prev[i];
            g.eta[i] = (v.eta[i] - v_prev.eta[i]) / h - le[i] + gg[1] + ga[1] * n_prev[i] +
                       nu2 * gb[1] * q_prev[i];
        }
        return g;
    }
};

inline FieldPair project_step(const FieldPair& v, const FieldPair& g, double tau) {
    FieldPair out{Field(v.w.grid), Field(v.w.grid)};
    for (int i = 0; i < v.w.size(); ++i) {
        out.w[i] = clamp01(v.w[i] - tau * g.w[i]);
        out.eta[i] = clamp01(v.eta[i] - tau * g.eta[i]);
    }
    return out;
}

inline double projected_residual(const FieldPair& v, const FieldPair& g, double tau) {
    double r = 0.0;
    for (int i = 0; i < v.w.size(); ++i) {
        r = std::max(r, std::abs(v.w[i] - clamp01(v.w[i] - tau * g.w[i])));
        r = std::max(r, std::abs(v.eta[i] - clamp01(v.eta[i] - tau * g.eta[i])));
    }
    return r / tau;
}

inline double pair_dot(const FieldPair& a, const FieldPair& b) {
    double s = 0.0;
    for (int i = 0; i < a.w.size(); ++i) s += a.w[i] * b.w[i] + a.eta[i] * b.eta[i];
    return s;
}

inline FieldPair pair_diff(const FieldPair& a, const FieldPair& b) {
    FieldPair d{Field(a.w.grid), Field(a.w.grid)};
    for (int i = 0; i < a.w.size(); ++i) {
        d.w[i] = a.w[i] - b.w[i];
        d.eta[i] = a.eta[i] - b.eta[i];
    }
    return d;
}

// SPD band matrix in lower-band storage: a[j*n + i] = A(i+j, i), j = 0..bw.
struct BandMatrix {
    int n = 0, bw = 0;
    std::vector<double> a;

    BandMatrix(int n_, int bw_) : n(n_), bw(bw_), a((bw_ + 1) * size_t(n_), 0.0) {}
    double& at(int offset, int col) { return a[size_t(offset) * n + col]; }

    void cholesky() {
        for (int j = 0; j < n; ++j) {
            double d = a[size_t(0) * n + j];
            if (!(d > 0.0)) throw std::runtime_error("band cholesky: nonpositive pivot");
            double l = std::sqrt(d);
            a[size_t(0) * n + j] = l;
            int last = std::min(j + bw, n - 1);
            for (int i = j + 1; i <= last; ++i) a[size_t(i - j) * n + j] /= l;
            for (int k = j + 1; k <= last; ++k) {
                double ljk = a[size_t(k - j) * n + j];
                if (ljk == 0.0) continue;
                for (int i = k; i <= last; ++i)
                    a[size_t(i - k) * n + k] -= a[size_t(i - j) * n + j] * ljk;
            }
        }
    }

    // solves L L^T x = b in place (after cholesky)
    void solve(std::vector<double>& x) const {
        for (int i = 0; i < n; ++i) {
            double s = x[i];
            int first = std::max(0, i - bw);
            for (int j = first; j < i; ++j) s -= a[size_t(i - j) * n + j] * x[j];
            x[i] = s / a[size_t(0) * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = x[i];
            int last = std::min(n - 1, i + bw);
            for (int j = i + 1; j <= last; ++j) s -= a[size_t(j - i) * n + i] * x[j];
            x[i] = s / a[size_t(0) * n + i];
        }
    }
};

}  // namespace detail

// Solves the implicit v-problem: minimize the step functional over the box
// [0,1]^2 (the gamma indicator realized by projection). Requires h within the
// uniqueness regime h <= h1_dagger.
inline FieldPair v_step(const FieldPair& v_prev, const Field& theta_prev, const Field& u_i,
                        double h, const ModelSpec& spec, const TvNorm& norm, double tol = 1e-9,
                        int cap = 10000, int* iterations_out = nullptr) {
    double h1 = step_bound(spec);
    if (!(h > 0.0) || h > h1 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "v_step: h = " << h << " outside the uniqueness regime (0, " << h1 << "]";
        throw std::domain_error(os.str());
    }
    detail::VProblem prob(spec, v_prev, theta_prev, u_i, h, norm);

    FieldPair v = v_prev;
    for (int i = 0; i < v.w.size(); ++i) {
        v.w[i] = detail::clamp01(v.w[i]);
        v.eta[i] = detail::clamp01(v.eta[i]);
    }
    FieldPair g = prob.gradient(v);
    double J = prob.objective(v);
    double tau = h;

    if (detail::projected_residual(v, g, tau) <= tol) {
        if (iterations_out) *iterations_out = 0;
        return v;
    }

    double last_residual = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= cap; ++it) {
        // backtracked proximal-style sufficient decrease
        FieldPair cand;
        double Jc = 0.0;
        int halvings = 0;
        for (;; ++halvings) {
            cand = detail::project_step(v, g, tau);
            Jc = prob.objective(cand);
            FieldPair d = detail::pair_diff(cand, v);
            double lin = detail::pair_dot(g, d);
            double quad = detail::pair_dot(d, d) / (2.0 * tau);
            if (Jc <= J + lin + quad + 1e-14 * (1.0 + std::abs(J))) break;
            tau *= 0.5;
            if (halvings > 60)
                throw StepFailure("v_step: line search failed", last_residual, it);
        }
        FieldPair g_new = prob.gradient(cand);
        last_residual = detail::projected_residual(cand, g_new, tau);

        // Barzilai-Borwein step for the next round
        FieldPair s = detail::pair_diff(cand, v);
        FieldPair y = detail::pair_diff(g_new, g);
        double sy = detail::pair_dot(s, y);
        double ss = detail::pair_dot(s, s);
        double next_tau = sy > 1e-300 ? ss / sy : tau * 2.0;
        tau = std::min(std::max(next_tau, 1e-12), 1e12);

        v = std::move(cand);
        g = std::move(g_new);
        J = Jc;
        if (last_residual <= tol) {
            if (iterations_out) *iterations_out = it;
            return v;
        }
    }
    std::ostringstream os;
    os << "v_step: no convergence within " << cap << " iterations, residual " << last_residual;
    throw StepFailure(os.str(), last_residual, cap);
}

namespace detail {

// Assembles the SPD band matrix (1/h)*diag(a0) - div(coef grad .) for a given
// face coefficient and solves against rhs. Cells couple at offsets 1 and
// extent(1), so the bandwidth is extent(1) in 2D and 1 in 1D.
inline Field solve_diffusion_system(const Grid& grid, const Field& a0, double h,
                                    const FaceData& coef, const Field& rhs) {
    const int n = grid.cell_count();
    const int bw = grid.dim() == 2 ? grid.extent(1) : 1;
    BandMatrix A(n, bw);
    for (int i = 0; i < n; ++i) A.at(0, i) = a0[i] / h;
    for (int a = 0; a < grid.dim(); ++a) {
        const double inv2 = 1.0 / (grid.spacing(a) * grid.spacing(a));
        grid.for_each_face(a, [&](int fi, int clo, int chi) {
            double c = coef.axis[a][fi] * inv2;
            A.at(0, clo) += c;
            A.at(0, chi) += c;
            A.at(chi - clo, clo) -= c;
        });
    }
    A.cholesky();
    std::vector<double> x = rhs.values;
    A.solve(x);
    Field out(grid);
    out.values = std::move(x);
    return out;
}

}  // namespace detail

// Lagged-diffusivity solve of the theta-problem: the unique minimizer of
//   K(theta) = (1/2h)|sqrt(alpha0(v_i))(theta - theta_prev)|^2 + Phi(v_i; theta).
// Each outer iterate freezes the face diffusivity at the current gradient and
// solves the SPD M-matrix system directly (banded Cholesky), so the discrete
// max principle min theta_prev <= theta <= max theta_prev holds per iterate.
// A Newton polish with the exact face curvatures then drives the stationarity
// residual to machine scale; the system stays an M-matrix since the face
// energies are convex.
inline Field theta_step(const FieldPair& v_i, const Field& theta_prev, double h,
                        const ModelSpec& spec, const TvNorm& norm, double tol = 1e-10,
                        int picard_cap = 400, int* iterations_out = nullptr) {
    if (norm.is_exact())
        throw std::invalid_argument("theta_step: sigma = 0 unsupported inside the solver");
    if (!(h > 0.0)) throw std::invalid_argument("theta_step: h must be positive");
    const RegularizedNorm& rn = norm.regularized();
    const Grid& grid = theta_prev.grid;
    const double nu2 = spec.nu * spec.nu;

    Field a0 = evaluate_on_cells(spec.alpha0, v_i);
    Field alpha_c = evaluate_on_cells(spec.alpha, v_i);
    Field beta_c = evaluate_on_cells(spec.beta, v_i);

    Field rhs(grid);
    for (int i = 0; i < rhs.size(); ++i) rhs[i] = a0[i] * theta_prev[i] / h;

    auto face_coef = [&](const Field& z, bool curvature) {
        FaceData out(grid);
        FaceData gz = face_gradient(z);
        for (int a = 0; a < grid.dim(); ++a) {
            const auto& pa = gz.axis[a];
            grid.for_each_face(a, [&](int fi, int clo, int chi) {
                double abar = 0.5 * (alpha_c[clo] + alpha_c[chi]);
                double bbar = 0.5 * (beta_c[clo] + beta_c[chi]);
                double r = std::abs(pa[fi]);
                double nterm = curvature ? rn.radial_curvature(r) : rn.slope_ratio(r);
                out.axis[a][fi] = abar * nterm + 2.0 * nu2 * bbar;
            });
        }
        return out;
    };

    // stationarity residual (1/h) a0 (z - theta_prev) - div(flux(z))
    auto el_residual = [&](const Field& z) {
        FaceData flux = face_gradient(z);
        for (int a = 0; a < grid.dim(); ++a) {
            grid.for_each_face(a, [&](int fi, int clo, int chi) {
                double p = flux.axis[a][fi];
                double abar = 0.5 * (alpha_c[clo] + alpha_c[chi]);
                double bbar = 0.5 * (beta_c[clo] + beta_c[chi]);
                flux.axis[a][fi] = (abar * rn.slope_ratio(std::abs(p)) + 2.0 * nu2 * bbar) * p;
            });
        }
        Field div = face_divergence(flux);
        Field r(grid);
        for (int i = 0; i < r.size(); ++i) r[i] = a0[i] * (z[i] - theta_prev[i]) / h - div[i];
        return r;
    };

    auto k_objective = [&](const Field& z) {
        double fid = 0.0;
        for (int i = 0; i < z.size(); ++i) {
            double d = z[i] - theta_prev[i];
            fid += a0[i] * d * d;
        }
        fid *= grid.cell_measure() / (2.0 * h);
        return fid + phi(v_i, z, spec, norm, spec.nu);
    };

    Field z = theta_prev;
    const double lo = field_min(theta_prev), hi = field_max(theta_prev);
    const double resid_target =
        1e-12 * (1.0 + max_abs(theta_prev)) * (max_abs(a0) / h + 1.0);

    // Lagged-diffusivity sweeps alternate with Newton polishes: the lagged
    // solve contracts globally but slows down on near-kink faces, the Newton
    // direction is sharp there but its curvature degenerates on steep faces.
    int total_iters = 0;
    Field r = el_residual(z);
    for (int round = 0; round < 8 && max_abs(r) > resid_target; ++round) {
        int sweep = std::max(picard_cap / 8, 1);
        double best_delta = std::numeric_limits<double>::infinity();
        int stale = 0;
        for (int k = 0; k < sweep; ++k) {
            Field x = detail::solve_diffusion_system(grid, a0, h, face_coef(z, false), rhs);
            double delta = max_abs_diff(x, z);
            z = std::move(x);
            ++total_iters;
            if (delta <= tol) break;
            // near the exact-TV regime the lagged map settles into a tiny
            // limit cycle; stop sweeping once the increments stop shrinking
            if (delta < 0.9 * best_delta) {
                best_delta = delta;
                stale = 0;
            } else if (++stale >= 8) {
                break;
            }
        }
        r = el_residual(z);

        // Newton on the exact stationarity system (face-separable energy, so
        // the Hessian is the same band structure with curvature coefficients)
        double kz = k_objective(z);
        for (int it = 0; it < 25 && max_abs(r) > resid_target; ++it) {
            Field neg_r(grid);
            for (int i = 0; i < neg_r.size(); ++i) neg_r[i] = -r[i];
            Field delta = detail::solve_diffusion_system(grid, a0, h, face_coef(z, true), neg_r);
            double t = 1.0;
            Field cand(grid);
            bool moved = false;
            for (int bt = 0; bt < 40; ++bt) {
                for (int i = 0; i < cand.size(); ++i) cand[i] = z[i] + t * delta[i];
                double kc = k_objective(cand);
                if (kc <= kz + 1e-14 * (1.0 + std::abs(kz))) {
                    z = cand;
                    kz = kc;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            ++total_iters;
            if (!moved) break;  // at the numerical floor for this round
            r = el_residual(z);
        }
    }
    if (iterations_out) *iterations_out = total_iters;

    // discrete max principle, up to solver tolerance
    double excess = std::max(lo - field_min(z), field_max(z) - hi);
    if (excess > 1e-9)
        throw StepFailure("theta_step: max principle violated beyond tolerance", excess,
                          total_iters);
    return z;
}

struct StepRecord {
    int index = 0;
    double time = 0.0;
    FieldPair v;
    Field theta;
    Field u;  // the window-averaged source u_i (zero field at index 0)
    EnergyBreakdown energy;
    double v_increment_norm = 0.0;      // L2
    double theta_increment_norm = 0.0;  // L2
    int v_iterations = 0;
    int theta_iterations = 0;
    double dissipation_slack = 0.0;  // lhs - rhs of the per-step inequality at u_dagger = 0
};

struct Trajectory {
    ModelSpec spec;
    Grid grid;
    double h = 0.0;
    TvNorm norm = TvNorm::exact();
    double theta0_sup = 0.0;
    std::vector<StepRecord> records;
    bool aborted = false;
    std::string error;

    int steps() const { return static_cast<int>(records.size()) - 1; }
    double final_time() const { return records.empty() ? 0.0 : records.back().time; }
};

// |sqrt(alpha0(v)) f|^2_{L2}
inline double weighted_sq_norm(const ModelSpec& spec, const FieldPair& v, const Field& f) {
    double s = 0.0;
    for (int i = 0; i < f.size(); ++i) s += spec.alpha0.value(v.w[i], v.eta[i]) * f[i] * f[i];
    return s * f.grid.cell_measure();
}

// Both sides of the per-step dissipation inequality at step i for a given
// u_dagger; lhs <= rhs certifies the step.
inline std::pair<double, double> apdiss_sides(const Trajectory& traj, int i, const Field& u_dagger) {
    const StepRecord& cur = traj.records[i];
    const StepRecord& prev = traj.records[i - 1];
    const double h = traj.h;
    Field dtheta(cur.theta.grid);
    for (int k = 0; k < dtheta.size(); ++k) dtheta[k] = cur.theta[k] - prev.theta[k];
    Field du(cur.u.grid);
    for (int k = 0; k < du.size(); ++k) du[k] = cur.u[k] - u_dagger[k];

    double lhs = pair_increment_sq(cur.v, prev.v) / (2.0 * h) +
                 weighted_sq_norm(traj.spec, cur.v, dtheta) / h + cur.energy.total +
                 traj.spec.c * inner(u_dagger, cur.v.w);
    double rhs = prev.energy.total + traj.spec.c * inner(u_dagger, prev.v.w) +
                 traj.spec.c * traj.spec.c * h * inner(du, du);
    return {lhs, rhs};
}

inline StepRecord step(const StepRecord& state, const ModelSpec& spec, const TvNorm& norm,
                       double h, const Tolerances& tols) {
    StepRecord out;
    out.index = state.index + 1;
    out.time = out.index * h;
    out.u = sample_source(spec, out.index, h, state.theta.grid);
    out.v = v_step(state.v, state.theta, out.u, h, spec, norm, tols.v_tol, tols.v_cap,
                   &out.v_iterations);
    out.theta = theta_step(out.v, state.theta, h, spec, norm, tols.theta_tol, tols.picard_cap,
                           &out.theta_iterations);
    out.energy = free_energy(out.v, out.theta, spec, norm);
    out.energy.coupling = spec.c * inner(out.u, out.v.w);
    out.v_increment_norm = std::sqrt(pair_increment_sq(out.v, state.v));
    Field dtheta(out.theta.grid);
    for (int k = 0; k < dtheta.size(); ++k) dtheta[k] = out.theta[k] - state.theta[k];
    out.theta_increment_norm = l2_norm(dtheta);

    double lhs = pair_increment_sq(out.v, state.v) / (2.0 * h) +
                 weighted_sq_norm(spec, out.v, dtheta) / h + out.energy.total;
    double rhs = state.energy.total + spec.c * spec.c * h * inner(out.u, out.u);
    out.dissipation_slack = lhs - rhs;
    return out;
}

using StepHook = std::function<void(const StepRecord&)>;

inline Trajectory run(const ModelSpec& spec, const Grid& grid, const InitialData& init, double h,
                      int steps, const TvNorm& norm, const Tolerances& tols = Tolerances{},
                      const std::vector<StepHook>& hooks = {}) {
    if (!in_d0(init)) throw std::invalid_argument("run: initial data outside D0");
    require_same_grid(init.v0.w.grid, grid, "run");
    double h1 = step_bound(spec);
    if (!(h > 0.0) || h > h1 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "run: h = " << h << " exceeds h1_dagger = " << h1;
        throw std::domain_error(os.str());
    }

    Trajectory traj;
    traj.spec = spec;
    traj.grid = grid;
    traj.h = h;
    traj.norm = norm;
    traj.theta0_sup = init.theta0_sup;

    StepRecord first;
    first.index = 0;
    first.time = 0.0;
    first.v = init.v0;
    first.theta = init.theta0;
    first.u = Field(grid, 0.0);
    first.energy = free_energy(first.v, first.theta, spec, norm);
    traj.records.push_back(std::move(first));
    for (const auto& hk : hooks) hk(traj.records.back());

    for (int i = 1; i <= steps; ++i) {
        try {
            traj.records.push_back(step(traj.records.back(), spec, norm, h, tols));
        } catch (const StepFailure& e) {
            traj.aborted = true;
            traj.error = e.what();
            break;
        }
        for (const auto& hk : hooks) hk(traj.records.back());
    }
    return traj;
}

enum class InterpMode { backward, forward, linear };

// The three time interpolants; backward is right-constant, forward is
// left-constant, linear blends with weights (ih - t)/h and (t - (i-1)h)/h.
inline std::pair<FieldPair, Field> interpolate(const Trajectory& traj, double t, InterpMode mode) {
    const double h = traj.h;
    const int n = traj.steps();
    if (t < -1e-12 * h || t > (n + 1e-12) * h)
        throw std::out_of_range("interpolate: t outside the trajectory span");
    double ratio = t / h;
    auto rec = [&](int i) -> const StepRecord& {
        return traj.records[std::min(std::max(i, 0), n)];
    };
    switch (mode) {
        case InterpMode::backward: {
            int i = static_cast<int>(std::ceil(ratio - 1e-9));
            return {rec(i).v, rec(i).theta};
        }
        case InterpMode::forward: {
            int i = static_cast<int>(std::floor(ratio + 1e-9));
            return {rec(i).v, rec(i).theta};
        }
        case InterpMode::linear: {
            int i = static_cast<int>(std::ceil(ratio - 1e-9));
            if (i <= 0) return {rec(0).v, rec(0).theta};
            double wr = ratio - (i - 1);
            wr = std::min(std::max(wr, 0.0), 1.0);
            const StepRecord& a = rec(i - 1);
            const StepRecord& b = rec(i);
            FieldPair v{Field(traj.grid), Field(traj.grid)};
            Field theta(traj.grid);
            for (int k = 0; k < theta.size(); ++k) {
                v.w[k] = (1.0 - wr) * a.v.w[k] + wr * b.v.w[k];
                v.eta[k] = (1.0 - wr) * a.v.eta[k] + wr * b.v.eta[k];
                theta[k] = (1.0 - wr) * a.theta[k] + wr * b.theta[k];
            }
            return {std::move(v), std::move(theta)};
        }
    }
    throw std::logic_error("interpolate: unknown mode");
}

// The Lyapunov series J_i = F(v_i,theta_i) + c(u_dagger, w_i)
//                      - c^2 sum_{k<=i} h |u_k - u_dagger|^2.
inline std::vector<double> lyapunov_series(const Trajectory& traj, const Field& u_dagger) {
    std::vector<double> out;
    out.reserve(traj.records.size());
    double integral = 0.0;
    for (size_t i = 0; i < traj.records.size(); ++i) {
        const StepRecord& r = traj.records[i];
        if (i > 0) {
            Field du(r.u.grid);
            for (int k = 0; k < du.size(); ++k) du[k] = r.u[k] - u_dagger[k];
            integral += traj.h * inner(du, du);
        }
        out.push_back(r.energy.total + traj.spec.c * inner(u_dagger, r.v.w) -
                      traj.spec.c * traj.spec.c * integral);
    }
    return out;
}

}  // namespace kwc
