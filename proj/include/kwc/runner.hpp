// runner.hpp
// Run orchestration shared by the CLI and the tests: trace/snapshot output,
// post-run audits, saved-run re-auditing, and the sigma/h parameter sweeps
// with a small worker pool capped by KWC_THREADS.
#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kwc/config.hpp"
#include "kwc/diagnostics.hpp"
#include "kwc/energy.hpp"
#include "kwc/io.hpp"
#include "kwc/stepper.hpp"

namespace kwc {

namespace fs = std::filesystem;

inline int worker_pool_size(int jobs) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("KWC_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) cap = v;
    }
    return std::min(cap, std::max(jobs, 1));
}

template <class Fn>
inline void parallel_for(int jobs, Fn&& fn) {
    int workers = worker_pool_size(jobs);
    if (workers <= 1) {
        for (int i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

inline std::string snapshot_name(const char* what, int step) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06d.fld", what, step);
    return buf;
}

inline void write_snapshot_set(const fs::path& dir, const StepRecord& r) {
    write_field((dir / snapshot_name("w", r.index)).string(), r.v.w);
    write_field((dir / snapshot_name("eta", r.index)).string(), r.v.eta);
    write_field((dir / snapshot_name("theta", r.index)).string(), r.theta);
    write_pgm((dir / (snapshot_name("theta", r.index) + ".pgm")).string(), r.theta);
    write_pgm((dir / (snapshot_name("eta", r.index) + ".pgm")).string(), r.v.eta);
}

}  // namespace detail

struct RunOutcome {
    Trajectory traj;
    bool completed = false;
    bool audits_pass = true;
    std::string report;
    fs::path dir;

    int exit_code() const { return completed && audits_pass ? 0 : 1; }
};

// Executes the configured run under out_root/<output.dir>: resolved config
// copy, energy trace, snapshots at the configured cadence plus final, and the
// requested audits with u_dagger = u_infinity.
inline RunOutcome execute_run(const RunConfig& cfg, const std::string& out_root) {
    RunOutcome out;
    out.dir = fs::path(out_root) / cfg.output_dir;
    fs::create_directories(out.dir);
    {
        std::ofstream c(out.dir / "resolved_config.txt");
        c << render_config(cfg);
    }

    TvNorm norm = cfg.make_norm();
    Field u_inf = cfg.u_infinity_field();
    TraceWriter trace((out.dir / "trace.csv").string());

    double lyap_integral = 0.0;
    std::vector<StepHook> hooks;
    hooks.push_back([&](const StepRecord& r) {
        if (r.index > 0) {
            Field du(r.u.grid);
            for (int k = 0; k < du.size(); ++k) du[k] = r.u[k] - u_inf[k];
            lyap_integral += cfg.h * inner(du, du);
        }
        double lyap = r.energy.total + cfg.spec.c * inner(u_inf, r.v.w) -
                      cfg.spec.c * cfg.spec.c * lyap_integral;
        trace.row(r.index, r.time,
                  {r.energy.dirichlet_v, r.energy.potential_gamma, r.energy.interaction_g,
                   r.energy.weighted_tv, r.energy.theta_dirichlet, r.energy.total,
                   r.energy.coupling, lyap, r.v_increment_norm, r.theta_increment_norm,
                   r.dissipation_slack});
        if (r.index % cfg.snapshot_every == 0 || r.index == cfg.steps)
            detail::write_snapshot_set(out.dir, r);
    });

    out.traj = run(cfg.spec, cfg.grid, cfg.initial, cfg.h, cfg.steps, norm, cfg.tols, hooks);
    trace.flush();
    out.completed = !out.traj.aborted;

    const StepRecord& last = out.traj.records.back();
    write_field_csv((out.dir / "theta_final.csv").string(), last.theta);
    write_field_csv((out.dir / "w_final.csv").string(), last.v.w);
    write_field_csv((out.dir / "eta_final.csv").string(), last.v.eta);

    std::ostringstream rep;
    if (out.traj.aborted) rep << "RUN ABORTED: " << out.traj.error << "\n";
    double f0 = out.traj.records.front().energy.total;
    double slack_tol = cfg.slack_coeff * (1.0 + std::abs(f0));

    if (cfg.audit_dissipation_flag) {
        AuditReport r = audit_dissipation(out.traj, u_inf, slack_tol);
        rep << "[dissipation]\n" << r.text();
        out.audits_pass = out.audits_pass && r.pass;
    }
    if (cfg.audit_lyapunov_flag) {
        auto series = lyapunov_series(out.traj, u_inf);
        double j0 = series.empty() ? 0.0 : series.front();
        AuditReport r = lyapunov_audit(out.traj, u_inf, cfg.slack_coeff * (1.0 + std::abs(j0)));
        rep << "[lyapunov]\n" << r.text();
        out.audits_pass = out.audits_pass && r.pass;
    }
    if (cfg.audit_apriori_flag) {
        DerivedConstants dc =
            derived_constants(cfg.spec, cfg.initial.theta0_sup, cfg.grid.domain_measure());
        AuditReport r = audit_apriori(out.traj, cfg.initial.v0, cfg.initial.theta0, dc, slack_tol);
        rep << "[apriori]\n" << r.text();
        if (!r.skipped) out.audits_pass = out.audits_pass && r.pass;
    }
    if (cfg.audit_omega_flag) {
        OmegaReport r = omega_limit(out.traj, u_inf, cfg.spread_tol, cfg.residual_tol);
        rep << "[omega]\n" << r.text() << "\n";
        out.audits_pass = out.audits_pass && r.converged;
    }

    out.report = rep.str();
    std::ofstream rf(out.dir / "audit_report.txt");
    rf << out.report;
    return out;
}

// Re-audits a saved run directory: rebuilds the trajectory from per-step
// snapshots (requires snapshot cadence 1), cross-checks the logged energy
// trace against recomputed totals to 1e-12 relative, and re-runs the audits.
inline bool re_audit(const std::string& run_dir, std::string* report_out = nullptr) {
    fs::path dir(run_dir);
    RunConfig cfg = parse_config((dir / "resolved_config.txt").string());
    if (cfg.snapshot_every != 1)
        throw std::runtime_error("audit: run was saved with output.snapshot_every != 1; "
                                 "per-step snapshots are required to rebuild the trajectory");
    TvNorm norm = cfg.make_norm();

    Trajectory traj;
    traj.spec = cfg.spec;
    traj.grid = cfg.grid;
    traj.h = cfg.h;
    traj.norm = norm;

    for (int i = 0; i <= cfg.steps; ++i) {
        StepRecord r;
        r.index = i;
        r.time = i * cfg.h;
        r.v.w = read_field((dir / detail::snapshot_name("w", i)).string());
        r.v.eta = read_field((dir / detail::snapshot_name("eta", i)).string());
        r.theta = read_field((dir / detail::snapshot_name("theta", i)).string());
        r.u = i == 0 ? Field(cfg.grid, 0.0) : sample_source(cfg.spec, i, cfg.h, cfg.grid);
        r.energy = free_energy(r.v, r.theta, cfg.spec, norm);
        r.energy.coupling = cfg.spec.c * inner(r.u, r.v.w);
        if (i > 0) {
            const StepRecord& prev = traj.records.back();
            r.v_increment_norm = std::sqrt(pair_increment_sq(r.v, prev.v));
            Field dtheta(cfg.grid);
            for (int k = 0; k < dtheta.size(); ++k) dtheta[k] = r.theta[k] - prev.theta[k];
            r.theta_increment_norm = l2_norm(dtheta);
        }
        traj.records.push_back(std::move(r));
    }
    traj.theta0_sup = max_abs(traj.records.front().theta);

    // cross-check logged totals
    std::ifstream trace(dir / "trace.csv");
    if (!trace) throw std::runtime_error("audit: missing trace.csv");
    std::string line;
    std::getline(trace, line);  // header
    int idx = 0;
    bool trace_ok = true;
    double worst_drift = 0.0;
    while (std::getline(trace, line) && idx <= cfg.steps) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() < 13) throw std::runtime_error("audit: malformed trace row");
        double logged_total = std::stod(cells[7]);
        double recomputed = traj.records[idx].energy.total;
        double drift = std::abs(logged_total - recomputed) / (1.0 + std::abs(recomputed));
        worst_drift = std::max(worst_drift, drift);
        trace_ok = trace_ok && drift <= 1e-12;
        ++idx;
    }

    std::ostringstream rep;
    rep << "[trace] " << (trace_ok ? "pass" : "FAIL") << " worst_total_drift=" << worst_drift
        << "\n";
    bool pass = trace_ok;

    Field u_inf = cfg.u_infinity_field();
    double f0 = traj.records.front().energy.total;
    double slack_tol = cfg.slack_coeff * (1.0 + std::abs(f0));
    if (cfg.audit_dissipation_flag) {
        AuditReport r = audit_dissipation(traj, u_inf, slack_tol);
        rep << "[dissipation]\n" << r.text();
        pass = pass && r.pass;
    }
    if (cfg.audit_lyapunov_flag) {
        auto series = lyapunov_series(traj, u_inf);
        double j0 = series.empty() ? 0.0 : series.front();
        AuditReport r = lyapunov_audit(traj, u_inf, cfg.slack_coeff * (1.0 + std::abs(j0)));
        rep << "[lyapunov]\n" << r.text();
        pass = pass && r.pass;
    }
    if (cfg.audit_omega_flag) {
        OmegaReport r = omega_limit(traj, u_inf, cfg.spread_tol, cfg.residual_tol);
        rep << "[omega]\n" << r.text() << "\n";
        pass = pass && r.converged;
    }
    if (report_out) *report_out = rep.str();
    return pass;
}

struct SigmaSweepRow {
    double sigma;
    double phi_sigma;
    double phi_exact;
    double deviation;
    double bound;
    bool within;
};

// Evaluates Phi on the configured initial fields for each sigma against the
// exact-TV value, with the witness-based deviation bound
// |alpha|_C (r0 * measure + (1 - q0) * TV(theta)).
inline std::vector<SigmaSweepRow> sigma_sweep(const RunConfig& cfg,
                                              const std::vector<double>& sigmas) {
    const FieldPair& v = cfg.initial.v0;
    const Field& theta = cfg.initial.theta0;
    const double phi_exact = phi(v, theta, cfg.spec, TvNorm::exact(), cfg.spec.nu);
    const double tv = total_variation(theta);
    const double alpha_sup = cfg.spec.alpha.sup_value(64);
    const double measure = cfg.grid.domain_measure();

    std::vector<SigmaSweepRow> rows(sigmas.size());
    parallel_for(static_cast<int>(sigmas.size()), [&](int i) {
        RegularizedNorm n(family_from_name(cfg.norm_family), sigmas[i], cfg.p_exponent);
        BoundWitness w = n.witness();
        double ps = phi(v, theta, cfg.spec, TvNorm(n), cfg.spec.nu);
        double dev = std::abs(ps - phi_exact);
        double bound = alpha_sup * (w.r0 * measure + (1.0 - w.q0) * tv);
        rows[i] = {sigmas[i], ps, phi_exact, dev, bound, dev <= bound + 1e-12};
    });
    return rows;
}

inline void write_sigma_sweep_csv(const std::string& path, const std::vector<SigmaSweepRow>& rows) {
    std::ofstream out(path);
    out << "sigma,phi_sigma,phi_exact,deviation,bound,within\n";
    for (const auto& r : rows)
        out << format_double(r.sigma) << "," << format_double(r.phi_sigma) << ","
            << format_double(r.phi_exact) << "," << format_double(r.deviation) << ","
            << format_double(r.bound) << "," << (r.within ? 1 : 0) << "\n";
}

struct HSweepRow {
    double h;
    int steps;
    double final_total;
    double rel_change;  // versus the previous row; 0 for the first
};

// Repeated halvings of h with doubled step counts over the same time span.
// The relative change guards against a vanishing denominator: runs that both
// land below the noise floor count as unchanged.
inline std::vector<HSweepRow> h_sweep(const RunConfig& cfg, int halvings) {
    std::vector<HSweepRow> rows(static_cast<size_t>(halvings) + 1);
    double f0 = free_energy(cfg.initial.v0, cfg.initial.theta0, cfg.spec, cfg.make_norm()).total;
    const double floor = 1e-9 * (1.0 + std::abs(f0));

    parallel_for(halvings + 1, [&](int k) {
        double hk = cfg.h / std::pow(2.0, k);
        int steps = cfg.steps << k;
        Trajectory t = run(cfg.spec, cfg.grid, cfg.initial, hk, steps, cfg.make_norm(), cfg.tols);
        if (t.aborted) throw std::runtime_error("h_sweep: run aborted: " + t.error);
        rows[k] = {hk, steps, t.records.back().energy.total, 0.0};
    });
    for (int k = 1; k <= halvings; ++k) {
        double a = rows[k - 1].final_total, b = rows[k].final_total;
        double denom = std::max(std::abs(a), std::abs(b));
        rows[k].rel_change = denom <= floor ? 0.0 : std::abs(a - b) / denom;
    }
    return rows;
}

inline void write_h_sweep_csv(const std::string& path, const std::vector<HSweepRow>& rows) {
    std::ofstream out(path);
    out << "h,steps,final_total,rel_change\n";
    for (const auto& r : rows)
        out << format_double(r.h) << "," << r.steps << "," << format_double(r.final_total) << ","
            << format_double(r.rel_change) << "\n";
}

// Text report of the derived constants, with the inputs that produce them.
inline std::string constants_report(const RunConfig& cfg) {
    DerivedConstants dc =
        derived_constants(cfg.spec, cfg.initial.theta0_sup, cfg.grid.domain_measure());
    std::ostringstream os;
    os << "h1_dagger = " << dc.h1_dagger << "   (|g|_C2 = " << g_c2_norm(cfg.spec)
       << ", h = 1/(2 max(1,|g|_C2)))\n";
    os << "R_star    = " << dc.R_star << "   (theta0_sup = " << cfg.initial.theta0_sup
       << ", measure = " << cfg.grid.domain_measure() << ", delta_star = " << cfg.spec.delta_star
       << ")\n";
    os << "A_star    = " << dc.A_star << "\n";
    os << "B_star    = " << dc.B_star << "\n";
    os << "C_star    = " << dc.C_star << "\n";
    os << "nu_star   = " << dc.nu_star << "\n";
    bool parenthetical = dc.A_star <= 2.0 * cfg.spec.delta_star * std::sqrt(dc.R_star);
    os << "check A_star <= 2 delta_star sqrt(R_star): " << (parenthetical ? "pass" : "FAIL")
       << "\n";
    return os.str();
}

}  // namespace kwc
