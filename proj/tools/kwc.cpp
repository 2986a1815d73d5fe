// kwc.cpp
// Command-line driver: run, validate, constants, sigma-sweep, h-sweep, audit.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kwc/config.hpp"
#include "kwc/diagnostics.hpp"
#include "kwc/runner.hpp"

namespace {

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& tok : kwc::detail::split_list(text)) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled Allen-Cahn / grain-boundary-motion solver with "
                 "energy-dissipation audits"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string run_dir;
    std::string sigma_list = "0.5,0.1,0.02,0.004";
    int halvings = 1;

    auto* cmd_run = app.add_subcommand("run", "execute a configured run with audits");
    cmd_run->add_option("--config", config_path, "config file")->required();
    cmd_run->add_option("--out", out_dir, "root directory for outputs");

    auto* cmd_validate = app.add_subcommand("validate", "parse and validate a config");
    cmd_validate->add_option("--config", config_path, "config file")->required();

    auto* cmd_constants = app.add_subcommand("constants", "print the derived constants");
    cmd_constants->add_option("--config", config_path, "config file")->required();

    auto* cmd_sigma = app.add_subcommand("sigma-sweep", "Phi_sigma versus exact TV on the initial fields");
    cmd_sigma->add_option("--config", config_path, "config file")->required();
    cmd_sigma->add_option("--sigmas", sigma_list, "comma-separated sigma values");
    cmd_sigma->add_option("--out", out_dir, "root directory for outputs");

    auto* cmd_h = app.add_subcommand("h-sweep", "self-convergence under step halving");
    cmd_h->add_option("--config", config_path, "config file")->required();
    cmd_h->add_option("--halvings", halvings, "number of halvings");
    cmd_h->add_option("--out", out_dir, "root directory for outputs");

    auto* cmd_audit = app.add_subcommand("audit", "re-audit a saved run directory");
    cmd_audit->add_option("--run", run_dir, "run directory (snapshot cadence 1)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            kwc::RunConfig cfg = kwc::parse_config(config_path);
            kwc::RunOutcome outcome = kwc::execute_run(cfg, out_dir);
            std::cout << outcome.report;
            std::cout << (outcome.exit_code() == 0 ? "run: PASS\n" : "run: FAIL\n");
            return outcome.exit_code();
        }
        if (cmd_validate->parsed()) {
            kwc::RunConfig cfg = kwc::parse_config(config_path);
            kwc::ValidationReport vr = kwc::validate(cfg.spec);
            std::cout << vr.summary() << "\n";
            std::cout << "resolved h = " << cfg.h << " (h1_dagger = " << cfg.h1_dagger << ")\n";
            return vr.pass ? 0 : 1;
        }
        if (cmd_constants->parsed()) {
            kwc::RunConfig cfg = kwc::parse_config(config_path);
            std::cout << kwc::constants_report(cfg);
            return 0;
        }
        if (cmd_sigma->parsed()) {
            kwc::RunConfig cfg = kwc::parse_config(config_path);
            auto rows = kwc::sigma_sweep(cfg, parse_number_list(sigma_list));
            auto dir = kwc::fs::path(out_dir) / cfg.output_dir;
            kwc::fs::create_directories(dir);
            kwc::write_sigma_sweep_csv((dir / "sigma_sweep.csv").string(), rows);
            bool ok = true;
            for (const auto& r : rows) {
                std::printf("sigma=%-10g deviation=%-12g bound=%-12g %s\n", r.sigma, r.deviation,
                            r.bound, r.within ? "ok" : "VIOLATED");
                ok = ok && r.within;
            }
            return ok ? 0 : 1;
        }
        if (cmd_h->parsed()) {
            kwc::RunConfig cfg = kwc::parse_config(config_path);
            auto rows = kwc::h_sweep(cfg, halvings);
            auto dir = kwc::fs::path(out_dir) / cfg.output_dir;
            kwc::fs::create_directories(dir);
            kwc::write_h_sweep_csv((dir / "h_sweep.csv").string(), rows);
            for (const auto& r : rows)
                std::printf("h=%-12g steps=%-8d final=%-16g rel_change=%g\n", r.h, r.steps,
                            r.final_total, r.rel_change);
            return 0;
        }
        if (cmd_audit->parsed()) {
            std::string report;
            bool pass = kwc::re_audit(run_dir, &report);
            std::cout << report << (pass ? "audit: PASS\n" : "audit: FAIL\n");
            return pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
