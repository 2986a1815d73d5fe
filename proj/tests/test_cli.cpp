#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kwc/config.hpp"
#include "kwc/io.hpp"
#include "kwc/runner.hpp"

using namespace kwc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("kwc_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config: defaults resolve to the auto step 0.45") {
    RunConfig cfg = parse_config_text("");
    CHECK(cfg.h1_dagger == Catch::Approx(0.5));
    CHECK(cfg.h == Catch::Approx(0.45));
    CHECK(cfg.grid.cell_count() == 32);
    CHECK(cfg.steps == 200);
    CHECK(cfg.initial.theta0_sup == Catch::Approx(M_PI));
}

TEST_CASE("config: rejections carry the reason") {
    CHECK_THROWS_WITH(parse_config_text("norm.sigma = 1.5"),
                      Catch::Matchers::ContainsSubstring("sigma"));
    CHECK_THROWS_WITH(parse_config_text("whatever = 1"),
                      Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config_text("time.h = 0.7"),
                      Catch::Matchers::ContainsSubstring("h1_dagger"));
    CHECK_THROWS_WITH(parse_config_text("model.g = kobayashi"),
                      Catch::Matchers::ContainsSubstring("relaxed"));
    CHECK_THROWS_WITH(parse_config_text("grid.dim = 2\ngrid.shape = 8"),
                      Catch::Matchers::ContainsSubstring("grid.shape"));
    // a table that never settles at u_infinity cannot honor the omega audit
    CHECK_THROWS_WITH(
        parse_config_text("audit.omega = true\nsource.type = table\nsource.table = 0:1\n"
                          "source.u_infinity = 0.3"),
        Catch::Matchers::ContainsSubstring("A6"));
    // the same table is fine when the audit is off
    CHECK_NOTHROW(parse_config_text("source.type = table\nsource.table = 0:1\n"
                                    "source.u_infinity = 0.3"));
}

TEST_CASE("config: comments, spacing, and derived blocks") {
    RunConfig cfg = parse_config_text(
        "# comment line\n"
        "grid.dim = 2\n"
        "grid.shape = 6 5\n"
        "grid.spacing = 0.25, 0.2   # trailing comment\n"
        "model.nu = 0\n"
        "norm.family = p_growth\n"
        "norm.sigma = 0.5\n"
        "time.h = 0.25\n"
        "time.steps = 3\n"
        "initial.preset = random\n"
        "initial.seed = 42\n");
    CHECK(cfg.grid.dim() == 2);
    CHECK(cfg.grid.cell_count() == 30);
    CHECK(cfg.spec.nu == 0.0);
    CHECK(cfg.make_norm().regularized().p() == Catch::Approx(1.5));
    CHECK(cfg.h == Catch::Approx(0.25));
}

TEST_CASE("field snapshots round-trip exactly") {
    TempDir tmp("io");
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (const Grid& g : {Grid::line(9, 0.11), Grid::box(4, 6, 0.5, 0.3)}) {
        Field f(g);
        for (auto& x : f.values) x = dist(rng);
        fs::path p = tmp.path / "field.fld";
        write_field(p.string(), f);
        Field back = read_field(p.string());
        REQUIRE(back.grid.same(g));
        CHECK(back.values == f.values);
    }
}

TEST_CASE("corrupted snapshots are rejected") {
    TempDir tmp("corrupt");
    Grid g = Grid::line(8, 0.125);
    fs::path p = tmp.path / "theta.fld";
    write_field(p.string(), constant_field(g, 1.0));

    // truncate the payload
    std::string bytes = slurp(p);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS(read_field(p.string()));

    // a config that resumes from the broken snapshot fails to resolve
    fs::path wpath = tmp.path / "w.fld", epath = tmp.path / "eta.fld";
    write_field(wpath.string(), constant_field(g, 0.5));
    write_field(epath.string(), constant_field(g, 0.5));
    std::ostringstream cfg;
    cfg << "grid.shape = 8\ngrid.spacing = 0.125\n"
        << "initial.w_snapshot = " << wpath.string() << "\n"
        << "initial.eta_snapshot = " << epath.string() << "\n"
        << "initial.theta_snapshot = " << p.string() << "\n";
    CHECK_THROWS(parse_config_text(cfg.str()));
}

TEST_CASE("pgm quick-look output") {
    TempDir tmp("pgm");
    Grid g = Grid::box(3, 4, 0.2, 0.2);
    Field f(g);
    for (int i = 0; i < f.size(); ++i) f[i] = i;
    fs::path p = tmp.path / "pic.pgm";
    write_pgm(p.string(), f);
    std::string bytes = slurp(p);
    CHECK(bytes.rfind("P5\n4 3\n255\n", 0) == 0);
    CHECK(bytes.size() == std::string("P5\n4 3\n255\n").size() + 12);
    CHECK(fs::exists(tmp.path / "pic.pgm.scale.txt"));
}

TEST_CASE("execute_run: outputs, exit status, reproducibility") {
    TempDir tmp("run");
    RunConfig cfg = parse_config_text(
        "grid.shape = 16\ngrid.spacing = 0.0625\ntime.steps = 12\n"
        "output.snapshot_every = 4\noutput.dir = runA\n");
    RunOutcome a = execute_run(cfg, tmp.path.string());
    CHECK(a.exit_code() == 0);
    CHECK(fs::exists(a.dir / "trace.csv"));
    CHECK(fs::exists(a.dir / "resolved_config.txt"));
    CHECK(fs::exists(a.dir / "audit_report.txt"));
    CHECK(fs::exists(a.dir / "w_000012.fld"));

    // trace rows = steps + 1 (plus header)
    std::istringstream trace(slurp(a.dir / "trace.csv"));
    int lines = 0;
    std::string l;
    while (std::getline(trace, l)) ++lines;
    CHECK(lines == 14);

    // bit-identical rerun
    RunConfig cfg2 = cfg;
    cfg2.output_dir = "runB";
    RunOutcome b = execute_run(cfg2, tmp.path.string());
    CHECK(slurp(a.dir / "trace.csv") == slurp(b.dir / "trace.csv"));

    SECTION("zero steps still produce a single-row trace") {
        RunConfig cfg0 = parse_config_text(
            "grid.shape = 16\ngrid.spacing = 0.0625\ntime.steps = 0\noutput.dir = run0\n");
        RunOutcome z = execute_run(cfg0, tmp.path.string());
        CHECK(z.exit_code() == 0);
        std::istringstream t0(slurp(z.dir / "trace.csv"));
        int n0 = 0;
        while (std::getline(t0, l)) ++n0;
        CHECK(n0 == 2);
    }
    SECTION("a failed requested audit yields a nonzero exit") {
        // far too few steps for the omega-limit thresholds
        RunConfig cfgo = parse_config_text(
            "grid.shape = 16\ngrid.spacing = 0.0625\ntime.steps = 2\n"
            "audit.omega = true\noutput.dir = runo\n");
        RunOutcome o = execute_run(cfgo, tmp.path.string());
        CHECK(o.completed);
        CHECK(o.exit_code() == 1);
    }
    SECTION("final fields are exported as csv") {
        CHECK(fs::exists(a.dir / "theta_final.csv"));
        std::string csv = slurp(a.dir / "theta_final.csv");
        CHECK(csv.rfind("index,value\n", 0) == 0);
    }
}

TEST_CASE("re_audit replays a cadence-1 run and cross-checks the trace") {
    TempDir tmp("audit");
    RunConfig cfg = parse_config_text(
        "grid.shape = 12\ngrid.spacing = 0.0833333333333333\ntime.steps = 10\n"
        "output.snapshot_every = 1\noutput.dir = saved\n"
        "source.value = 0.2\nsource.u_infinity = 0.2\n");
    RunOutcome out = execute_run(cfg, tmp.path.string());
    REQUIRE(out.exit_code() == 0);

    std::string report;
    CHECK(re_audit(out.dir.string(), &report));
    CHECK(report.find("[trace] pass") != std::string::npos);

    SECTION("tampered snapshots are caught") {
        Field theta = read_field((out.dir / "theta_000005.fld").string());
        for (auto& x : theta.values) x += 0.5;
        write_field((out.dir / "theta_000005.fld").string(), theta);
        CHECK_FALSE(re_audit(out.dir.string(), &report));
    }
    SECTION("coarser cadence is refused") {
        RunConfig c2 = parse_config_text(
            "grid.shape = 12\ngrid.spacing = 0.0833333333333333\ntime.steps = 10\n"
            "output.snapshot_every = 5\noutput.dir = saved5\n");
        RunOutcome o2 = execute_run(c2, tmp.path.string());
        CHECK_THROWS(re_audit(o2.dir.string(), &report));
    }
}

TEST_CASE("sigma sweep rows: decreasing deviation within the witness bound") {
    RunConfig cfg = parse_config_text("initial.amplitude = pi\n");
    auto rows = sigma_sweep(cfg, {0.5, 0.1, 0.02, 0.004});
    REQUIRE(rows.size() == 4);
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].within);
        if (i > 0) CHECK(rows[i].deviation < rows[i - 1].deviation);
    }

    SECTION("constant theta gives zero deviation") {
        RunConfig flat = parse_config_text("initial.amplitude = 0\n");
        for (const auto& r : sigma_sweep(flat, {0.5, 0.1}))
            CHECK(r.deviation <= 1e-15);
    }
    SECTION("p_growth rows respect their witness bound on a unit-slope ramp") {
        RunConfig pg = parse_config_text("norm.family = p_growth\ninitial.amplitude = 1\n");
        for (const auto& r : sigma_sweep(pg, {0.5, 0.1, 0.02, 0.004})) CHECK(r.within);
    }
}

TEST_CASE("h sweep self-convergence rows") {
    RunConfig cfg = parse_config_text("grid.shape = 16\ngrid.spacing = 0.0625\ntime.steps = 30\n");
    auto rows = h_sweep(cfg, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].steps == 2 * rows[0].steps);
    CHECK(rows[1].h == Catch::Approx(rows[0].h / 2.0));
    CHECK(rows[1].rel_change < 0.05);
}

TEST_CASE("constants report") {
    RunConfig cfg = parse_config_text("");
    std::string rep = constants_report(cfg);
    CHECK(rep.find("h1_dagger = 0.5") != std::string::npos);
    CHECK(rep.find("A_star    = 22") != std::string::npos);
    CHECK(rep.find("check A_star <= 2 delta_star sqrt(R_star): pass") != std::string::npos);

    RunConfig scaled = parse_config_text("model.g_scale = 2\n");
    CHECK(constants_report(scaled).find("h1_dagger = 0.125") != std::string::npos);
}

TEST_CASE("rendered configs re-parse to the same resolution") {
    RunConfig cfg = parse_config_text(
        "grid.dim = 2\ngrid.shape = 5 4\ngrid.spacing = 0.2 0.25\n"
        "norm.family = tanh\nnorm.sigma = 0.3\ntime.steps = 7\n"
        "source.type = table\nsource.table = 0:0.5;1:0\nsource.u_infinity = 0\n");
    RunConfig back = parse_config_text(render_config(cfg));
    CHECK(back.h == cfg.h);
    CHECK(back.steps == cfg.steps);
    CHECK(back.grid.same(cfg.grid));
    CHECK(back.norm_family == cfg.norm_family);
    CHECK(back.spec.source.entries().size() == cfg.spec.source.entries().size());
}
