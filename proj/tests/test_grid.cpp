#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kwc/grid.hpp"

using namespace kwc;

namespace {

Field random_field(const Grid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Field f(g);
    for (auto& v : f.values) v = dist(rng);
    return f;
}

}  // namespace

TEST_CASE("grid construction enforces shape and spacing") {
    CHECK_THROWS(Grid::line(1, 0.5));
    CHECK_THROWS(Grid::line(4, 0.0));
    CHECK_THROWS(Grid(3, {2, 2}, {1, 1}));
    Grid g = Grid::box(4, 3, 0.5, 0.25);
    CHECK(g.cell_count() == 12);
    CHECK(g.cell_measure() == Catch::Approx(0.125));
    CHECK(g.face_count(0) == 9);
    CHECK(g.face_count(1) == 8);
}

TEST_CASE("face gradient: forward differences with zero-flux ends") {
    Grid g = Grid::line(2, 1.0);
    Field f(g);
    f.values = {0.0, 1.0};
    FaceData q = face_gradient(f);
    REQUIRE(q.axis[0].size() == 1);
    CHECK(q.axis[0][0] == Catch::Approx(1.0));

    Field c = constant_field(Grid::line(8, 0.3), 2.5);
    FaceData qc = face_gradient(c);
    for (double v : qc.axis[0]) CHECK(v == 0.0);

    Grid g3 = Grid::line(3, 0.5);
    Field f3(g3);
    f3.values = {0.0, 1.0, 0.0};
    FaceData q3 = face_gradient(f3);
    CHECK(q3.axis[0][0] == Catch::Approx(2.0));
    CHECK(q3.axis[0][1] == Catch::Approx(-2.0));
}

TEST_CASE("face divergence: adjoint examples") {
    Grid g = Grid::line(2, 1.0);
    FaceData q(g);
    SECTION("zero flux") {
        Field d = face_divergence(q);
        for (double v : d.values) CHECK(v == 0.0);
    }
    SECTION("unit flux on the single face") {
        q.axis[0][0] = 1.0;
        Field d = face_divergence(q);
        CHECK(d[0] == Catch::Approx(1.0));
        CHECK(d[1] == Catch::Approx(-1.0));
    }
    SECTION("size mismatch rejected") {
        q.axis[0].push_back(0.0);
        CHECK_THROWS(face_divergence(q));
    }
}

TEST_CASE("summation by parts holds to rounding") {
    std::mt19937_64 rng(11);
    for (const Grid& g : {Grid::line(17, 0.21), Grid::box(7, 9, 0.3, 0.11)}) {
        for (int rep = 0; rep < 20; ++rep) {
            Field f = random_field(g, rng);
            Field w = random_field(g, rng);
            // random flux / field pair
            FaceData q(g);
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            for (int a = 0; a < g.dim(); ++a)
                for (auto& x : q.axis[a]) x = dist(rng);
            double lhs = inner(face_divergence(q), f);
            double rhs = -face_inner(q, face_gradient(f));
            CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));

            double lap = inner(neumann_laplacian(f), w);
            double sbp = -face_inner(face_gradient(f), face_gradient(w));
            CHECK(std::abs(lap - sbp) <= 1e-12 * (1.0 + std::abs(sbp)));
        }
    }
}

TEST_CASE("neumann laplacian: stencil, kernel, sign, mean") {
    Grid g = Grid::line(3, 1.0);
    Field f(g);
    f.values = {0.0, 1.0, 0.0};
    Field lap = neumann_laplacian(f);
    CHECK(lap[0] == Catch::Approx(1.0));
    CHECK(lap[1] == Catch::Approx(-2.0));
    CHECK(lap[2] == Catch::Approx(1.0));

    Field c = constant_field(Grid::box(5, 4, 0.2, 0.3), 3.7);
    Field lc = neumann_laplacian(c);
    for (double v : lc.values) CHECK(std::abs(v) <= 1e-14);

    std::mt19937_64 rng(5);
    Grid g2 = Grid::box(6, 5, 0.25, 0.4);
    for (int rep = 0; rep < 100; ++rep) {
        Field r = random_field(g2, rng);
        Field lr = neumann_laplacian(r);
        CHECK(inner(lr, r) <= 1e-12);
        // zero flux: the mean is preserved
        double total = 0.0;
        for (double v : lr.values) total += v;
        CHECK(std::abs(total * g2.cell_measure()) <= 1e-11);
    }
}

TEST_CASE("inner product: quadrature, symmetry, Cauchy-Schwarz") {
    Grid g = Grid::box(2, 2, 0.5, 0.5);
    Field ones = constant_field(g, 1.0);
    CHECK(inner(ones, ones) == Catch::Approx(1.0));

    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 100; ++rep) {
        Field f = random_field(g, rng);
        Field h = random_field(g, rng);
        CHECK(inner(f, h) == Catch::Approx(inner(h, f)));
        CHECK(std::abs(inner(f, h)) <= l2_norm(f) * l2_norm(h) + 1e-12);
    }

    Field other(Grid::line(4, 1.0));
    CHECK_THROWS(inner(ones, other));
}

TEST_CASE("cell-assembled squared gradient matches the face quadrature") {
    std::mt19937_64 rng(23);
    Grid g = Grid::box(6, 7, 0.17, 0.29);
    for (int rep = 0; rep < 10; ++rep) {
        Field f = random_field(g, rng);
        Field sq = cell_grad_sq(f);
        double cell_total = 0.0;
        for (double v : sq.values) cell_total += v;
        FaceData q = face_gradient(f);
        double face_total = face_inner(q, q) / g.cell_measure();
        CHECK(cell_total == Catch::Approx(face_total));
    }
}
