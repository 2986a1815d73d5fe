#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "kwc/regnorm.hpp"

using namespace kwc;

namespace {

const NormFamily kFamilies[] = {NormFamily::hyperbola, NormFamily::yosida, NormFamily::tanh_type,
                                NormFamily::arctan_type, NormFamily::p_growth};

// Simpson quadrature of the integrand defining the tanh family.
double tanh_quadrature(double r, double sigma, int panels) {
    double acc = 0.0;
    double hstep = r / panels;
    for (int i = 0; i < panels; ++i) {
        double a = i * hstep, b = a + hstep, mid = 0.5 * (a + b);
        acc += (hstep / 6.0) *
               (std::tanh(a / sigma) + 4.0 * std::tanh(mid / sigma) + std::tanh(b / sigma));
    }
    return acc;
}

}  // namespace

TEST_CASE("sigma range is enforced") {
    CHECK_THROWS(RegularizedNorm(NormFamily::hyperbola, 0.0));
    CHECK_THROWS(RegularizedNorm(NormFamily::hyperbola, 1.5));
    CHECK_THROWS(RegularizedNorm(NormFamily::p_growth, 0.1, 0.9));
    CHECK_NOTHROW(RegularizedNorm(NormFamily::hyperbola, 1.0));
}

TEST_CASE("closed-form values") {
    RegularizedNorm hyp(NormFamily::hyperbola, 1.0);
    CHECK(hyp.value2(3.0, 4.0) == Catch::Approx(std::sqrt(26.0) - 1.0));

    for (NormFamily fam : kFamilies) {
        RegularizedNorm n(fam, 0.3);
        CHECK(n.value2(0.0, 0.0) == 0.0);
        CHECK(n.value1(0.0) == 0.0);
    }

    // quadrature oracle for the tanh family (closed form 0.5*ln cosh 2)
    RegularizedNorm th(NormFamily::tanh_type, 0.5);
    double quad = tanh_quadrature(1.0, 0.5, 20000);
    CHECK(std::abs(th.value1(1.0) - quad) <= 1e-10);
    CHECK(th.value1(1.0) == Catch::Approx(0.66250137367893) .epsilon(1e-10));
}

TEST_CASE("gradients: closed forms and finite differences") {
    RegularizedNorm hyp(NormFamily::hyperbola, 1.0);
    auto g = hyp.gradient2(3.0, 4.0);
    CHECK(g[0] == Catch::Approx(3.0 / std::sqrt(26.0)));
    CHECK(g[1] == Catch::Approx(4.0 / std::sqrt(26.0)));

    for (NormFamily fam : kFamilies) {
        RegularizedNorm n(fam, 0.4);
        auto g0 = n.gradient2(0.0, 0.0);
        CHECK(g0[0] == 0.0);
        CHECK(g0[1] == 0.0);
    }

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (NormFamily fam : kFamilies) {
        for (double sigma : {0.5, 0.1}) {
            RegularizedNorm n(fam, sigma);
            for (int rep = 0; rep < 50; ++rep) {
                double x = dist(rng), y = dist(rng);
                if (std::hypot(x, y) < 0.05) continue;  // FD is noisy at the kink scale
                double eps = 1e-6;
                double fx = (n.value2(x + eps, y) - n.value2(x - eps, y)) / (2 * eps);
                double fy = (n.value2(x, y + eps) - n.value2(x, y - eps)) / (2 * eps);
                auto an = n.gradient2(x, y);
                double scale = 1.0 + std::abs(an[0]) + std::abs(an[1]);
                CHECK(std::abs(fx - an[0]) <= 1e-6 * scale);
                CHECK(std::abs(fy - an[1]) <= 1e-6 * scale);
            }
        }
    }
}

TEST_CASE("axiom verification passes for every family and sigma") {
    for (NormFamily fam : kFamilies) {
        for (double sigma : {0.5, 0.1, 0.02}) {
            RegularizedNorm n(fam, sigma);
            AxiomReport rep = verify_axioms(n, 10000);
            INFO(family_name(fam) << " sigma=" << sigma << " : " << rep.summary());
            CHECK(rep.pass);
        }
    }
}

TEST_CASE("a wrong witness is rejected with a counterexample") {
    RegularizedNorm n(NormFamily::hyperbola, 0.1);
    BoundWitness bad = n.witness();
    bad.q1 = 0.5;  // the gradient magnitude approaches 1
    AxiomReport rep = verify_axioms(n, 2000, 99, &bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.worst_check == "gradient");
    CHECK(rep.worst_gradient > 0.1);
}

TEST_CASE("yosida envelope: inf definition oracle and upper bound") {
    RegularizedNorm yo(NormFamily::yosida, 0.3);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 3.0);
    for (int rep = 0; rep < 50; ++rep) {
        double r = dist(rng);
        // dense inner minimization of t + (1/(2 sigma)) (t - r)^2 over t >= 0
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 200000; ++k) {
            double t = r * k / 200000.0;
            best = std::min(best, t + (t - r) * (t - r) / (2.0 * 0.3));
        }
        CHECK(std::abs(yo.value1(r) - best) <= 1e-6);
        CHECK(yo.value1(r) <= r + 1e-15);
    }
}

TEST_CASE("pointwise convergence to the Euclidean norm with witness-bounded error") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (NormFamily fam : kFamilies) {
        for (double sigma : {0.5, 0.1, 0.02}) {
            RegularizedNorm n(fam, sigma);
            BoundWitness w = n.witness();
            for (int rep = 0; rep < 200; ++rep) {
                double x = dist(rng), y = dist(rng);
                double r = std::hypot(x, y);
                double err = std::abs(n.value2(x, y) - r);
                CHECK(err <= w.r0 + (1.0 - w.q0) * r + 1e-12);
            }
        }
    }
}

TEST_CASE("gradient monotonicity on sampled pairs") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (NormFamily fam : kFamilies) {
        RegularizedNorm n(fam, 0.2);
        for (int rep = 0; rep < 300; ++rep) {
            double x1 = dist(rng), y1 = dist(rng), x2 = dist(rng), y2 = dist(rng);
            auto g1 = n.gradient2(x1, y1);
            auto g2 = n.gradient2(x2, y2);
            double dot = (g1[0] - g2[0]) * (x1 - x2) + (g1[1] - g2[1]) * (y1 - y2);
            CHECK(dot >= -1e-12);
        }
    }
}

TEST_CASE("witnesses approach the exact-norm limits as sigma decreases") {
    for (NormFamily fam : kFamilies) {
        for (double sigma : {0.5, 0.1, 0.02, 0.004, 1e-4}) {
            BoundWitness w = RegularizedNorm(fam, sigma).witness();
            CHECK(w.q0 > 0.0);
            CHECK(w.q0 <= 1.0);
            CHECK(w.q1 >= 1.0);
            CHECK(w.r0 >= 0.0);
            CHECK(w.r1 >= 0.0);
        }
        BoundWitness tail = RegularizedNorm(fam, 1e-6).witness();
        CHECK(tail.r0 <= 1e-4);
        CHECK(1.0 - tail.q0 <= 1e-4);
        CHECK(tail.q1 - 1.0 <= 1e-4);
        CHECK(tail.r1 <= 1e-4);
    }
}
