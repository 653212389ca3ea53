#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "fatou/errors.hpp"
#include "fatou/heat_kernel.hpp"
#include "oracles.hpp"

using namespace fatou;

namespace {
const GroupPtr H = GroupDescriptor::heisenberg1();
const GroupPtr R1 = GroupDescriptor::euclidean(1);
const GroupPtr R2 = GroupDescriptor::euclidean(2);
const KernelPtr KH = KernelProfile::for_group(H);
const KernelPtr K1 = KernelProfile::for_group(R1);

GroupPoint h(double x, double y, double s) { return H->point({x, y, s}); }
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
} // namespace

TEST_CASE("Euclidean kernel values") {
    CHECK(gamma_euclidean(1, R1->zero()) == doctest::Approx(1.0 / std::sqrt(4 * std::numbers::pi)).epsilon(1e-15));
    CHECK(gamma_euclidean(2, R2->zero()) == doctest::Approx(1.0 / (4 * std::numbers::pi)).epsilon(1e-15));
    CHECK(eval_kernel(*K1, R1->zero(), 1.0) == doctest::Approx(0.2820948).epsilon(1e-7));
    for (double x : {-2.0, -0.3, 0.0, 0.7, 3.1})
        for (double t : {0.01, 0.5, 2.0}) {
            CHECK(eval_kernel(*K1, R1->point({x}), t) ==
                  doctest::Approx(oracle::gauss_weierstrass(1, x * x, t)).epsilon(1e-14));
            CHECK(eval_kernel(*K1, R1->point({2 * x}), 4 * t) / eval_kernel(*K1, R1->point({x}), t) ==
                  doctest::Approx(0.5).epsilon(1e-14));
        }
    CHECK(gamma_euclidean(2, R2->point({0.3, -1.2})) == gamma_euclidean(2, R2->point({-0.3, 1.2})));
}

TEST_CASE("Heisenberg kernel on the central axis matches sech^2 closed form") {
    // Covers both the real-axis rule (|s| <= 16) and the shifted contour.
    for (double s : {0.0, 0.5, 2.0, 8.0, 15.9, 16.1, 20.0, 40.0, 80.0, 150.0}) {
        double ref = oracle::heisenberg_kernel_axis(s);
        CAPTURE(s);
        CHECK(rel(gamma_heisenberg(0, 0, s), ref) <= 1e-8);
    }
}

TEST_CASE("Heisenberg kernel matches direct real-axis integration") {
    for (double x : {0.0, 0.4, 1.3, 2.5})
        for (double y : {0.0, -0.7})
            for (double s : {-6.0, -1.0, 0.0, 0.3, 4.0}) {
                double ref = oracle::heisenberg_kernel_direct(x, y, s);
                CAPTURE(x);
                CAPTURE(y);
                CAPTURE(s);
                CHECK(rel(gamma_heisenberg(x, y, s), ref) <= 1e-8);
            }
}

TEST_CASE("shifted contour agrees with the real-axis rule where both are accurate") {
    HeisenbergQuadratureSpec real_axis;
    real_axis.fast_s_limit = 1e9;
    real_axis.lambda_max = 60;
    real_axis.panels = 120;
    HeisenbergQuadratureSpec contour;
    contour.fast_s_limit = 0.0;
    for (double x : {0.0, 0.5, 1.5})
        for (double s : {1.0, 6.0, 12.0}) {
            CAPTURE(x);
            CAPTURE(s);
            CHECK(rel(gamma_heisenberg(x, 0.2, s, contour), gamma_heisenberg(x, 0.2, s, real_axis)) <= 1e-7);
        }
}

TEST_CASE("Heisenberg kernel symmetry, positivity and upper bound") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 300; ++i) {
        double x = u(rng), y = u(rng), s = 10 * u(rng);
        double g = gamma_heisenberg(x, y, s);
        CHECK(g > 0.0);
        CHECK(rel(gamma_heisenberg(-x, -y, -s), g) <= 1e-8);
        CHECK(g <= std::exp(-0.25 * (x * x + y * y)) / 64.0 * (1 + 1e-12));
    }
}

TEST_CASE("scaling law is exact") {
    for (double r : {0.1, 3.0, 17.0}) {
        auto x = h(0.4, -0.2, 0.3);
        double lhs = eval_kernel(*KH, dilate(r, x), r * r * 1.7);
        double rhs = std::pow(r, -4) * eval_kernel(*KH, x, 1.7);
        CHECK(rel(lhs, rhs) <= 1e-13);
    }
    CHECK(rel(eval_kernel(*KH, dilate(3.0, h(0.2, 0.1, 0.05)), 9.0),
              std::pow(3.0, -4) * eval_kernel(*KH, h(0.2, 0.1, 0.05), 1.0)) <= 1e-13);
    CHECK_THROWS_AS(eval_kernel(*KH, h(0, 0, 0), 0.0), DomainError);
    CHECK_THROWS_AS(eval_kernel(*K1, R1->zero(), -1.0), DomainError);
}

TEST_CASE("normalization by polar quadrature") {
    for (double t : {0.25, 1.0, 4.0}) {
        double radius = KH->truncation_radius(1e-8) * std::sqrt(t);
        double total = polar_integrate(*H, [&](const GroupPoint& x) { return eval_kernel(*KH, x, t); }, radius);
        CAPTURE(t);
        CHECK(std::abs(total - 1.0) <= 1e-3);
    }
}

TEST_CASE("heat rule integrates constants and quadratics") {
    double w = 0.0, z2 = 0.0, s2 = 0.0;
    for (const auto& n : KH->heat_rule()) {
        w += n.weight;
        z2 += n.weight * (n.w_inv[0] * n.w_inv[0] + n.w_inv[1] * n.w_inv[1]);
        s2 += n.weight * n.w_inv[2] * n.w_inv[2];
    }
    CHECK(std::abs(w - 1.0) <= 1e-7);
    // Second moments of the time-one law: E|z|^2 = 4, E s^2 = 16.
    CHECK(rel(z2, 4.0) <= 1e-6);
    CHECK(rel(s2, 16.0) <= 1e-6);
}

TEST_CASE("semigroup residuals") {
    CHECK(check_semigroup(*K1, R1->zero(), 1.0, 1.0) <= 1e-6);
    CHECK(check_semigroup(*K1, R1->point({0.8}), 0.3, 2.0) <= 1e-6);
    CHECK(check_semigroup(*KH, H->zero(), 1.0, 1.0) <= 1e-2);
    CHECK(check_semigroup(*KH, h(0.5, -0.3, 0.2), 1.0, 0.25) <= 1e-2);
    // tau -> 0 on a fixed point.
    double r1 = check_semigroup(*KH, h(0.5, 0, 0.1), 1.0, 0.1);
    double r2 = check_semigroup(*KH, h(0.5, 0, 0.1), 1.0, 0.001);
    CHECK(r2 <= std::max(r1, 1e-9));
    CHECK_THROWS_AS(check_semigroup(*KH, H->zero(), 1.0, 0.0), DomainError);
}

TEST_CASE("PDE residual examples") {
    CHECK(pde_residual(*K1, R1->point({0.3}), 1.0, 1e-3) <= 1e-5);
    CHECK(pde_residual(*KH, h(0.5, 0.2, 0.1), 1.0, 1e-2) <= 1e-3);
    double a = pde_residual(*KH, h(0.5, 0.2, 0.1), 1.0, 0.04);
    double b = pde_residual(*KH, h(0.5, 0.2, 0.1), 1.0, 0.02);
    CHECK(a / b == doctest::Approx(4.0).epsilon(0.25));
    CHECK_THROWS_AS(pde_residual(*KH, H->zero(), 1e-4, 0.01), PreconditionError);
}

TEST_CASE("Gaussian certificate") {
    const auto& c1 = K1->certificate();
    CHECK(c1.max_violation <= 0.0);
    CHECK(c1.c0 >= 1.0);
    CHECK(c1.c0 <= 4.0);
    const auto& ch = KH->certificate();
    CHECK(std::isfinite(ch.c0));
    CHECK(ch.max_violation <= 0.0);
    CHECK(ch.upper_constant <= ch.c0);
    auto refined = certify_gaussian(*KH, GaussianGridSpec{}.refined());
    CHECK(refined.c0 >= ch.c0 * (1 - 1e-12));
    CHECK(refined.c0 <= 1.1 * ch.c0);
    for (const auto& s : ch.grid) {
        double q = std::pow(s.t, -2.0);
        CHECK(s.kernel >= q * std::exp(-ch.c0 * s.d * s.d / s.t) / ch.c0 * (1 - 1e-12));
        CHECK(s.kernel <= q * ch.c0 * std::exp(-s.d * s.d / (ch.c0 * s.t)) * (1 + 1e-12));
    }
}

TEST_CASE("tail bound") {
    double prev = KH->tail_bound(1.0);
    for (double r = 2.0; r < 30.0; r += 1.0) {
        double v = KH->tail_bound(r);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(KH->tail_bound(KH->truncation_radius(1e-10)) <= 1e-10);
    CHECK(KH->heat_rule_radius() == doctest::Approx(KH->truncation_radius(1e-13)));
    // Euclidean: compare with the exact tail of the Gauss-Weierstrass law.
    double exact = std::erfc(4.0 / 2.0);
    CHECK(K1->tail_bound(4.0) >= exact);
}

TEST_CASE("full battery on the real line") {
    auto checks = run_kernel_battery(*K1);
    CHECK(checks.size() >= 6);
    for (const auto& c : checks) {
        CAPTURE(c.property);
        CHECK(c.pass);
    }
    auto v = K1->with_validation(checks);
    CHECK(v.validation_state() == ValidationState::Validated);
    CHECK(K1->validation_state() == ValidationState::Unchecked);
}

TEST_CASE("profiles are shared per group") {
    CHECK(KernelProfile::for_group(H).get() == KH.get());
    CHECK(KernelProfile::for_group(R2).get() != K1.get());
}
