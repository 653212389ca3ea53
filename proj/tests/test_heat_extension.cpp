#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <string>

#include "fatou/errors.hpp"
#include "fatou/heat_extension.hpp"
#include "oracles.hpp"

using namespace fatou;

namespace {
const GroupPtr H = GroupDescriptor::heisenberg1();
const GroupPtr R1 = GroupDescriptor::euclidean(1);
const GroupPtr R2 = GroupDescriptor::euclidean(2);
const KernelPtr KH = KernelProfile::for_group(H);
const KernelPtr K1 = KernelProfile::for_group(R1);
const KernelPtr K2 = KernelProfile::for_group(R2);

GroupPoint h(double x, double y, double s) { return H->point({x, y, s}); }

DensityExpr expr(DensityShape shape, std::vector<double> c) {
    DensityExpr e;
    e.shape = shape;
    e.coeffs = std::move(c);
    return e;
}

// Kernel at (xi^-1 o x, t) through the matrix model and direct quadrature.
double atom_oracle(const oracle::Vec3& xi, const oracle::Vec3& x, double t) {
    auto p = oracle::heisenberg_mul({-xi[0], -xi[1], -xi[2]}, x);
    double r = 1.0 / std::sqrt(t);
    return oracle::heisenberg_kernel_direct(r * p[0], r * p[1], r * r * p[2]) / (t * t);
}
} // namespace

TEST_CASE("constant measures extend to constants") {
    for (double t : {1e-4, 0.3, 5.0}) {
        CHECK(heat_extend(BoundaryMeasure::lebesgue(H, 2.0), *KH, h(0.3, 1, -2), t) ==
              doctest::Approx(2.0).epsilon(1e-7));
        CHECK(heat_extend(BoundaryMeasure::lebesgue(R2, 0.5), *K2, R2->point({4, 1}), t) ==
              doctest::Approx(0.5).epsilon(1e-7));
    }
    CHECK_THROWS_AS(heat_extend(BoundaryMeasure::lebesgue(H), *KH, H->zero(), 0.0), DomainError);
}

TEST_CASE("Euclidean closed forms") {
    // Bump c0 exp(-x^2/c1^2): c0 c1 / sqrt(c1^2 + 4t) exp(-x^2 / (c1^2 + 4t)).
    auto bump = BoundaryMeasure::density(R1, expr(DensityShape::GaussianBump, {2.0, 0.6}));
    auto poly = BoundaryMeasure::density(R1, expr(DensityShape::Polynomial, {1.0, 0.0, 1.0}));
    for (double x : {0.0, 0.4, -1.7})
        for (double t : {0.01, 0.2, 1.5}) {
            double w = 0.36 + 4 * t;
            CHECK(heat_extend(bump, *K1, R1->point({x}), t) ==
                  doctest::Approx(2.0 * 0.6 / std::sqrt(w) * std::exp(-x * x / w)).epsilon(1e-7));
            CHECK(heat_extend(poly, *K1, R1->point({x}), t) == doctest::Approx(1 + x * x + 2 * t).epsilon(1e-7));
        }
    auto atom = BoundaryMeasure::atomic(R1, {R1->point({0.5})}, {3.0});
    CHECK(heat_extend(atom, *K1, R1->point({1.0}), 0.2) ==
          doctest::Approx(3.0 * oracle::gauss_weierstrass(1, 0.25, 0.2)).epsilon(1e-14));
}

TEST_CASE("Heisenberg atoms against direct quadrature") {
    std::vector<oracle::Vec3> atoms{{0.5, -0.2, 0.3}, {-1.0, 0.4, -0.6}};
    auto mu = BoundaryMeasure::atomic(H, {h(0.5, -0.2, 0.3), h(-1.0, 0.4, -0.6)}, {1.0, 2.0});
    for (oracle::Vec3 x : {oracle::Vec3{0, 0, 0}, oracle::Vec3{0.3, 0.3, -0.2}, oracle::Vec3{-0.8, 0.1, 0.9}})
        for (double t : {0.3, 1.0, 2.5}) {
            double ref = atom_oracle(atoms[0], x, t) + 2.0 * atom_oracle(atoms[1], x, t);
            CHECK(heat_extend(mu, *KH, h(x[0], x[1], x[2]), t) == doctest::Approx(ref).epsilon(1e-8));
        }
}

TEST_CASE("polynomial fields on the Heisenberg group") {
    // x^2 -> x^2 + 2t and s^2 -> s^2 + 8t(x^2 + y^2) + 16 t^2.
    auto fx = [](const GroupPoint& p) { return p[0] * p[0]; };
    auto fs = [](const GroupPoint& p) { return p[2] * p[2]; };
    for (auto p : {h(0, 0, 0), h(0.5, -0.3, 0.2), h(-1.0, 0.7, 1.1)})
        for (double t : {0.1, 1.0}) {
            CHECK(heat_extend_field(fx, *KH, p, t) == doctest::Approx(p[0] * p[0] + 2 * t).epsilon(1e-6));
            double ref = p[2] * p[2] + 8 * t * (p[0] * p[0] + p[1] * p[1]) + 16 * t * t;
            CHECK(heat_extend_field(fs, *KH, p, t) == doctest::Approx(ref).epsilon(1e-6));
        }
}

TEST_CASE("class M check") {
    CHECK_NOTHROW(require_class_m(BoundaryMeasure::lebesgue(H), *KH));
    CHECK_NOTHROW(require_class_m(BoundaryMeasure::atomic(H, {h(40, 0, 0)}, {1e6}), *KH));
}

TEST_CASE("parabolic regions and placements") {
    ParabolicRegion p{h(0.1, 0, 0), 2.0};
    CHECK(p.contains(h(0.1, 0, 0), 1e-6));
    CHECK(p.contains(h(1.0, 0, 0), 0.25));
    CHECK_FALSE(p.contains(h(1.2, 0, 0), 0.25));
    CHECK_FALSE(p.contains(h(0.1, 0, 0), 0.0));
    CHECK(default_placements(*H).size() == 17);
    CHECK(default_placements(*R1).size() == 5);
    auto ts = default_t_schedule(1.0, 12);
    REQUIRE(ts.size() == 12);
    CHECK(ts[1] == 0.25);
    CHECK(ts.back() == std::ldexp(1.0, -22));
}

TEST_CASE("parabolic limit traces") {
    ParabolicRegion region{h(0.2, 0.1, -0.3), 1.5};
    auto placements = default_placements(*H);
    auto ts = default_t_schedule();
    auto tr = parabolic_limit([](const GroupPoint&, double t) { return 3.0 + t; }, region, ts, placements);
    CHECK(tr.converged);
    CHECK(tr.estimate == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(tr.samples.size() == placements.size() * ts.size());
    for (const auto& s : tr.samples) CHECK(region.contains(s.x, s.t));

    auto osc = parabolic_limit([](const GroupPoint&, double t) { return std::sin(std::log(t)); }, region, ts,
                               placements);
    CHECK_FALSE(osc.converged);

    bool threw = false;
    try {
        parabolic_limit([](const GroupPoint&, double) -> double { throw DomainError("boom"); }, region, ts,
                        placements);
    } catch (const EvaluationError& e) {
        threw = std::string(e.what()).find("t = ") != std::string::npos;
    }
    CHECK(threw);
    CHECK_THROWS_AS(parabolic_limit([](const GroupPoint&, double) { return 0.0; }, region, {1.0, 2.0}, placements),
                    PreconditionError);
    CHECK_THROWS_AS(parabolic_limit([](const GroupPoint&, double) { return 0.0; }, {H->zero(), 0.0}, ts, placements),
                    PreconditionError);
}

TEST_CASE("strip of definition") {
    auto mu = BoundaryMeasure::lebesgue(H);
    double c0 = KH->certificate().c0;
    CHECK(strip_of_definition(mu, *KH, H->zero(), 2.0) ==
          doctest::Approx(2.0 / (2 * c0 * c0 * H->quasi_triangle_const())));
    CHECK_THROWS_AS(strip_of_definition(mu, *KH, H->zero(), 0.0), DomainError);
}

TEST_CASE("uniform approximation of bounded continuous data") {
    auto f = [](const GroupPoint& p) { return 1.0 / (1.0 + p[0] * p[0] + p[1] * p[1] + std::abs(p[2])); };
    auto grid = radial_grid(*H, 2.0, 4);
    CHECK(grid.size() == 1 + 2 * 8 * 4);
    auto ratios = uniform_ratio_check(f, *KH, {0.1, 0.01, 0.001}, grid);
    CHECK(ratios[1] < ratios[0]);
    CHECK(ratios[2] < ratios[1]);
}

TEST_CASE("duality between measures and bounded data") {
    auto f = [](const GroupPoint& p) {
        double r = norm(p);
        return r < 1.0 ? (1 - r * r) * (1 - r * r) : 0.0;
    };
    auto atoms = BoundaryMeasure::atomic(H, {h(0.2, 0, 0.1), h(-0.3, 0.5, 0)}, {1.0, 0.5});
    CHECK(duality_check(f, atoms, *KH, 0.2) <= 1e-4);
    auto bump = BoundaryMeasure::density(R1, expr(DensityShape::GaussianBump, {1.0, 1.0}));
    auto g1 = [](const GroupPoint& p) { return std::abs(p[0]) < 1 ? 1 - p[0] * p[0] : 0.0; };
    CHECK(duality_check(g1, bump, *K1, 0.1) <= 1e-4);
}

TEST_CASE("commutation with dilations and translations") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<CommutationSample> samples;
    for (int i = 0; i < 20; ++i) samples.push_back({h(u(rng), u(rng), u(rng)), 0.05 + std::abs(u(rng))});
    auto atoms = BoundaryMeasure::atomic(H, {h(0.3, 0, 0), h(0, -0.4, 0.2)}, {1.0, 2.0});
    CHECK(dilation_commutation_check(atoms, *KH, 0.5, samples) <= 1e-10);
    CHECK(translation_commutation_check(atoms, *KH, h(0.4, 0.2, -0.1), samples) <= 1e-10);
    auto bump = BoundaryMeasure::density(H, expr(DensityShape::GaussianBump, {1.0, 1.0}));
    CHECK(dilation_commutation_check(bump, *KH, 2.0, samples) <= 1e-4);
    CHECK(translation_commutation_check(bump, *KH, h(0.4, 0.2, -0.1), samples) <= 1e-4);
}

TEST_CASE("tail vanishing") {
    double R = 1.0 / H->quasi_triangle_const();
    double tm = tail_monotone_time(*H, R);
    CHECK(tm == doctest::Approx(std::pow(R / (2 * H->quasi_triangle_const()), 2) / 16));
    auto ts = default_t_schedule(tm, 8);
    auto mu = BoundaryMeasure::mixture(
        H, {BoundaryMeasure::lebesgue(H), BoundaryMeasure::atomic(H, {h(1.0, 0, 0)}, {5.0})}, {1.0, 1.0});
    auto tr = tail_vanishing_check(mu, *KH, R, ts);
    CHECK(tr.monotone);
    CHECK(tr.sup_tail.back() < 1e-10);
    CHECK(tr.inner_radius == doctest::Approx(R / (2 * H->quasi_triangle_const())));
    for (const auto& p : inner_grid(*H, tr.inner_radius)) CHECK(norm(p) < tr.inner_radius);
}
