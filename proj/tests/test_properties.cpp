// Randomized invariants, 10^4 cases each, from fixed seeds.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fatou/heat_extension.hpp"
#include "oracles.hpp"

using namespace fatou;

namespace {
constexpr int kCases = 10000;

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    // Coordinates spread over several scales.
    GroupPoint point(const GroupDescriptor& g) {
        std::vector<double> c(g.total_dim());
        double scale = std::pow(10.0, uniform(-2, 1));
        for (auto& v : c) v = scale * uniform(-1, 1);
        return g.point(c);
    }
};

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * (1 + std::abs(a) + std::abs(b)); }

void check_group_laws(const GroupPtr& g, std::uint64_t seed) {
    Gen gen(seed);
    int failures = 0;
    for (int i = 0; i < kCases; ++i) {
        auto x = gen.point(*g), y = gen.point(*g), z = gen.point(*g);
        double r = std::pow(10.0, gen.uniform(-2, 2));
        auto a = mul(mul(x, y), z), b = mul(x, mul(y, z));
        bool ok = true;
        for (std::size_t k = 0; k < g->total_dim(); ++k) ok &= close(a[k], b[k]);
        auto e = mul(x, inverse(x));
        for (std::size_t k = 0; k < g->total_dim(); ++k) ok &= std::abs(e[k]) <= 1e-12 * (1 + norm(x) * norm(x));
        auto dxy = dilate(r, mul(x, y)), dx_dy = mul(dilate(r, x), dilate(r, y));
        for (std::size_t k = 0; k < g->total_dim(); ++k) ok &= close(dxy[k], dx_dy[k]);
        ok &= close(norm(dilate(r, x)), r * norm(x));
        ok &= close(norm(inverse(x)), norm(x));
        ok &= close(dist(mul(z, x), mul(z, y)), dist(x, y));
        ok &= dist(x, z) <= g->quasi_triangle_const() * (dist(x, y) + dist(y, z)) * (1 + 1e-12);
        if (!ok) ++failures;
    }
    CHECK(failures == 0);
}
} // namespace

TEST_CASE("group laws on the Heisenberg group") { check_group_laws(GroupDescriptor::heisenberg1(), 101); }
TEST_CASE("group laws on R^3") { check_group_laws(GroupDescriptor::euclidean(3), 102); }

TEST_CASE("Heisenberg law agrees with the matrix model") {
    auto g = GroupDescriptor::heisenberg1();
    Gen gen(103);
    int failures = 0;
    for (int i = 0; i < kCases; ++i) {
        auto x = gen.point(*g), y = gen.point(*g);
        auto p = mul(x, y);
        auto q = oracle::heisenberg_mul({x[0], x[1], x[2]}, {y[0], y[1], y[2]});
        if (!(close(p[0], q[0]) && close(p[1], q[1]) && close(p[2], q[2]))) ++failures;
        if (!close(norm(x), oracle::koranyi({x[0], x[1], x[2]}))) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("heat kernel symmetry and scaling") {
    auto g = GroupDescriptor::heisenberg1();
    auto k = KernelProfile::for_group(g);
    Gen gen(104);
    int failures = 0;
    for (int i = 0; i < kCases; ++i) {
        auto x = gen.point(*g);
        double t = std::pow(10.0, gen.uniform(-1, 1));
        double r = std::pow(10.0, gen.uniform(-1, 1));
        double v = eval_kernel(*k, x, t);
        if (!(v > 0.0)) ++failures;
        if (std::abs(eval_kernel(*k, inverse(x), t) - v) > 1e-8 * v) ++failures;
        if (std::abs(std::pow(r, 4) * eval_kernel(*k, dilate(r, x), r * r * t) - v) > 1e-8 * v) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("heat extension of atoms commutes with translation and dilation") {
    auto g = GroupDescriptor::heisenberg1();
    auto k = KernelProfile::for_group(g);
    Gen gen(105);
    int failures = 0;
    for (int i = 0; i < kCases; ++i) {
        auto a = gen.point(*g), x0 = gen.point(*g), x = gen.point(*g);
        double t = gen.uniform(0.05, 2.0), r = gen.uniform(0.2, 5.0);
        auto mu = BoundaryMeasure::atomic(g, {a}, {gen.uniform(0.5, 1.5)});
        double lhs = heat_extend(translate_measure(mu, x0), *k, x, t);
        double rhs = heat_extend(mu, *k, mul(x0, x), t);
        if (std::abs(lhs - rhs) > 1e-10 * (1 + rhs)) ++failures;
        double dl = heat_extend(dilate_measure(mu, r), *k, x, t);
        double dr = heat_extend(mu, *k, dilate(r, x), r * r * t);
        if (std::abs(dl - dr) > 1e-10 * (1 + dr)) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("ball measures of atoms respect translation and dilation") {
    auto g = GroupDescriptor::euclidean(2);
    Gen gen(106);
    int failures = 0;
    for (int i = 0; i < kCases; ++i) {
        std::vector<GroupPoint> pts{gen.point(*g), gen.point(*g), gen.point(*g)};
        auto mu = BoundaryMeasure::atomic(g, pts, {1.0, 2.0, 4.0});
        Ball b{gen.point(*g), gen.uniform(0.01, 3.0)};
        auto x0 = gen.point(*g);
        double r = gen.uniform(0.2, 5.0);
        if (measure_ball(translate_measure(mu, x0), b) != measure_ball(mu, translate(x0, b))) {
            // Only boundary ties may differ; they are measure zero for random data.
            ++failures;
        }
        double lhs = measure_ball(dilate_measure(mu, r), b), rhs = std::pow(r, -2) * measure_ball(mu, dilate(r, b));
        if (std::abs(lhs - rhs) > 1e-12 * (1 + rhs)) ++failures;
    }
    CHECK(failures == 0);
}
