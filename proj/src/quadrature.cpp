#include "fatou/quadrature.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <string>

#include "fatou/errors.hpp"

namespace fatou {
namespace {

template <unsigned N>
std::vector<QuadNode> reference_rule() {
    using rule = boost::math::quadrature::gauss<double, N>;
    const auto& abscissa = rule::abscissa();
    const auto& weights = rule::weights();
    std::vector<QuadNode> out;
    out.reserve(N);
    // boost stores the non-negative half; 0 is present only for odd N.
    for (std::size_t i = abscissa.size(); i-- > 0;) {
        if (abscissa[i] == 0.0) continue;
        out.push_back({-abscissa[i], weights[i]});
    }
    for (std::size_t i = 0; i < abscissa.size(); ++i) out.push_back({abscissa[i], weights[i]});
    return out;
}

const std::vector<QuadNode>& reference(int order) {
    static const auto r4 = reference_rule<4>();
    static const auto r8 = reference_rule<8>();
    static const auto r10 = reference_rule<10>();
    static const auto r16 = reference_rule<16>();
    static const auto r20 = reference_rule<20>();
    static const auto r30 = reference_rule<30>();
    switch (order) {
    case 4: return r4;
    case 8: return r8;
    case 10: return r10;
    case 16: return r16;
    case 20: return r20;
    case 30: return r30;
    default: throw DomainError("unsupported Gauss-Legendre order " + std::to_string(order));
    }
}

} // namespace

std::vector<QuadNode> gauss_legendre(double a, double b, int order) {
    const auto& ref = reference(order);
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    std::vector<QuadNode> out;
    out.reserve(ref.size());
    for (const auto& n : ref) out.push_back({mid + half * n.x, half * n.w});
    return out;
}

std::vector<QuadNode> composite_gauss(const std::vector<double>& breaks, int order) {
    std::vector<QuadNode> out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        auto panel = gauss_legendre(breaks[i], breaks[i + 1], order);
        out.insert(out.end(), panel.begin(), panel.end());
    }
    return out;
}

std::vector<QuadNode> composite_gauss(double a, double b, int panels, int order) {
    std::vector<double> breaks(panels + 1);
    for (int i = 0; i <= panels; ++i) breaks[i] = a + (b - a) * i / panels;
    return composite_gauss(breaks, order);
}

std::vector<QuadNode> graded_radial_rule(double r_max, int levels, int order,
                                         const std::vector<double>& extra_breaks) {
    std::vector<double> breaks{0.0, r_max};
    double r = r_max;
    for (int k = 0; k < levels; ++k) {
        r *= 0.5;
        breaks.push_back(r);
    }
    for (double b : extra_breaks)
        if (b > 0.0 && b < r_max) breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    return composite_gauss(breaks, order);
}

std::vector<QuadNode> periodic_trapezoid(int n) {
    const double two_pi = boost::math::constants::two_pi<double>();
    std::vector<QuadNode> out(n);
    for (int i = 0; i < n; ++i) out[i] = {two_pi * i / n, two_pi / n};
    return out;
}

} // namespace fatou
