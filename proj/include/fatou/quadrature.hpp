#pragma once

#include <vector>

namespace fatou {

struct QuadNode {
    double x;
    double w;
};

/// Gauss-Legendre nodes on [a, b]. Supported orders: 4, 8, 10, 16, 20, 30.
std::vector<QuadNode> gauss_legendre(double a, double b, int order);

/// Composite Gauss-Legendre rule over the given panel breakpoints.
std::vector<QuadNode> composite_gauss(const std::vector<double>& breaks, int order);

/// Composite rule with `panels` equal panels on [a, b].
std::vector<QuadNode> composite_gauss(double a, double b, int panels, int order);

/// Radial rule on [0, r_max] with panels graded geometrically toward 0
/// (r_max * 2^-k for k < levels) plus any extra breakpoints in (0, r_max).
std::vector<QuadNode> graded_radial_rule(double r_max, int levels, int order,
                                         const std::vector<double>& extra_breaks = {});

/// Trapezoid rule on the circle [0, 2pi) with n nodes.
std::vector<QuadNode> periodic_trapezoid(int n);

} // namespace fatou
