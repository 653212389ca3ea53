#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fatou/group.hpp"

namespace fatou {

using Box = std::vector<std::array<double, 2>>; ///< one [lo, hi] per coordinate, may be infinite

/// Whitelisted density profiles. All are functions of rho = d(center^-1 o x):
///   constant        c[0]
///   polynomial      sum_k c[k] rho^k          (c[k] >= 0)
///   gaussian-bump   c[0] exp(-(rho / c[1])^2)
///   log-oscillatory c[0] + c[1] sin(ln(1 / rho)), c[0] at rho = 0 (|c[1]| <= c[0])
enum class DensityShape { Constant, Polynomial, GaussianBump, LogOscillatory };

struct DensityExpr {
    DensityShape shape = DensityShape::Constant;
    std::vector<double> coeffs{1.0};
    std::array<double, kMaxDim> center{};

    static DensityShape parse_shape(const std::string& name); ///< UsageError on unknown names
    static std::string shape_name(DensityShape s);
    double operator()(const GroupDescriptor& g, const GroupPoint& x) const;
    /// Throws DomainError unless the expression is nonnegative everywhere.
    void validate() const;
};

struct AtomicMeasure {
    std::vector<GroupPoint> points;
    std::vector<double> weights;
};

/// Density g(x) = factor * f(y) * 1_box(y) * prod 1_cut(y) * prod (1 - 1_hole(y))
/// with y = map(x) = shift o delta_scale(x). Expression, box, cuts and holes
/// live in source coordinates; dilation and translation only compose the map.
struct DensityMeasure {
    DensityExpr expr;
    std::optional<Box> box;                 ///< nullopt: the whole group
    std::vector<Ball> cuts;                 ///< restrictions, source coordinates
    std::vector<Ball> holes;                ///< excluded balls, source coordinates
    std::array<double, kMaxDim> shift{};
    double scale = 1.0;
    double factor = 1.0;

    GroupPoint map(const GroupDescriptor& g, const GroupPoint& x) const;
    /// Source-coordinate density at map(x), before the factor.
    double source_value(const GroupDescriptor& g, const GroupPoint& y) const;
    bool is_constant_everywhere() const;
};

class BoundaryMeasure;

struct MixtureMeasure {
    std::vector<BoundaryMeasure> components;
    std::vector<double> coefficients;
};

/// Positive measure on a group. Immutable; the transforms return new measures.
class BoundaryMeasure {
  public:
    using Variant = std::variant<AtomicMeasure, DensityMeasure, MixtureMeasure>;

    static BoundaryMeasure atomic(GroupPtr g, std::vector<GroupPoint> points, std::vector<double> weights);
    static BoundaryMeasure density(GroupPtr g, DensityExpr expr, std::optional<Box> box = std::nullopt);
    /// L times Lebesgue measure.
    static BoundaryMeasure lebesgue(GroupPtr g, double level = 1.0);
    /// Density with an explicit coordinate map (used by the transforms).
    static BoundaryMeasure from_density(GroupPtr g, DensityMeasure d);
    static BoundaryMeasure mixture(GroupPtr g, std::vector<BoundaryMeasure> parts, std::vector<double> coefficients);

    const GroupDescriptor& group() const { return *group_; }
    const GroupPtr& group_ptr() const { return group_; }
    const Variant& variant() const { return data_; }
    bool is_atomic() const { return std::holds_alternative<AtomicMeasure>(data_); }

    /// Density of the absolutely continuous part at x (atoms ignored).
    double density_at(const GroupPoint& x) const;
    /// Total mass, +inf when unbounded.
    double total_mass() const;
    std::string describe() const;

  private:
    BoundaryMeasure(GroupPtr g, Variant v) : group_(std::move(g)), data_(std::move(v)) {}
    GroupPtr group_;
    Variant data_;
};

/// All atoms of mu, weights multiplied through by mixture coefficients.
AtomicMeasure atoms_of(const BoundaryMeasure& mu);
bool has_density_part(const BoundaryMeasure& mu);

/// Radial resolution used by measure_ball for densities.
struct BallQuadrature {
    int panels = 4;
    int order = 16;
    int grading_levels = 12; ///< geometric panels toward the ball center
};

/// mu(B). Atoms count when d(center, p) < radius; densities are integrated in
/// polar coordinates about the ball center.
double measure_ball(const BoundaryMeasure& mu, const Ball& b, const BallQuadrature& q = {});

struct BallEstimate {
    double value = 0.0;
    double error = 0.0; ///< difference to the half-resolution radial rule
};
BallEstimate measure_ball_with_error(const BoundaryMeasure& mu, const Ball& b, const BallQuadrature& q = {});

/// nu_r(E) = r^-Q nu(delta_r E).
BoundaryMeasure dilate_measure(const BoundaryMeasure& mu, double r);
/// tau_{x0} mu(E) = mu(x0 o E).
BoundaryMeasure translate_measure(const BoundaryMeasure& mu, const GroupPoint& x0);
/// E -> mu(E cap B).
BoundaryMeasure restrict(const BoundaryMeasure& mu, const Ball& b);
/// E -> mu(E \ B).
BoundaryMeasure restrict_complement(const BoundaryMeasure& mu, const Ball& b);

struct DerivativeTrace {
    std::vector<Ball> family;
    std::vector<double> radii;
    std::vector<std::vector<double>> quotients; ///< [ball][radius]
    double estimate = 0.0;
    double oscillation = 0.0;
    bool converged = false;
    std::size_t window = 5;
    double tolerance = 1e-2;
};

struct DerivativeOptions {
    std::size_t window = 5;
    double tolerance = 1e-2;
    BallQuadrature quadrature{};
};

/// Unit ball at the origin plus eight off-center balls with centers
/// delta_a(omega_k) for the group's directions.
std::vector<Ball> default_ball_family(const GroupDescriptor& g);
/// r_j = 2^-j, j = 0..count-1.
std::vector<double> default_radii(int count = 12);

/// Quotients mu(x0 o delta_r B) / m(x0 o delta_r B). The estimate is the mean
/// over the trailing window of all balls; converged iff the oscillation there
/// is below tolerance * max(1, |estimate|).
DerivativeTrace strong_derivative(const BoundaryMeasure& mu, const GroupPoint& x0,
                                  const std::vector<Ball>& family, const std::vector<double>& radii,
                                  const DerivativeOptions& opt = {});

/// Trailing-window statistics shared by derivative and limit traces.
struct WindowStats {
    double mean = 0.0;
    double oscillation = 0.0;
};
WindowStats trailing_window(const std::vector<std::vector<double>>& rows, std::size_t window);
bool converged_within(const WindowStats& w, double tol);

} // namespace fatou
