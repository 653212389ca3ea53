#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fatou {

inline constexpr std::size_t kMaxDim = 3;

class GroupDescriptor;

/// Element of G in exponential coordinates, layer-blocked (layer 1 first).
struct GroupPoint {
    const GroupDescriptor* group = nullptr;
    std::array<double, kMaxDim> coords{};

    std::size_t dim() const;
    double& operator[](std::size_t i) { return coords[i]; }
    double operator[](std::size_t i) const { return coords[i]; }
};

/// Open ball {y : d(center, y) < radius} for the homogeneous quasi-metric.
struct Ball {
    GroupPoint center;
    double radius = 1.0;
};

/// A weighted point of the unit sphere S = {w : d(w) = 1}; the weights
/// discretize the surface measure sigma of the polar-coordinates formula.
struct SurfaceNode {
    GroupPoint omega;
    double weight;
};

/// Outcome of the numerical search for the quasi-triangle constant
/// d(x o y) <= C (d(x) + d(y)).
struct QuasiTriangleCertificate {
    double constant = 1.0;      ///< certified C_L (max observed ratio, rounded up)
    double max_ratio = 1.0;     ///< largest ratio found
    std::size_t samples = 0;    ///< random pairs examined
    std::size_t refinements = 0;
    bool analytic = false;      ///< true when C_L is known in closed form
    std::string log;
};

/// A stratified group instance: layer structure plus function slots for the
/// group law and homogeneous norm. Instances are immutable and shared; two
/// points belong to the same group iff they point at the same descriptor.
class GroupDescriptor {
  public:
    using BinaryOp = void (*)(const double* x, const double* y, double* out);
    using UnaryOp = void (*)(const double* x, double* out);
    using NormFn = double (*)(const double* x);

    /// "euclidean:n" (n = 1..3) or "heisenberg:1". Throws UsageError otherwise.
    static std::shared_ptr<const GroupDescriptor> from_label(std::string_view label);
    static std::shared_ptr<const GroupDescriptor> euclidean(int n);
    static std::shared_ptr<const GroupDescriptor> heisenberg1();

    const std::string& label() const { return label_; }
    int step() const { return static_cast<int>(layer_dims_.size()); }
    const std::vector<int>& layer_dims() const { return layer_dims_; }
    std::size_t total_dim() const { return total_dim_; }
    int hom_dim() const { return hom_dim_; }
    /// Dilation exponent (layer index) of coordinate i.
    int exponent(std::size_t i) const { return exponents_[i]; }
    double quasi_triangle_const() const { return certificate_.constant; }
    const QuasiTriangleCertificate& quasi_triangle_certificate() const { return certificate_; }
    double unit_ball_volume() const { return unit_ball_volume_; }
    /// sigma(S) = Q * m(B(0,1)).
    double sphere_measure() const;
    bool is_euclidean() const { return step() == 1; }

    const std::vector<SurfaceNode>& surface_rule() const { return surface_; }
    /// A fixed set of eight unit-sphere directions used for placements and
    /// ball families (two for the real line).
    const std::vector<GroupPoint>& directions() const { return directions_; }

    GroupPoint zero() const;
    GroupPoint point(const std::vector<double>& coords) const;

    BinaryOp mul_fn = nullptr;
    UnaryOp inverse_fn = nullptr;
    NormFn norm_fn = nullptr;

  private:
    GroupDescriptor() = default;
    void finish();

    std::string label_;
    std::vector<int> layer_dims_;
    std::vector<int> exponents_;
    std::size_t total_dim_ = 0;
    int hom_dim_ = 0;
    double unit_ball_volume_ = 0.0;
    QuasiTriangleCertificate certificate_;
    std::vector<SurfaceNode> surface_;
    std::vector<GroupPoint> directions_;
};

using GroupPtr = std::shared_ptr<const GroupDescriptor>;

GroupPoint mul(const GroupPoint& x, const GroupPoint& y);
GroupPoint inverse(const GroupPoint& x);
GroupPoint dilate(double r, const GroupPoint& x);
double norm(const GroupPoint& x);
double dist(const GroupPoint& x, const GroupPoint& y);
double ball_volume(const GroupDescriptor& g, double radius);
bool contains(const Ball& b, const GroupPoint& p);
/// delta_r(B(y, s)) = B(delta_r(y), r s).
Ball dilate(double r, const Ball& b);
/// x o B(y, s) = B(x o y, s).
Ball translate(const GroupPoint& x, const Ball& b);
/// Euclidean norm of the coordinate difference.
double euclidean_distance(const GroupPoint& x, const GroupPoint& y);

struct PolarOptions {
    int panels = 8;              ///< uniform radial panels on [0, r_max]
    int order = 16;              ///< Gauss-Legendre order per panel
    int grading_levels = 0;      ///< extra geometric panels toward r = 0
    std::vector<double> breaks;  ///< additional radial breakpoints
};

/// Integral of f over B(0, r_max) in polar coordinates,
/// int_0^r_max int_S f(delta_r w) r^(Q-1) dsigma(w) dr.
/// Throws EvaluationError naming the point if f returns a non-finite value.
double polar_integrate(const GroupDescriptor& g, const std::function<double(const GroupPoint&)>& f,
                       double r_max, const PolarOptions& options = {});

/// Tensor Gauss-Legendre quadrature over a coordinate box (one [lo, hi] per
/// coordinate), `panels` panels of order `order` per axis.
double box_integrate(const GroupDescriptor& g, const std::function<double(const GroupPoint&)>& f,
                     const std::vector<std::array<double, 2>>& box, int panels, int order);

/// Coordinate box containing B(0, r): layer-j coordinates bounded by r^j
/// times the extent of the unit ball along that coordinate.
std::vector<std::array<double, 2>> ball_bounding_box(const GroupDescriptor& g, double r);

/// Random search for C_L: `samples` random pairs then coordinate-wise local
/// refinement of the best candidates.
QuasiTriangleCertificate certify_quasi_triangle(const GroupDescriptor& g, std::size_t samples,
                                                std::uint64_t seed);

struct BiLipschitzReport {
    double min_linear = 0.0;   ///< min d(y^-1 x) / |x - y|
    double max_linear = 0.0;
    double min_root = 0.0;     ///< min d(y^-1 x) / |x - y|^(1/l)
    double max_root = 0.0;
    double c_k = 0.0;          ///< c_K with c_K^-1 |x-y| <= d <= c_K |x-y|^(1/l)
    std::size_t samples = 0;
};

/// Empirical comparison constants on the Euclidean box [-1, 1]^N.
BiLipschitzReport bilipschitz_report(const GroupDescriptor& g, std::size_t samples,
                                     std::uint64_t seed);

} // namespace fatou
