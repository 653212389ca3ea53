#pragma once

#include <functional>
#include <vector>

#include "fatou/heat_kernel.hpp"
#include "fatou/measures.hpp"

namespace fatou {

/// Gamma mu(x, t) = int Gamma(xi^-1 o x, t) dmu(xi). Atoms are summed exactly;
/// densities use the profile's heat rule at time t. DomainError for t <= 0.
double heat_extend(const BoundaryMeasure& mu, const KernelProfile& k, const GroupPoint& x, double t);

/// Gamma f(x, t) for a bounded field f (same heat rule as for densities).
double heat_extend_field(const std::function<double(const GroupPoint&)>& f, const KernelProfile& k,
                         const GroupPoint& x, double t);

/// Rejects measures whose heat extension at (0, 1) is not finite.
void require_class_m(const BoundaryMeasure& mu, const KernelProfile& k);

/// P(x0, alpha) = {(x, t) : d(x0, x) < alpha sqrt(t)}.
struct ParabolicRegion {
    GroupPoint vertex;
    double aperture = 1.0;
    bool contains(const GroupPoint& x, double t) const;
};

/// Sample position inside a region: x = x0 o delta_{beta alpha sqrt(t)}(omega).
struct Placement {
    double beta = 0.0;
    int direction_id = 0;
    GroupPoint omega;
};

/// beta = 0 (the vertical ray, one placement) plus beta in {0.5, 0.9} along
/// every group direction.
std::vector<Placement> default_placements(const GroupDescriptor& g);
/// t_j = t_start 4^-j.
std::vector<double> default_t_schedule(double t_start = 1.0, int steps = 12);

struct LimitSample {
    GroupPoint x;
    double t = 0.0;
    double beta = 0.0;
    int direction_id = 0;
    double value = 0.0;
};

struct LimitTrace {
    double aperture = 1.0;
    std::vector<double> scales;
    std::vector<Placement> placements;
    std::vector<LimitSample> samples;           ///< placement-major
    std::vector<std::vector<double>> values;    ///< [placement][scale]
    double estimate = 0.0;
    double oscillation = 0.0;
    bool converged = false;
    std::size_t window = 5;
    double tolerance = 1e-2;
};

struct LimitOptions {
    std::size_t window = 5;
    double tolerance = 1e-2;
};

using CaloricField = std::function<double(const GroupPoint&, double)>;

/// Evaluates u along each placement at each scale. Evaluation errors are
/// rethrown with the sample location attached.
LimitTrace parabolic_limit(const CaloricField& u, const ParabolicRegion& region,
                           const std::vector<double>& schedule, const std::vector<Placement>& placements,
                           const LimitOptions& opt = {});

/// delta = t0 / (2 c0^2 C_L); PreconditionError if Gamma mu(x0, t0) is not finite.
double strip_of_definition(const BoundaryMeasure& mu, const KernelProfile& k, const GroupPoint& x0, double t0);

/// Grid of points: the origin plus radii (geometric up to r_max) along the
/// group directions and their inverses.
std::vector<GroupPoint> radial_grid(const GroupDescriptor& g, double r_max, int radii);

/// max over grid of |Gamma f(x, t) - f(x)| / gamma(x).
double uniform_ratio(const std::function<double(const GroupPoint&)>& f, const KernelProfile& k, double t,
                     const std::vector<GroupPoint>& grid);
std::vector<double> uniform_ratio_check(const std::function<double(const GroupPoint&)>& f,
                                        const KernelProfile& k, const std::vector<double>& t_schedule,
                                        const std::vector<GroupPoint>& grid);

struct DualityOptions {
    double support_radius = 1.0; ///< f vanishes outside B(0, support_radius)
    int panels = 8;
    int order = 16;
};

/// |int Gamma f(x, t) dnu(x) - int Gamma nu(x, t) f(x) dm(x)|, each side by its
/// own quadrature (atoms exactly on the left).
double duality_check(const std::function<double(const GroupPoint&)>& f, const BoundaryMeasure& nu,
                     const KernelProfile& k, double t, const DualityOptions& opt = {});

struct CommutationSample {
    GroupPoint x;
    double t;
};

/// max |Gamma(nu_r)(x, t) - Gamma nu(delta_r x, r^2 t)|.
double dilation_commutation_check(const BoundaryMeasure& nu, const KernelProfile& k, double r,
                                  const std::vector<CommutationSample>& samples);
/// max |Gamma(tau_{x0} mu)(x, t) - Gamma mu(x0 o x, t)|.
double translation_commutation_check(const BoundaryMeasure& mu, const KernelProfile& k, const GroupPoint& x0,
                                     const std::vector<CommutationSample>& samples);

struct TailTrace {
    double outer_radius = 0.0;          ///< tail region G \ B(0, outer_radius)
    double inner_radius = 0.0;          ///< sup taken over B(0, inner_radius)
    std::vector<double> schedule;
    std::vector<double> sup_tail;       ///< one per t
    bool monotone = false;              ///< sup_tail non-increasing along the schedule
};

/// Points of B(0, inner) used for the sup in the tail check.
std::vector<GroupPoint> inner_grid(const GroupDescriptor& g, double inner);

/// sup over x in B(0, R / (2 C_L)) of int_{d(xi) >= R} Gamma(xi^-1 o x, t) dmu(xi).
/// With R = 1/C_L this is the tail of the restriction step.
TailTrace tail_vanishing_check(const BoundaryMeasure& mu, const KernelProfile& k, double radius,
                               const std::vector<double>& t_schedule);

/// Largest t below which Gaussian upper bounds at distance
/// R / (2 C_L) are increasing in t: (R / (2 C_L))^2 / (4 Q).
double tail_monotone_time(const GroupDescriptor& g, double radius);

} // namespace fatou
