#include "fatou/heat_extension.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fatou/errors.hpp"
#include "fatou/parallel.hpp"

namespace fatou {
namespace {

void require_same_group(const GroupDescriptor& g, const GroupPoint& x) {
    if (x.group != &g) throw DomainError("point lives on a different group than the measure/kernel");
}

std::string coords_text(const GroupPoint& x) {
    std::ostringstream os;
    os.precision(12);
    os << "(";
    for (std::size_t i = 0; i < x.dim(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

// Sum over the time-t heat rule of h(base o delta_scale(w^-1)).
template <class H>
double rule_sum(const KernelProfile& k, const GroupPoint& base, double scale, H&& h) {
    const auto& g = k.group();
    double total = 0.0;
    GroupPoint wi = g.zero();
    for (const auto& node : k.heat_rule()) {
        wi.coords = node.w_inv;
        total += node.weight * h(mul(base, dilate(scale, wi)));
    }
    return total;
}

double density_heat(const DensityMeasure& d, const KernelProfile& k, const GroupPoint& x, double t) {
    if (d.factor == 0.0) return 0.0;
    if (d.is_constant_everywhere()) return d.factor * d.expr.coeffs[0];
    const auto& g = k.group();
    // map(x o delta_sqrt(t) w^-1) = map(x) o delta_{scale sqrt(t)}(w^-1).
    GroupPoint base = d.map(g, x);
    double v = rule_sum(k, base, d.scale * std::sqrt(t), [&](const GroupPoint& y) { return d.source_value(g, y); });
    if (!std::isfinite(v)) throw EvaluationError("heat_extend: non-finite density quadrature at " + coords_text(x));
    return std::max(0.0, d.factor * v);
}

} // namespace

double heat_extend(const BoundaryMeasure& mu, const KernelProfile& k, const GroupPoint& x, double t) {
    if (!(t > 0.0)) throw DomainError("heat_extend requires t > 0");
    if (&mu.group() != &k.group()) throw DomainError("heat_extend: measure and kernel on different groups");
    require_same_group(k.group(), x);
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                double s = 0.0;
                for (std::size_t i = 0; i < m.points.size(); ++i)
                    s += m.weights[i] * k.eval(mul(inverse(m.points[i]), x), t);
                return s;
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                return density_heat(m, k, x, t);
            } else {
                double s = 0.0;
                for (std::size_t i = 0; i < m.components.size(); ++i)
                    if (m.coefficients[i] > 0.0) s += m.coefficients[i] * heat_extend(m.components[i], k, x, t);
                return s;
            }
        },
        mu.variant());
}

double heat_extend_field(const std::function<double(const GroupPoint&)>& f, const KernelProfile& k,
                         const GroupPoint& x, double t) {
    if (!(t > 0.0)) throw DomainError("heat_extend_field requires t > 0");
    require_same_group(k.group(), x);
    return rule_sum(k, x, std::sqrt(t), f);
}

void require_class_m(const BoundaryMeasure& mu, const KernelProfile& k) {
    double v = heat_extend(mu, k, k.group().zero(), 1.0);
    if (!std::isfinite(v))
        throw DomainError("measure is outside class M: heat extension at (0, 1) is not finite");
}

bool ParabolicRegion::contains(const GroupPoint& x, double t) const {
    return t > 0.0 && dist(vertex, x) < aperture * std::sqrt(t);
}

std::vector<Placement> default_placements(const GroupDescriptor& g) {
    const auto& dirs = g.directions();
    std::vector<Placement> out{{0.0, 0, dirs[0]}};
    for (double beta : {0.5, 0.9})
        for (std::size_t k = 0; k < dirs.size(); ++k) out.push_back({beta, static_cast<int>(k), dirs[k]});
    return out;
}

std::vector<double> default_t_schedule(double t_start, int steps) {
    std::vector<double> t;
    for (int j = 0; j < steps; ++j) t.push_back(t_start * std::ldexp(1.0, -2 * j));
    return t;
}

LimitTrace parabolic_limit(const CaloricField& u, const ParabolicRegion& region,
                           const std::vector<double>& schedule, const std::vector<Placement>& placements,
                           const LimitOptions& opt) {
    if (!(region.aperture > 0.0)) throw PreconditionError("parabolic_limit: aperture must be positive");
    if (schedule.empty() || placements.empty()) throw PreconditionError("parabolic_limit: empty schedule or placements");
    for (std::size_t j = 0; j < schedule.size(); ++j)
        if (!(schedule[j] > 0.0) || (j > 0 && !(schedule[j] < schedule[j - 1])))
            throw PreconditionError("parabolic_limit: schedule must be positive and strictly decreasing");
    for (const auto& p : placements)
        if (!(p.beta >= 0.0 && p.beta < 1.0)) throw PreconditionError("parabolic_limit: beta must lie in [0, 1)");

    LimitTrace tr;
    tr.aperture = region.aperture;
    tr.scales = schedule;
    tr.placements = placements;
    tr.window = opt.window;
    tr.tolerance = opt.tolerance;
    const std::size_t ns = schedule.size();
    tr.samples.resize(placements.size() * ns);
    parallel_for(tr.samples.size(), [&](std::size_t k) {
        const auto& pl = placements[k / ns];
        const double t = schedule[k % ns];
        LimitSample s;
        s.t = t;
        s.beta = pl.beta;
        s.direction_id = pl.direction_id;
        s.x = pl.beta == 0.0 ? region.vertex
                             : mul(region.vertex, dilate(pl.beta * region.aperture * std::sqrt(t), pl.omega));
        try {
            s.value = u(s.x, t);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg.precision(12);
            msg << "evaluation failed at x = " << coords_text(s.x) << ", t = " << t << ": " << e.what();
            throw EvaluationError(msg.str());
        }
        tr.samples[k] = s;
    });
    tr.values.assign(placements.size(), std::vector<double>(ns));
    for (std::size_t k = 0; k < tr.samples.size(); ++k) tr.values[k / ns][k % ns] = tr.samples[k].value;
    auto w = trailing_window(tr.values, opt.window);
    tr.estimate = w.mean;
    tr.oscillation = w.oscillation;
    tr.converged = converged_within(w, opt.tolerance);
    return tr;
}

double strip_of_definition(const BoundaryMeasure& mu, const KernelProfile& k, const GroupPoint& x0, double t0) {
    if (!(t0 > 0.0)) throw DomainError("strip_of_definition requires t0 > 0");
    const double c0 = k.certificate().c0;
    if (!(c0 >= 1.0) || k.certificate().grid.empty())
        throw PreconditionError("strip_of_definition: kernel profile has no Gaussian certificate");
    double v = heat_extend(mu, k, x0, t0);
    if (!std::isfinite(v)) throw PreconditionError("strip_of_definition: heat extension at (x0, t0) is not finite");
    return t0 / (2.0 * c0 * c0 * k.group().quasi_triangle_const());
}

std::vector<GroupPoint> radial_grid(const GroupDescriptor& g, double r_max, int radii) {
    std::vector<GroupPoint> grid{g.zero()};
    for (int i = 0; i < radii; ++i) {
        double r = r_max * std::pow(2.0, -(radii - 1 - i) * 0.5);
        for (const auto& w : g.directions()) {
            grid.push_back(dilate(r, w));
            grid.push_back(inverse(dilate(r, w)));
        }
    }
    return grid;
}

double uniform_ratio(const std::function<double(const GroupPoint&)>& f, const KernelProfile& k, double t,
                     const std::vector<GroupPoint>& grid) {
    auto vals = parallel_map<double>(grid.size(), [&](std::size_t i) {
        double gam = k.gamma(grid[i]);
        if (!(gam > 0.0)) return 0.0;
        return std::abs(heat_extend_field(f, k, grid[i], t) - f(grid[i])) / gam;
    });
    double worst = 0.0;
    for (double v : vals) worst = std::max(worst, v);
    return worst;
}

std::vector<double> uniform_ratio_check(const std::function<double(const GroupPoint&)>& f,
                                        const KernelProfile& k, const std::vector<double>& t_schedule,
                                        const std::vector<GroupPoint>& grid) {
    std::vector<double> out;
    for (double t : t_schedule) out.push_back(uniform_ratio(f, k, t, grid));
    return out;
}

double duality_check(const std::function<double(const GroupPoint&)>& f, const BoundaryMeasure& nu,
                     const KernelProfile& k, double t, const DualityOptions& opt) {
    if (!(t > 0.0)) throw DomainError("duality_check requires t > 0");
    const auto& g = k.group();
    PolarOptions polar{opt.panels, opt.order, 0, {}};

    // Left: int Gamma f(x, t) dnu(x).
    const AtomicMeasure atoms = atoms_of(nu);
    double left = 0.0;
    for (std::size_t i = 0; i < atoms.points.size(); ++i)
        left += atoms.weights[i] * heat_extend_field(f, k, atoms.points[i], t);
    if (has_density_part(nu)) {
        // Gamma f(., t) vanishes (to the heat rule's truncation) outside this ball.
        const double reach = g.quasi_triangle_const() * (opt.support_radius + k.heat_rule_radius() * std::sqrt(t));
        left += polar_integrate(
            g, [&](const GroupPoint& x) {
                double dens = nu.density_at(x);
                return dens == 0.0 ? 0.0 : dens * heat_extend_field(f, k, x, t);
            },
            reach, polar);
    }

    // Right: int Gamma nu(x, t) f(x) dm(x) over the support of f.
    double right = polar_integrate(
        g, [&](const GroupPoint& x) {
            double fx = f(x);
            return fx == 0.0 ? 0.0 : fx * heat_extend(nu, k, x, t);
        },
        opt.support_radius, polar);
    return std::abs(left - right);
}

double dilation_commutation_check(const BoundaryMeasure& nu, const KernelProfile& k, double r,
                                  const std::vector<CommutationSample>& samples) {
    if (!(r > 0.0)) throw DomainError("dilation_commutation_check requires r > 0");
    const BoundaryMeasure nr = dilate_measure(nu, r);
    auto res = parallel_map<double>(samples.size(), [&](std::size_t i) {
        const auto& s = samples[i];
        return std::abs(heat_extend(nr, k, s.x, s.t) - heat_extend(nu, k, dilate(r, s.x), r * r * s.t));
    });
    return res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
}

double translation_commutation_check(const BoundaryMeasure& mu, const KernelProfile& k, const GroupPoint& x0,
                                     const std::vector<CommutationSample>& samples) {
    const BoundaryMeasure moved = translate_measure(mu, x0);
    auto res = parallel_map<double>(samples.size(), [&](std::size_t i) {
        const auto& s = samples[i];
        return std::abs(heat_extend(moved, k, s.x, s.t) - heat_extend(mu, k, mul(x0, s.x), s.t));
    });
    return res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
}

std::vector<GroupPoint> inner_grid(const GroupDescriptor& g, double inner) {
    std::vector<GroupPoint> grid{g.zero()};
    const double edge = inner * (1.0 - 1e-9);
    for (double f : {0.5, 1.0})
        for (const auto& w : g.directions()) {
            grid.push_back(dilate(f * edge, w));
            grid.push_back(inverse(dilate(f * edge, w)));
        }
    return grid;
}

TailTrace tail_vanishing_check(const BoundaryMeasure& mu, const KernelProfile& k, double radius,
                               const std::vector<double>& t_schedule) {
    if (!(radius > 0.0)) throw DomainError("tail_vanishing_check: radius must be positive");
    const auto& g = k.group();
    TailTrace tr;
    tr.outer_radius = radius;
    tr.inner_radius = radius / (2.0 * g.quasi_triangle_const());
    tr.schedule = t_schedule;
    const BoundaryMeasure tail = restrict_complement(mu, Ball{g.zero(), radius});
    const auto grid = inner_grid(g, tr.inner_radius);
    const std::size_t n = grid.size();
    auto vals = parallel_map<double>(t_schedule.size() * n, [&](std::size_t i) {
        return heat_extend(tail, k, grid[i % n], t_schedule[i / n]);
    });
    for (std::size_t j = 0; j < t_schedule.size(); ++j)
        tr.sup_tail.push_back(*std::max_element(vals.begin() + j * n, vals.begin() + (j + 1) * n));
    tr.monotone = true;
    for (std::size_t j = 1; j < tr.sup_tail.size(); ++j)
        if (tr.sup_tail[j] > tr.sup_tail[j - 1]) tr.monotone = false;
    return tr;
}

double tail_monotone_time(const GroupDescriptor& g, double radius) {
    const double gap = radius / (2.0 * g.quasi_triangle_const());
    return gap * gap / (4.0 * g.hom_dim());
}

} // namespace fatou
