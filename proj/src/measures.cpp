#include "fatou/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fatou/errors.hpp"
#include "fatou/parallel.hpp"
#include "fatou/quadrature.hpp"

namespace fatou {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GroupPoint from_coords(const GroupDescriptor& g, const std::array<double, kMaxDim>& c) {
    GroupPoint p = g.zero();
    p.coords = c;
    return p;
}

bool in_box(const Box& box, const GroupPoint& y) {
    for (std::size_t i = 0; i < box.size(); ++i)
        if (y[i] < box[i][0] || y[i] > box[i][1]) return false;
    return true;
}

bool box_bounded(const Box& box) {
    for (const auto& iv : box)
        if (!std::isfinite(iv[0]) || !std::isfinite(iv[1])) return false;
    return true;
}

void require_group(const BoundaryMeasure& mu, const GroupPoint& p) {
    if (p.group != &mu.group()) throw DomainError("point and measure live on different groups");
}

double polar_ball(const GroupDescriptor& g, const std::function<double(const GroupPoint&)>& f,
                  const Ball& b, const BallQuadrature& q, std::vector<double> breaks = {}) {
    PolarOptions opt;
    opt.panels = q.panels;
    opt.order = q.order;
    opt.grading_levels = q.grading_levels;
    opt.breaks = std::move(breaks);
    return polar_integrate(
        g, [&](const GroupPoint& y) { return f(mul(b.center, y)); }, b.radius, opt);
}

// On the line every jump of a box, cut or hole indicator sits at a point, so
// its distance to the ball center is a radial break of the integrand.
std::vector<double> line_breaks(const DensityMeasure& m, const Ball& b) {
    std::vector<double> jumps;
    if (m.box)
        for (double e : m.box->front())
            if (std::isfinite(e)) jumps.push_back(e);
    for (const auto* balls : {&m.cuts, &m.holes})
        for (const auto& c : *balls) {
            jumps.push_back(c.center[0] - c.radius);
            jumps.push_back(c.center[0] + c.radius);
        }
    std::vector<double> out;
    for (double y : jumps) out.push_back(std::abs((y - m.shift[0]) / m.scale - b.center[0]));
    return out;
}

} // namespace

DensityShape DensityExpr::parse_shape(const std::string& name) {
    if (name == "constant") return DensityShape::Constant;
    if (name == "polynomial") return DensityShape::Polynomial;
    if (name == "gaussian-bump") return DensityShape::GaussianBump;
    if (name == "log-oscillatory") return DensityShape::LogOscillatory;
    throw UsageError("unknown density expression '" + name +
                     "' (allowed: constant, polynomial, gaussian-bump, log-oscillatory)");
}

std::string DensityExpr::shape_name(DensityShape s) {
    switch (s) {
    case DensityShape::Constant: return "constant";
    case DensityShape::Polynomial: return "polynomial";
    case DensityShape::GaussianBump: return "gaussian-bump";
    case DensityShape::LogOscillatory: return "log-oscillatory";
    }
    return "?";
}

void DensityExpr::validate() const {
    auto fail = [&](const std::string& why) {
        throw DomainError(shape_name(shape) + " density: " + why);
    };
    for (double c : coeffs)
        if (!std::isfinite(c)) fail("non-finite coefficient");
    switch (shape) {
    case DensityShape::Constant:
        if (coeffs.size() != 1 || coeffs[0] < 0.0) fail("needs one nonnegative value");
        break;
    case DensityShape::Polynomial:
        if (coeffs.empty()) fail("needs at least one coefficient");
        for (double c : coeffs)
            if (c < 0.0) fail("coefficients must be nonnegative");
        break;
    case DensityShape::GaussianBump:
        if (coeffs.size() != 2 || coeffs[0] < 0.0 || !(coeffs[1] > 0.0))
            fail("needs [amplitude >= 0, width > 0]");
        break;
    case DensityShape::LogOscillatory:
        if (coeffs.size() != 2 || coeffs[0] < 0.0 || std::abs(coeffs[1]) > coeffs[0])
            fail("needs [base, amplitude] with |amplitude| <= base");
        break;
    }
}

double DensityExpr::operator()(const GroupDescriptor& g, const GroupPoint& x) const {
    if (shape == DensityShape::Constant) return coeffs[0];
    GroupPoint c = from_coords(g, center);
    const double rho = norm(mul(inverse(c), x));
    switch (shape) {
    case DensityShape::Polynomial: {
        double v = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) v = v * rho + coeffs[k];
        return v;
    }
    case DensityShape::GaussianBump: {
        double u = rho / coeffs[1];
        return coeffs[0] * std::exp(-u * u);
    }
    case DensityShape::LogOscillatory:
        if (rho == 0.0) return coeffs[0];
        return coeffs[0] + coeffs[1] * std::sin(-std::log(rho));
    default:
        return coeffs[0];
    }
}

GroupPoint DensityMeasure::map(const GroupDescriptor& g, const GroupPoint& x) const {
    return mul(from_coords(g, shift), dilate(scale, x));
}

double DensityMeasure::source_value(const GroupDescriptor& g, const GroupPoint& y) const {
    if (box && !in_box(*box, y)) return 0.0;
    for (const auto& c : cuts)
        if (!contains(c, y)) return 0.0;
    for (const auto& h : holes)
        if (contains(h, y)) return 0.0;
    return expr(g, y);
}

bool DensityMeasure::is_constant_everywhere() const {
    return expr.shape == DensityShape::Constant && !box && cuts.empty() && holes.empty();
}

// ---------------------------------------------------------------------------

BoundaryMeasure BoundaryMeasure::atomic(GroupPtr g, std::vector<GroupPoint> points,
                                        std::vector<double> weights) {
    if (points.size() != weights.size()) throw DomainError("atomic measure: points/weights length mismatch");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].group != g.get()) throw DomainError("atomic measure: atom on a different group");
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            throw DomainError("atomic measure: weights must be finite and nonnegative");
    }
    return BoundaryMeasure(std::move(g), AtomicMeasure{std::move(points), std::move(weights)});
}

BoundaryMeasure BoundaryMeasure::density(GroupPtr g, DensityExpr expr, std::optional<Box> box) {
    expr.validate();
    if (box) {
        if (box->size() != g->total_dim()) throw DomainError("density box has wrong dimension");
        for (const auto& iv : *box)
            if (!(iv[0] < iv[1])) throw DomainError("density box needs lo < hi on every axis");
    }
    DensityMeasure d;
    d.expr = std::move(expr);
    d.box = std::move(box);
    return BoundaryMeasure(std::move(g), std::move(d));
}

BoundaryMeasure BoundaryMeasure::from_density(GroupPtr g, DensityMeasure d) {
    d.expr.validate();
    if (!(d.scale > 0.0) || !(d.factor >= 0.0)) throw DomainError("density map needs scale > 0, factor >= 0");
    return BoundaryMeasure(std::move(g), std::move(d));
}

BoundaryMeasure BoundaryMeasure::lebesgue(GroupPtr g, double level) {
    DensityExpr e;
    e.shape = DensityShape::Constant;
    e.coeffs = {level};
    return density(std::move(g), e);
}

BoundaryMeasure BoundaryMeasure::mixture(GroupPtr g, std::vector<BoundaryMeasure> parts,
                                         std::vector<double> coefficients) {
    if (parts.size() != coefficients.size() || parts.empty())
        throw DomainError("mixture needs one coefficient per component");
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].group_ptr() != g) throw DomainError("mixture component on a different group");
        if (!(coefficients[i] >= 0.0) || !std::isfinite(coefficients[i]))
            throw DomainError("mixture coefficients must be finite and nonnegative");
    }
    return BoundaryMeasure(std::move(g), MixtureMeasure{std::move(parts), std::move(coefficients)});
}

double BoundaryMeasure::density_at(const GroupPoint& x) const {
    require_group(*this, x);
    const auto& g = *group_;
    if (const auto* d = std::get_if<DensityMeasure>(&data_))
        return d->factor * d->source_value(g, d->map(g, x));
    if (const auto* m = std::get_if<MixtureMeasure>(&data_)) {
        double v = 0.0;
        for (std::size_t i = 0; i < m->components.size(); ++i)
            v += m->coefficients[i] * m->components[i].density_at(x);
        return v;
    }
    return 0.0;
}

double BoundaryMeasure::total_mass() const {
    const auto& g = *group_;
    if (const auto* a = std::get_if<AtomicMeasure>(&data_)) {
        double s = 0.0;
        for (double w : a->weights) s += w;
        return s;
    }
    if (const auto* m = std::get_if<MixtureMeasure>(&data_)) {
        double s = 0.0;
        for (std::size_t i = 0; i < m->components.size(); ++i)
            if (m->coefficients[i] > 0.0) s += m->coefficients[i] * m->components[i].total_mass();
        return s;
    }
    const auto& d = std::get<DensityMeasure>(data_);
    if (d.factor == 0.0) return 0.0;
    // Integrate in source coordinates: dm(map x) = scale^Q dm(x).
    const double jac = d.factor * std::pow(d.scale, -g.hom_dim());
    auto f = [&](const GroupPoint& y) { return d.source_value(g, y); };
    if (!d.cuts.empty()) {
        BallQuadrature q;
        return jac * polar_ball(g, f, d.cuts.front(), q);
    }
    if (d.box && box_bounded(*d.box)) return jac * box_integrate(g, f, *d.box, 4, 16);
    if (d.expr.shape == DensityShape::GaussianBump) {
        // Radial profile about its center; the box, if any, is unbounded.
        if (!d.box) {
            const double w = d.expr.coeffs[1];
            Ball big{from_coords(g, d.expr.center), 8.0 * w};
            BallQuadrature q{8, 16, 0};
            return jac * polar_ball(g, f, big, q);
        }
    }
    return kInf;
}

std::string BoundaryMeasure::describe() const {
    std::ostringstream os;
    os.precision(6);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                os << "atomic(" << m.points.size() << " atoms)";
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                os << DensityExpr::shape_name(m.expr.shape) << " density";
                if (m.box) os << " on box";
                if (!m.cuts.empty()) os << ", " << m.cuts.size() << " restriction(s)";
                if (!m.holes.empty()) os << ", " << m.holes.size() << " excluded ball(s)";
            } else {
                os << "mixture(";
                for (std::size_t i = 0; i < m.components.size(); ++i)
                    os << (i ? " + " : "") << m.coefficients[i] << "*" << m.components[i].describe();
                os << ")";
            }
        },
        data_);
    return os.str();
}

namespace {

void collect_atoms(const BoundaryMeasure& mu, double coef, AtomicMeasure& out) {
    if (const auto* a = std::get_if<AtomicMeasure>(&mu.variant())) {
        for (std::size_t i = 0; i < a->points.size(); ++i) {
            out.points.push_back(a->points[i]);
            out.weights.push_back(coef * a->weights[i]);
        }
    } else if (const auto* m = std::get_if<MixtureMeasure>(&mu.variant())) {
        for (std::size_t i = 0; i < m->components.size(); ++i)
            collect_atoms(m->components[i], coef * m->coefficients[i], out);
    }
}

} // namespace

AtomicMeasure atoms_of(const BoundaryMeasure& mu) {
    AtomicMeasure out;
    collect_atoms(mu, 1.0, out);
    return out;
}

bool has_density_part(const BoundaryMeasure& mu) {
    if (std::holds_alternative<DensityMeasure>(mu.variant())) return true;
    if (const auto* m = std::get_if<MixtureMeasure>(&mu.variant()))
        for (const auto& c : m->components)
            if (has_density_part(c)) return true;
    return false;
}

// ---------------------------------------------------------------------------

double measure_ball(const BoundaryMeasure& mu, const Ball& b, const BallQuadrature& q) {
    require_group(mu, b.center);
    if (!(b.radius > 0.0)) throw DomainError("measure_ball: radius must be positive");
    const auto& g = mu.group();
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                double s = 0.0;
                for (std::size_t i = 0; i < m.points.size(); ++i)
                    if (dist(b.center, m.points[i]) < b.radius) s += m.weights[i];
                return s;
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                if (m.factor == 0.0) return 0.0;
                if (m.is_constant_everywhere()) return m.factor * m.expr.coeffs[0] * ball_volume(g, b.radius);
                auto f = [&](const GroupPoint& x) { return m.source_value(g, m.map(g, x)); };
                auto breaks = g.total_dim() == 1 ? line_breaks(m, b) : std::vector<double>{};
                double v = m.factor * polar_ball(g, f, b, q, std::move(breaks));
                if (!std::isfinite(v)) throw EvaluationError("measure_ball: non-finite density integral");
                return std::max(0.0, v);
            } else {
                double s = 0.0;
                for (std::size_t i = 0; i < m.components.size(); ++i)
                    if (m.coefficients[i] > 0.0) s += m.coefficients[i] * measure_ball(m.components[i], b, q);
                return s;
            }
        },
        mu.variant());
}

BallEstimate measure_ball_with_error(const BoundaryMeasure& mu, const Ball& b, const BallQuadrature& q) {
    BallQuadrature coarse = q;
    coarse.order = q.order >= 16 ? 8 : 4;
    double fine = measure_ball(mu, b, q);
    return {fine, std::abs(fine - measure_ball(mu, b, coarse))};
}

BoundaryMeasure dilate_measure(const BoundaryMeasure& mu, double r) {
    if (!(r > 0.0)) throw DomainError("dilate_measure: r must be positive");
    const auto& g = mu.group();
    const double jac = std::pow(r, -g.hom_dim());
    return std::visit(
        [&](const auto& m) -> BoundaryMeasure {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                std::vector<GroupPoint> pts;
                std::vector<double> w;
                for (std::size_t i = 0; i < m.points.size(); ++i) {
                    pts.push_back(dilate(1.0 / r, m.points[i]));
                    w.push_back(m.weights[i] * jac);
                }
                return BoundaryMeasure::atomic(mu.group_ptr(), std::move(pts), std::move(w));
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                // nu_r has density f o delta_r.
                DensityMeasure d = m;
                d.scale *= r;
                return BoundaryMeasure::from_density(mu.group_ptr(), std::move(d));
            } else {
                std::vector<BoundaryMeasure> parts;
                for (const auto& c : m.components) parts.push_back(dilate_measure(c, r));
                return BoundaryMeasure::mixture(mu.group_ptr(), std::move(parts), m.coefficients);
            }
        },
        mu.variant());
}

BoundaryMeasure translate_measure(const BoundaryMeasure& mu, const GroupPoint& x0) {
    require_group(mu, x0);
    const auto& g = mu.group();
    return std::visit(
        [&](const auto& m) -> BoundaryMeasure {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                GroupPoint inv = inverse(x0);
                std::vector<GroupPoint> pts;
                for (const auto& p : m.points) pts.push_back(mul(inv, p));
                return BoundaryMeasure::atomic(mu.group_ptr(), std::move(pts), m.weights);
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                // Density f(x0 o x): map(x) becomes shift o delta_scale(x0) o delta_scale(x).
                DensityMeasure d = m;
                d.shift = mul(from_coords(g, m.shift), dilate(m.scale, x0)).coords;
                return BoundaryMeasure::from_density(mu.group_ptr(), std::move(d));
            } else {
                std::vector<BoundaryMeasure> parts;
                for (const auto& c : m.components) parts.push_back(translate_measure(c, x0));
                return BoundaryMeasure::mixture(mu.group_ptr(), std::move(parts), m.coefficients);
            }
        },
        mu.variant());
}

BoundaryMeasure restrict(const BoundaryMeasure& mu, const Ball& b) {
    require_group(mu, b.center);
    const auto& g = mu.group();
    return std::visit(
        [&](const auto& m) -> BoundaryMeasure {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                std::vector<GroupPoint> pts;
                std::vector<double> w;
                for (std::size_t i = 0; i < m.points.size(); ++i)
                    if (contains(b, m.points[i])) {
                        pts.push_back(m.points[i]);
                        w.push_back(m.weights[i]);
                    }
                return BoundaryMeasure::atomic(mu.group_ptr(), std::move(pts), std::move(w));
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                // map(B(c, s)) = B(map(c), scale * s) in source coordinates.
                DensityMeasure d = m;
                d.cuts.push_back({m.map(g, b.center), m.scale * b.radius});
                return BoundaryMeasure::from_density(mu.group_ptr(), std::move(d));
            } else {
                std::vector<BoundaryMeasure> parts;
                for (const auto& c : m.components) parts.push_back(restrict(c, b));
                return BoundaryMeasure::mixture(mu.group_ptr(), std::move(parts), m.coefficients);
            }
        },
        mu.variant());
}

BoundaryMeasure restrict_complement(const BoundaryMeasure& mu, const Ball& b) {
    require_group(mu, b.center);
    const auto& g = mu.group();
    return std::visit(
        [&](const auto& m) -> BoundaryMeasure {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AtomicMeasure>) {
                std::vector<GroupPoint> pts;
                std::vector<double> w;
                for (std::size_t i = 0; i < m.points.size(); ++i)
                    if (!contains(b, m.points[i])) {
                        pts.push_back(m.points[i]);
                        w.push_back(m.weights[i]);
                    }
                return BoundaryMeasure::atomic(mu.group_ptr(), std::move(pts), std::move(w));
            } else if constexpr (std::is_same_v<T, DensityMeasure>) {
                DensityMeasure d = m;
                d.holes.push_back({m.map(g, b.center), m.scale * b.radius});
                return BoundaryMeasure::from_density(mu.group_ptr(), std::move(d));
            } else {
                std::vector<BoundaryMeasure> parts;
                for (const auto& c : m.components) parts.push_back(restrict_complement(c, b));
                return BoundaryMeasure::mixture(mu.group_ptr(), std::move(parts), m.coefficients);
            }
        },
        mu.variant());
}

// ---------------------------------------------------------------------------

std::vector<Ball> default_ball_family(const GroupDescriptor& g) {
    std::vector<Ball> family{{g.zero(), 1.0}};
    const auto& dirs = g.directions();
    const double radii[3] = {0.5, 1.0, 2.0};
    for (int k = 0; k < 8; ++k) {
        double a = 0.5 * (1 + k % 4);
        family.push_back({dilate(a, dirs[k % dirs.size()]), radii[k % 3]});
    }
    return family;
}

std::vector<double> default_radii(int count) {
    std::vector<double> r;
    for (int j = 0; j < count; ++j) r.push_back(std::ldexp(1.0, -j));
    return r;
}

WindowStats trailing_window(const std::vector<std::vector<double>>& rows, std::size_t window) {
    double lo = kInf, hi = -kInf;
    std::vector<double> vals;
    for (const auto& row : rows) {
        std::size_t start = row.size() > window ? row.size() - window : 0;
        for (std::size_t j = start; j < row.size(); ++j) {
            vals.push_back(row[j]);
            lo = std::min(lo, row[j]);
            hi = std::max(hi, row[j]);
        }
    }
    if (vals.empty()) return {0.0, 0.0};
    return {pairwise_sum(vals) / vals.size(), hi - lo};
}

bool converged_within(const WindowStats& w, double tol) {
    return std::isfinite(w.oscillation) && w.oscillation < tol * std::max(1.0, std::abs(w.mean));
}

DerivativeTrace strong_derivative(const BoundaryMeasure& mu, const GroupPoint& x0,
                                  const std::vector<Ball>& family, const std::vector<double>& radii,
                                  const DerivativeOptions& opt) {
    require_group(mu, x0);
    if (family.empty()) throw PreconditionError("strong_derivative: empty ball family");
    bool has_unit = false;
    for (const auto& b : family)
        if (b.radius == 1.0 && norm(b.center) == 0.0) has_unit = true;
    if (!has_unit) throw PreconditionError("strong_derivative: family must contain B(0, 1)");
    if (radii.empty()) throw PreconditionError("strong_derivative: empty radius schedule");
    for (std::size_t j = 0; j < radii.size(); ++j)
        if (!(radii[j] > 0.0) || (j > 0 && !(radii[j] < radii[j - 1])))
            throw PreconditionError("strong_derivative: radii must be positive and strictly decreasing");

    const auto& g = mu.group();
    DerivativeTrace tr;
    tr.family = family;
    tr.radii = radii;
    tr.window = opt.window;
    tr.tolerance = opt.tolerance;
    const std::size_t nr = radii.size();
    auto flat = parallel_map<double>(family.size() * nr, [&](std::size_t k) {
        const Ball& b = family[k / nr];
        double r = radii[k % nr];
        Ball shrunk = translate(x0, dilate(r, b));
        return measure_ball(mu, shrunk, opt.quadrature) / ball_volume(g, shrunk.radius);
    });
    tr.quotients.assign(family.size(), std::vector<double>(nr));
    for (std::size_t k = 0; k < flat.size(); ++k) tr.quotients[k / nr][k % nr] = flat[k];
    auto w = trailing_window(tr.quotients, opt.window);
    tr.estimate = w.mean;
    tr.oscillation = w.oscillation;
    tr.converged = converged_within(w, opt.tolerance);
    return tr;
}

} // namespace fatou
