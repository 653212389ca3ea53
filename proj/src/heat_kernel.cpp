#include "fatou/heat_kernel.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "fatou/errors.hpp"
#include "fatou/parallel.hpp"
#include "fatou/quadrature.hpp"

namespace fatou {
namespace {

constexpr double kPi = boost::math::constants::pi<double>();
const double kInvSixteenPiSq = 1.0 / (16.0 * kPi * kPi);

// Integrand pieces of the lambda integral on the real axis, cached per spec.
struct FastNodes {
    std::vector<double> lambda;   // nodes
    std::vector<double> weight;   // w * lambda / sinh lambda
    std::vector<double> exponent; // lambda coth lambda
};

FastNodes build_fast_nodes(const HeisenbergQuadratureSpec& spec) {
    FastNodes fn;
    for (const auto& n : composite_gauss(0.0, spec.lambda_max, spec.panels, spec.order)) {
        double l = n.x;
        double ratio = l / std::sinh(l);
        fn.lambda.push_back(l);
        fn.weight.push_back(n.w * ratio);
        fn.exponent.push_back(l / std::tanh(l));
    }
    return fn;
}

const FastNodes& fast_nodes(const HeisenbergQuadratureSpec& spec) {
    static std::mutex mutex;
    static std::map<std::tuple<double, int, int>, FastNodes> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_tuple(spec.lambda_max, spec.panels, spec.order);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_fast_nodes(spec)).first;
    return it->second;
}

// log of the integrand at lambda = i theta (real there):
// -theta |s| / 4 - a theta cot theta + log(theta / sin theta).
double imaginary_axis_log(double theta, double a, double abs_s) {
    if (theta < 1e-8) return -a;
    return -theta * abs_s / 4.0 - a * theta / std::tan(theta) + std::log(theta / std::sin(theta));
}

double optimal_shift(double a, double abs_s) {
    // The function is convex on [0, pi); golden-section search.
    double lo = 0.0, hi = kPi - 1e-6;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
    double f1 = imaginary_axis_log(x1, a, abs_s), f2 = imaginary_axis_log(x2, a, abs_s);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = imaginary_axis_log(x1, a, abs_s);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = imaginary_axis_log(x2, a, abs_s);
        }
    }
    return 0.5 * (lo + hi);
}

// Upper bounds for gamma from the real axis (lambda coth lambda >= 1) and from
// the line Im lambda = pi/2, where |integrand| <= (lambda + pi/2) / cosh lambda
// and int_0^inf (lambda + pi/2) / cosh lambda = 2 G + pi^2 / 4 < 4.3.
double heisenberg_upper_bound(double a, double abs_s) {
    return std::min(std::exp(-a) / 64.0, 4.3 * kInvSixteenPiSq * std::exp(-kPi * abs_s / 8.0));
}

std::string describe(double x, double y, double s) {
    std::ostringstream os;
    os.precision(10);
    os << "(" << x << ", " << y << ", " << s << ")";
    return os.str();
}

} // namespace

double gamma_euclidean(int n, const GroupPoint& x) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    return std::pow(4.0 * kPi, -0.5 * n) * std::exp(-0.25 * r2);
}

double gamma_heisenberg(double x, double y, double s, const HeisenbergQuadratureSpec& spec) {
    const double a = 0.25 * (x * x + y * y);
    const double abs_s = std::abs(s);
    // lambda coth lambda >= 1, so the integrand is below exp(-a) lambda/sinh lambda.
    if (a > 745.0) return 0.0;

    if (abs_s <= spec.fast_s_limit) {
        const auto& fn = fast_nodes(spec);
        const double freq = 0.25 * abs_s;
        double sum = 0.0;
        for (std::size_t k = 0; k < fn.lambda.size(); ++k)
            sum += fn.weight[k] * std::exp(-a * fn.exponent[k]) * std::cos(freq * fn.lambda[k]);
        return kInvSixteenPiSq * sum;
    }

    const double theta = optimal_shift(a, abs_s);
    const double log_peak = imaginary_axis_log(theta, a, abs_s);
    if (log_peak < -740.0) return 0.0;

    // Contour: iθ -> corner + iθ horizontally, then straight up. Singularities
    // sit on the imaginary axis only, and e^{i w s/4} decays upward. The
    // corner is far enough right that exp(-a w coth w) grows slower than
    // e^{|s| y / 8} along the vertical ray.
    using cd = std::complex<double>;
    const double freq = 0.25 * abs_s;
    const double corner = std::max(0.75, 0.5 * std::asinh(8.0 * a / abs_s));
    auto log_f = [&](cd w) {
        if (std::abs(w) < 1e-12) return cd(-a, 0.0);
        return std::log(w / std::sinh(w)) - a * (w / std::tanh(w));
    };
    // Integrands are normalized by the value at λ = iθ, exp(log_peak).
    auto horizontal = [&](double lam) {
        cd w(lam, theta);
        return std::exp(log_f(w) + cd(0.0, freq) * w - log_peak).real();
    };
    auto vertical = [&](double y) {
        cd w(corner, y);
        return (cd(0.0, 1.0) * std::exp(log_f(w) + cd(0.0, freq) * w - log_peak)).real();
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err_h = 0.0, err_v = 0.0;
    double part_h = GK::integrate(horizontal, 0.0, corner, 15, spec.adaptive_tol, &err_h);
    double part_v = GK::integrate(vertical, theta, theta + 340.0 / abs_s, 15, spec.adaptive_tol, &err_v);
    const double integral = part_h + part_v;
    const double err = err_h + err_v;
    if (!std::isfinite(integral) || !(err <= 1e-8 * std::max(std::abs(integral), 1e-6))) {
        std::ostringstream msg;
        msg << "gamma_heisenberg: lambda integral did not converge at " << describe(x, y, s)
            << ": normalized estimate " << integral << ", error estimate " << err;
        throw EvaluationError(msg.str());
    }
    return std::max(0.0, kInvSixteenPiSq * std::exp(log_peak) * integral);
}

// ---------------------------------------------------------------------------

GaussianGridSpec GaussianGridSpec::refined() const {
    GaussianGridSpec r = *this;
    r.d_points = 2 * d_points - 1;
    return r;
}

KernelProfile::KernelProfile(GroupPtr group, const HeisenbergQuadratureSpec& spec)
    : group_(std::move(group)), spec_(spec) {
    certificate_ = certify_gaussian(*this);
    build_heat_rule();
}

std::shared_ptr<const KernelProfile> KernelProfile::for_group(const GroupPtr& group) {
    static std::mutex mutex;
    static std::map<const GroupDescriptor*, std::shared_ptr<const KernelProfile>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(group.get());
    if (it != cache.end()) return it->second;
    auto profile = std::make_shared<const KernelProfile>(group);
    cache.emplace(group.get(), profile);
    return profile;
}

double KernelProfile::gamma(const GroupPoint& x) const {
    if (group_->is_euclidean()) return gamma_euclidean(static_cast<int>(group_->total_dim()), x);
    return gamma_heisenberg(x[0], x[1], x[2], spec_);
}

double KernelProfile::eval(const GroupPoint& x, double t) const {
    if (!(t > 0.0)) throw DomainError("heat kernel requires t > 0");
    const double q = group_->hom_dim();
    return std::pow(t, -0.5 * q) * gamma(dilate(1.0 / std::sqrt(t), x));
}

double eval_kernel(const KernelProfile& k, const GroupPoint& x, double t) { return k.eval(x, t); }

double KernelProfile::tail_bound(double radius) const {
    // Only the upper estimate matters here; its constant gets a 10% margin
    // for radii beyond the certification grid.
    const double c = 1.1 * certificate_.upper_constant;
    const double q = group_->hom_dim();
    return c * group_->sphere_measure() * 0.5 * std::pow(c, 0.5 * q) *
           boost::math::tgamma(0.5 * q, radius * radius / c);
}

double KernelProfile::truncation_radius(double tol) const {
    double lo = 0.0, hi = 1.0;
    while (tail_bound(hi) > tol) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (tail_bound(mid) > tol ? lo : hi) = mid;
    }
    return hi;
}

KernelProfile KernelProfile::with_validation(std::vector<PropertyCheck> report) const {
    KernelProfile copy = *this;
    copy.report_ = std::move(report);
    return copy;
}

void KernelProfile::build_heat_rule() {
    const auto& g = *group_;
    heat_rule_radius_ = truncation_radius(1e-13);
    const int panels = static_cast<int>(std::ceil(heat_rule_radius_ / 1.25));
    const auto radial = composite_gauss(0.0, heat_rule_radius_, panels, 8);
    const int q = g.hom_dim();

    std::vector<HeatNode> nodes;
    auto push = [&](const GroupPoint& w, double weight) {
        if (weight <= 0.0) return;
        HeatNode n{};
        GroupPoint wi = inverse(w);
        n.w_inv = wi.coords;
        n.weight = weight;
        nodes.push_back(n);
    };

    if (g.is_euclidean()) {
        // Radial kernel: one gamma evaluation per radius.
        for (const auto& rn : radial) {
            double radial_w = rn.w * std::pow(rn.x, q - 1) * gamma(dilate(rn.x, g.surface_rule()[0].omega));
            if (radial_w == 0.0) continue;
            for (const auto& node : g.surface_rule()) push(dilate(rn.x, node.omega), radial_w * node.weight);
        }
    } else {
        // gamma depends on (|z|, s) only, so evaluate once per (r, psi).
        // Nodes whose rigorous upper bound is far below the pruning level are
        // never evaluated.
        const auto psi_rule = composite_gauss(-0.5 * kPi, 0.5 * kPi, 2, 16);
        const auto phi_rule = periodic_trapezoid(16);
        std::vector<std::pair<std::size_t, std::size_t>> jobs;
        for (std::size_t i = 0; i < radial.size(); ++i)
            for (std::size_t j = 0; j < psi_rule.size(); ++j) {
                double r = radial[i].x, psi = psi_rule[j].x;
                double a = 0.25 * r * r * std::max(0.0, std::cos(psi));
                double w = radial[i].w * std::pow(r, q - 1) * 0.5 * kPi * psi_rule[j].w;
                if (w * heisenberg_upper_bound(a, 0.25 * r * r * std::abs(std::sin(psi))) < 1e-22) continue;
                jobs.emplace_back(i, j);
            }
        auto values = parallel_map<double>(jobs.size(), [&](std::size_t k) {
            double r = radial[jobs[k].first].x, psi = psi_rule[jobs[k].second].x;
            double rho = r * std::sqrt(std::max(0.0, std::cos(psi)));
            return gamma_heisenberg(rho, 0.0, 0.25 * r * r * std::sin(psi), spec_);
        });
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            if (values[k] == 0.0) continue;
            const auto& rn = radial[jobs[k].first];
            const auto& pn = psi_rule[jobs[k].second];
            double rho = rn.x * std::sqrt(std::max(0.0, std::cos(pn.x)));
            double s = 0.25 * rn.x * rn.x * std::sin(pn.x);
            double base = rn.w * std::pow(rn.x, q - 1) * 0.25 * pn.w * values[k];
            for (const auto& an : phi_rule)
                push(g.point({rho * std::cos(an.x), rho * std::sin(an.x), s}), base * an.w);
        }
    }

    double total = 0.0;
    for (const auto& n : nodes) total += n.weight;
    std::erase_if(nodes, [&](const HeatNode& n) { return n.weight < 1e-15 * total; });
    heat_rule_ = std::move(nodes);
}

// ---------------------------------------------------------------------------

double check_semigroup(const KernelProfile& k, const GroupPoint& x, double t, double tau) {
    if (!(t > 0.0) || !(tau > 0.0)) throw DomainError("check_semigroup requires t, tau > 0");
    const auto& g = k.group();
    const double direct = k.eval(x, t + tau);
    const auto& rule = k.heat_rule();
    std::vector<double> terms(rule.size());
    if (tau <= t) {
        // xi = delta_sqrt(tau)(w): Gamma(xi, tau) dm(xi) = gamma(w) dm(w).
        const double scale = std::sqrt(tau);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            GroupPoint wi = g.zero();
            wi.coords = rule[i].w_inv;
            GroupPoint arg = mul(dilate(scale, wi), x); // xi^-1 o x
            terms[i] = rule[i].weight * k.eval(arg, t);
        }
    } else {
        // xi^-1 o x = delta_sqrt(t)(w)  =>  xi = x o delta_sqrt(t)(w^-1).
        const double scale = std::sqrt(t);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            GroupPoint wi = g.zero();
            wi.coords = rule[i].w_inv;
            GroupPoint xi = mul(x, dilate(scale, wi));
            terms[i] = rule[i].weight * k.eval(xi, tau);
        }
    }
    return std::abs(direct - pairwise_sum(terms));
}

namespace {

double solve_lower(double g, double dd, double cap) {
    // smallest c >= 1 with -log c - c dd <= log g
    double lg = std::log(g);
    auto f = [&](double c) { return -std::log(c) - c * dd - lg; };
    if (f(1.0) <= 0.0) return 1.0;
    if (f(cap) > 0.0) return INFINITY;
    double lo = 1.0, hi = cap;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

double solve_upper(double g, double dd, double cap) {
    // smallest c >= 1 with log g <= log c - dd / c
    double lg = std::log(g);
    auto f = [&](double c) { return lg - (std::log(c) - dd / c); };
    if (f(1.0) <= 0.0) return 1.0;
    if (f(cap) > 0.0) return INFINITY;
    double lo = 1.0, hi = cap;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

} // namespace

GaussianCertificate certify_gaussian(const KernelProfile& k, const GaussianGridSpec& spec) {
    const auto& g = k.group();
    const double q = g.hom_dim();
    std::vector<double> ds{0.0};
    for (int i = 0; i < spec.d_points; ++i)
        ds.push_back(spec.d_min * std::pow(spec.d_max / spec.d_min, spec.d_points > 1 ? double(i) / (spec.d_points - 1) : 0.0));

    struct Job {
        double d, t;
        GroupPoint x;
    };
    std::vector<Job> jobs;
    for (double t : spec.times)
        for (double d : ds)
            for (const auto& omega : g.directions()) {
                jobs.push_back({d, t, d > 0.0 ? dilate(d, omega) : g.zero()});
                if (d == 0.0) break;
            }

    GaussianCertificate cert;
    cert.grid = parallel_map<GaussianSample>(jobs.size(), [&](std::size_t i) {
        const auto& job = jobs[i];
        GaussianSample s;
        s.d = job.d;
        s.t = job.t;
        s.kernel = k.eval(job.x, job.t);
        double scaled = s.kernel * std::pow(job.t, 0.5 * q);
        double dd = job.d * job.d / job.t;
        if (!(scaled > 0.0)) {
            s.c_lower = INFINITY;
            s.c_upper = 1.0;
        } else {
            s.c_lower = solve_lower(scaled, dd, spec.c_cap);
            s.c_upper = solve_upper(scaled, dd, spec.c_cap);
        }
        return s;
    });

    double c0 = 1.0;
    for (const auto& s : cert.grid) c0 = std::max({c0, s.c_lower, s.c_upper});
    if (!std::isfinite(c0) || c0 > spec.c_cap) {
        throw EvaluationError("certify_gaussian: no c0 below cap " + std::to_string(spec.c_cap) +
                              " on group " + g.label());
    }
    c0 *= 1.0 + 1e-12;
    cert.c0 = c0;
    cert.upper_constant = 1.0;
    for (const auto& s : cert.grid) cert.upper_constant = std::max(cert.upper_constant, s.c_upper);
    cert.upper_constant *= 1.0 + 1e-12;
    double worst = -INFINITY;
    for (const auto& s : cert.grid) {
        double norm_t = std::pow(s.t, -0.5 * q);
        double lower = norm_t * std::exp(-c0 * s.d * s.d / s.t) / c0;
        double upper = norm_t * c0 * std::exp(-s.d * s.d / (c0 * s.t));
        worst = std::max({worst, (lower - s.kernel) / s.kernel, (s.kernel - upper) / s.kernel});
    }
    cert.max_violation = worst;
    return cert;
}

double pde_residual(const KernelProfile& k, const GroupPoint& x, double t, double h) {
    if (!(h > 0.0) || !(t > 2.0 * h * h))
        throw PreconditionError("pde_residual requires t > 2 h^2");
    const auto& g = k.group();
    const std::size_t horizontal = static_cast<std::size_t>(g.layer_dims()[0]);
    const double center = k.eval(x, t);
    double lap = 0.0;
    for (std::size_t j = 0; j < horizontal; ++j) {
        GroupPoint step = g.zero();
        step[j] = h;
        GroupPoint back = g.zero();
        back[j] = -h;
        lap += (k.eval(mul(x, step), t) - 2.0 * center + k.eval(mul(x, back), t)) / (h * h);
    }
    const double dt = h * h;
    const double time_derivative = (k.eval(x, t + dt) - k.eval(x, t - dt)) / (2.0 * dt);
    return std::abs(lap - time_derivative);
}

// ---------------------------------------------------------------------------

std::vector<PropertyCheck> run_kernel_battery(const KernelProfile& k, const BatteryOptions& opt) {
    const auto& g = k.group();
    std::vector<PropertyCheck> out;
    auto fmt_times = [&](const std::vector<double>& ts) {
        std::ostringstream os;
        os << "t in {";
        for (std::size_t i = 0; i < ts.size(); ++i) os << (i ? ", " : "") << ts[i];
        os << "}";
        return os.str();
    };

    {
        // Normalization via polar quadrature over the Gaussian-certified ball.
        const double radius = k.truncation_radius(1e-9);
        double worst = 0.0;
        for (double t : opt.times) {
            double total = polar_integrate(
                g, [&](const GroupPoint& p) { return k.eval(p, t); }, radius * std::sqrt(t),
                PolarOptions{8, 16, 0, {}});
            worst = std::max(worst, std::abs(total - 1.0));
        }
        out.push_back({"normalization", fmt_times(opt.times) + ", polar quadrature", worst,
                       opt.tol_normalization, worst <= opt.tol_normalization});
    }

    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> unit(-1.5, 1.5);
    auto random_point = [&] {
        GroupPoint p = g.zero();
        for (std::size_t i = 0; i < g.total_dim(); ++i) p[i] = unit(rng);
        return p;
    };

    {
        double worst = 0.0;
        for (double t : opt.times)
            for (int i = 0; i < 50; ++i) {
                GroupPoint p = random_point();
                double a = k.eval(p, t), b = k.eval(inverse(p), t);
                worst = std::max(worst, std::abs(a - b) / a);
            }
        out.push_back({"symmetry", fmt_times(opt.times) + ", 50 random points each", worst,
                       opt.tol_symmetry, worst <= opt.tol_symmetry});
    }

    {
        double tol = opt.tol_semigroup >= 0.0 ? opt.tol_semigroup : (g.is_euclidean() ? 1e-6 : 1e-2);
        GroupPoint probe = g.zero();
        probe[0] = 0.4;
        double worst = std::max({check_semigroup(k, g.zero(), 1.0, 1.0),
                                 check_semigroup(k, probe, 0.5, 1.0),
                                 check_semigroup(k, probe, 1.0, 0.25)});
        out.push_back({"semigroup", "x in {0, 0.4 e_1}, (t, tau) in {(1,1), (0.5,1), (1,0.25)}",
                       worst, tol, worst <= tol});
    }

    {
        std::uniform_real_distribution<double> log_r(-3.0, 3.0), log_t(-1.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            double r = std::pow(10.0, 0.3 * log_r(rng));
            double t = std::pow(10.0, log_t(rng));
            GroupPoint p = random_point();
            double lhs = k.eval(dilate(r, p), r * r * t);
            double rhs = std::pow(r, -g.hom_dim()) * k.eval(p, t);
            if (rhs > 1e-250) worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
        out.push_back({"scaling", "200 random (r, x, t)", worst, opt.tol_scaling,
                       worst <= opt.tol_scaling});
    }

    {
        GroupPoint p = g.zero();
        for (std::size_t i = 0; i < g.total_dim(); ++i) p[i] = (i == 0 ? 0.5 : (i == 1 ? 0.2 : 0.1));
        if (g.total_dim() == 1) p[0] = 0.3;
        double r1 = pde_residual(k, p, 1.0, 0.1);
        double r2 = pde_residual(k, p, 1.0, 0.05);
        double ratio = r1 / r2;
        out.push_back({"pde_second_order", "h in {0.1, 0.05} at t = 1", std::abs(ratio - 4.0), 1.0,
                       std::abs(ratio - 4.0) <= 1.0});
    }

    {
        const auto& cert = k.certificate();
        auto fine = certify_gaussian(k, GaussianGridSpec{}.refined());
        double drift = std::abs(fine.c0 - cert.c0) / cert.c0;
        bool ok = cert.max_violation <= 0.0 && fine.max_violation <= 0.0 && drift <= 0.1;
        std::ostringstream grid;
        grid << "geometric d grid, c0=" << cert.c0 << ", refined c0=" << fine.c0;
        out.push_back({"gaussian_bounds", grid.str(), std::max(cert.max_violation, fine.max_violation),
                       0.0, ok});
    }
    return out;
}

} // namespace fatou
