#include "fatou/group.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "fatou/errors.hpp"
#include "fatou/quadrature.hpp"

namespace fatou {
namespace {

constexpr double kPi = boost::math::constants::pi<double>();

void euclid_mul1(const double* x, const double* y, double* o) { o[0] = x[0] + y[0]; }
void euclid_mul2(const double* x, const double* y, double* o) {
    o[0] = x[0] + y[0];
    o[1] = x[1] + y[1];
}
void euclid_mul3(const double* x, const double* y, double* o) {
    o[0] = x[0] + y[0];
    o[1] = x[1] + y[1];
    o[2] = x[2] + y[2];
}
void euclid_inv1(const double* x, double* o) { o[0] = -x[0]; }
void euclid_inv2(const double* x, double* o) {
    o[0] = -x[0];
    o[1] = -x[1];
}
void euclid_inv3(const double* x, double* o) {
    o[0] = -x[0];
    o[1] = -x[1];
    o[2] = -x[2];
}
double euclid_norm1(const double* x) { return std::abs(x[0]); }
double euclid_norm2(const double* x) { return std::hypot(x[0], x[1]); }
double euclid_norm3(const double* x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

// (z, s) o (z', s') = (z + z', s + s' + 2 Im(z conj(z'))), Im(z conj z') = y x' - x y'.
void heis_mul(const double* a, const double* b, double* o) {
    double s = a[2] + b[2] + 2.0 * (a[1] * b[0] - a[0] * b[1]);
    o[0] = a[0] + b[0];
    o[1] = a[1] + b[1];
    o[2] = s;
}
void heis_inv(const double* a, double* o) {
    o[0] = -a[0];
    o[1] = -a[1];
    o[2] = -a[2];
}
// Koranyi norm (|z|^4 + 16 s^2)^(1/4).
double heis_norm(const double* a) {
    double r2 = a[0] * a[0] + a[1] * a[1];
    return std::sqrt(std::sqrt(r2 * r2 + 16.0 * a[2] * a[2]));
}

void require_same(const GroupPoint& x, const GroupPoint& y) {
    if (x.group == nullptr || x.group != y.group)
        throw DomainError("points belong to different groups");
}

} // namespace

std::size_t GroupPoint::dim() const { return group ? group->total_dim() : 0; }

double GroupDescriptor::sphere_measure() const { return hom_dim_ * unit_ball_volume_; }

GroupPoint GroupDescriptor::zero() const {
    GroupPoint p;
    p.group = this;
    return p;
}

GroupPoint GroupDescriptor::point(const std::vector<double>& coords) const {
    if (coords.size() != total_dim_) {
        std::ostringstream msg;
        msg << "group " << label_ << " expects " << total_dim_ << " coordinates, got "
            << coords.size();
        throw DomainError(msg.str());
    }
    GroupPoint p = zero();
    std::copy(coords.begin(), coords.end(), p.coords.begin());
    return p;
}

void GroupDescriptor::finish() {
    total_dim_ = 0;
    hom_dim_ = 0;
    exponents_.clear();
    for (std::size_t j = 0; j < layer_dims_.size(); ++j) {
        total_dim_ += layer_dims_[j];
        hom_dim_ += static_cast<int>(j + 1) * layer_dims_[j];
        for (int k = 0; k < layer_dims_[j]; ++k) exponents_.push_back(static_cast<int>(j + 1));
    }
}

GroupPtr GroupDescriptor::euclidean(int n) {
    static std::once_flag flags[3];
    static GroupPtr cache[3];
    if (n < 1 || n > 3) throw UsageError("euclidean dimension must be 1..3, got " + std::to_string(n));
    std::call_once(flags[n - 1], [n] {
        auto* g = new GroupDescriptor();
        g->label_ = "euclidean:" + std::to_string(n);
        g->layer_dims_ = {n};
        g->finish();
        static constexpr GroupDescriptor::BinaryOp muls[] = {euclid_mul1, euclid_mul2, euclid_mul3};
        static constexpr GroupDescriptor::UnaryOp invs[] = {euclid_inv1, euclid_inv2, euclid_inv3};
        static constexpr GroupDescriptor::NormFn norms[] = {euclid_norm1, euclid_norm2, euclid_norm3};
        g->mul_fn = muls[n - 1];
        g->inverse_fn = invs[n - 1];
        g->norm_fn = norms[n - 1];
        g->unit_ball_volume_ = std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
        g->certificate_.constant = 1.0;
        g->certificate_.max_ratio = 1.0;
        g->certificate_.analytic = true;
        g->certificate_.log = "Euclidean norm: triangle inequality, C_L = 1";

        if (n == 1) {
            g->surface_ = {{g->point({1.0}), 1.0}, {g->point({-1.0}), 1.0}};
            g->directions_ = {g->point({1.0}), g->point({-1.0})};
        } else if (n == 2) {
            for (const auto& a : periodic_trapezoid(64))
                g->surface_.push_back({g->point({std::cos(a.x), std::sin(a.x)}), a.w});
            for (int k = 0; k < 8; ++k) {
                double a = 2.0 * kPi * k / 8.0 + 0.1;
                g->directions_.push_back(g->point({std::cos(a), std::sin(a)}));
            }
        } else {
            auto polar = composite_gauss(-1.0, 1.0, 2, 10);
            auto azimuth = periodic_trapezoid(32);
            for (const auto& c : polar) {
                double sn = std::sqrt(1.0 - c.x * c.x);
                for (const auto& a : azimuth)
                    g->surface_.push_back(
                        {g->point({sn * std::cos(a.x), sn * std::sin(a.x), c.x}), c.w * a.w});
            }
            const double inv = 1.0 / std::sqrt(3.0);
            for (int k = 0; k < 8; ++k) {
                double sx = (k & 1) ? -1.0 : 1.0, sy = (k & 2) ? -1.0 : 1.0, sz = (k & 4) ? -1.0 : 1.0;
                g->directions_.push_back(g->point({sx * inv, sy * inv, sz * inv}));
            }
        }
        cache[n - 1] = GroupPtr(g);
    });
    return cache[n - 1];
}

GroupPtr GroupDescriptor::heisenberg1() {
    static std::once_flag flag;
    static GroupPtr cache;
    std::call_once(flag, [] {
        auto* g = new GroupDescriptor();
        g->label_ = "heisenberg:1";
        g->layer_dims_ = {2, 1};
        g->finish();
        g->mul_fn = heis_mul;
        g->inverse_fn = heis_inv;
        g->norm_fn = heis_norm;
        // m{|z|^4 + 16 s^2 < 1} = int_{|z|<1} (1/2) sqrt(1 - |z|^4) dz = pi^2 / 8.
        g->unit_ball_volume_ = kPi * kPi / 8.0;

        // Coordinates (r, psi, phi): z = r sqrt(cos psi) e^{i phi}, s = r^2 sin(psi) / 4.
        // The Jacobian is r^3 / 4, so dsigma = dpsi dphi / 4 on (-pi/2, pi/2) x [0, 2pi).
        auto psi_rule = composite_gauss(-0.5 * kPi, 0.5 * kPi, 2, 16);
        auto phi_rule = periodic_trapezoid(32);
        auto sphere_point = [g](double psi, double phi) {
            double rho = std::sqrt(std::max(0.0, std::cos(psi)));
            return g->point({rho * std::cos(phi), rho * std::sin(phi), 0.25 * std::sin(psi)});
        };
        for (const auto& p : psi_rule)
            for (const auto& a : phi_rule)
                g->surface_.push_back({sphere_point(p.x, a.x), 0.25 * p.w * a.w});

        const double psis[8] = {0.0, kPi / 4, -kPi / 4, kPi / 2, 0.0, -kPi / 3, kPi / 3, -kPi / 2};
        for (int k = 0; k < 8; ++k) g->directions_.push_back(sphere_point(psis[k], 2.0 * kPi * k / 8.0));

        g->certificate_ = certify_quasi_triangle(*g, 1'000'000, 0x5eedC1u);
        cache = GroupPtr(g);
    });
    return cache;
}

GroupPtr GroupDescriptor::from_label(std::string_view label) {
    if (label == "heisenberg:1") return heisenberg1();
    constexpr std::string_view prefix = "euclidean:";
    if (label.substr(0, prefix.size()) == prefix) {
        auto rest = label.substr(prefix.size());
        if (rest.size() == 1 && rest[0] >= '1' && rest[0] <= '3') return euclidean(rest[0] - '0');
    }
    throw UsageError("unknown group label '" + std::string(label) +
                     "' (expected euclidean:1..3 or heisenberg:1)");
}

GroupPoint mul(const GroupPoint& x, const GroupPoint& y) {
    require_same(x, y);
    GroupPoint out = x.group->zero();
    x.group->mul_fn(x.coords.data(), y.coords.data(), out.coords.data());
    return out;
}

GroupPoint inverse(const GroupPoint& x) {
    if (!x.group) throw DomainError("point without group");
    GroupPoint out = x.group->zero();
    x.group->inverse_fn(x.coords.data(), out.coords.data());
    return out;
}

GroupPoint dilate(double r, const GroupPoint& x) {
    if (!(r > 0.0)) throw DomainError("dilation factor must be positive");
    GroupPoint out = x;
    const auto& g = *x.group;
    for (std::size_t i = 0; i < g.total_dim(); ++i) {
        double f = r;
        for (int e = 1; e < g.exponent(i); ++e) f *= r;
        out.coords[i] = f * x.coords[i];
    }
    return out;
}

double norm(const GroupPoint& x) {
    if (!x.group) throw DomainError("point without group");
    return x.group->norm_fn(x.coords.data());
}

double dist(const GroupPoint& x, const GroupPoint& y) { return norm(mul(inverse(x), y)); }

double ball_volume(const GroupDescriptor& g, double radius) {
    if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
    return g.unit_ball_volume() * std::pow(radius, g.hom_dim());
}

bool contains(const Ball& b, const GroupPoint& p) { return dist(b.center, p) < b.radius; }

Ball dilate(double r, const Ball& b) { return {dilate(r, b.center), r * b.radius}; }

Ball translate(const GroupPoint& x, const Ball& b) { return {mul(x, b.center), b.radius}; }

double euclidean_distance(const GroupPoint& x, const GroupPoint& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
}

double polar_integrate(const GroupDescriptor& g, const std::function<double(const GroupPoint&)>& f,
                       double r_max, const PolarOptions& options) {
    if (!(r_max > 0.0)) throw DomainError("polar_integrate: r_max must be positive");
    std::vector<double> breaks;
    for (int i = 0; i <= options.panels; ++i) breaks.push_back(r_max * i / options.panels);
    double r = r_max / options.panels;
    for (int k = 0; k < options.grading_levels; ++k) {
        r *= 0.5;
        breaks.push_back(r);
    }
    for (double b : options.breaks)
        if (b > 0.0 && b < r_max) breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const auto radial = composite_gauss(breaks, options.order);
    const int q = g.hom_dim();
    double total = 0.0;
    for (const auto& rn : radial) {
        double shell = 0.0;
        for (const auto& node : g.surface_rule()) {
            GroupPoint p = dilate(rn.x, node.omega);
            double v = f(p);
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "non-finite integrand at (";
                for (std::size_t i = 0; i < g.total_dim(); ++i) msg << (i ? ", " : "") << p[i];
                msg << ")";
                throw EvaluationError(msg.str());
            }
            shell += node.weight * v;
        }
        total += rn.w * std::pow(rn.x, q - 1) * shell;
    }
    return total;
}

double box_integrate(const GroupDescriptor& g, const std::function<double(const GroupPoint&)>& f,
                     const std::vector<std::array<double, 2>>& box, int panels, int order) {
    const std::size_t n = g.total_dim();
    if (box.size() != n) throw DomainError("box_integrate: box dimension mismatch");
    std::vector<std::vector<QuadNode>> axes;
    for (const auto& iv : box) axes.push_back(composite_gauss(iv[0], iv[1], panels, order));
    std::vector<std::size_t> idx(n, 0);
    double total = 0.0;
    GroupPoint p = g.zero();
    while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = axes[i][idx[i]].x;
            w *= axes[i][idx[i]].w;
        }
        double v = f(p);
        if (!std::isfinite(v)) throw EvaluationError("box_integrate: non-finite integrand");
        total += w * v;
        std::size_t k = 0;
        while (k < n && ++idx[k] == axes[k].size()) idx[k++] = 0;
        if (k == n) break;
    }
    return total;
}

std::vector<std::array<double, 2>> ball_bounding_box(const GroupDescriptor& g, double r) {
    std::vector<std::array<double, 2>> box;
    for (std::size_t i = 0; i < g.total_dim(); ++i) {
        double extent = g.is_euclidean() ? r : (g.exponent(i) == 1 ? r : 0.25 * r * r);
        box.push_back({-extent, extent});
    }
    return box;
}

QuasiTriangleCertificate certify_quasi_triangle(const GroupDescriptor& g, std::size_t samples,
                                                std::uint64_t seed) {
    const std::size_t n = g.total_dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> log_scale(-2.0, 2.0);

    auto ratio = [&](const std::array<double, 2 * kMaxDim>& v) {
        double out[kMaxDim];
        g.mul_fn(v.data(), v.data() + kMaxDim, out);
        double denom = g.norm_fn(v.data()) + g.norm_fn(v.data() + kMaxDim);
        return denom > 0.0 ? g.norm_fn(out) / denom : 0.0;
    };

    constexpr std::size_t kKeep = 16;
    std::vector<std::pair<double, std::array<double, 2 * kMaxDim>>> best;
    for (std::size_t k = 0; k < samples; ++k) {
        std::array<double, 2 * kMaxDim> v{};
        double scale = std::pow(10.0, log_scale(rng));
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = unit(rng);
            v[kMaxDim + i] = unit(rng);
        }
        // Spread the second point over several orders of magnitude of relative size.
        GroupPoint y = g.zero();
        for (std::size_t i = 0; i < n; ++i) y[i] = v[kMaxDim + i];
        y = dilate(scale, y);
        for (std::size_t i = 0; i < n; ++i) v[kMaxDim + i] = y[i];
        double r = ratio(v);
        if (best.size() < kKeep || r > best.back().first) {
            best.emplace_back(r, v);
            std::sort(best.begin(), best.end(), [](auto& a, auto& b) { return a.first > b.first; });
            if (best.size() > kKeep) best.pop_back();
        }
    }

    std::size_t refinements = 0;
    double overall = best.empty() ? 0.0 : best.front().first;
    for (auto& [r, v] : best) {
        double step = 0.1;
        while (step > 1e-10) {
            bool improved = false;
            for (std::size_t i = 0; i < 2 * kMaxDim; ++i) {
                if (i % kMaxDim >= n) continue;
                for (double sgn : {1.0, -1.0}) {
                    auto trial = v;
                    trial[i] += sgn * step * std::max(1e-3, std::abs(v[i]));
                    double tr = ratio(trial);
                    ++refinements;
                    if (tr > r) {
                        r = tr;
                        v = trial;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        overall = std::max(overall, r);
    }

    QuasiTriangleCertificate cert;
    cert.max_ratio = overall;
    cert.constant = std::max(1.0, overall * (1.0 + 1e-6));
    cert.samples = samples;
    cert.refinements = refinements;
    cert.analytic = false;
    std::ostringstream log;
    log.precision(12);
    log << "random pairs=" << samples << " refinement evals=" << refinements
        << " max ratio=" << overall << " certified C_L=" << cert.constant;
    cert.log = log.str();
    return cert;
}

BiLipschitzReport bilipschitz_report(const GroupDescriptor& g, std::size_t samples,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    BiLipschitzReport rep;
    rep.min_linear = rep.min_root = INFINITY;
    const double inv_step = 1.0 / g.step();
    for (std::size_t k = 0; k < samples; ++k) {
        GroupPoint x = g.zero(), y = g.zero();
        for (std::size_t i = 0; i < g.total_dim(); ++i) {
            x[i] = unit(rng);
            y[i] = unit(rng);
        }
        double e = euclidean_distance(x, y);
        if (e < 1e-9) continue;
        double d = dist(y, x);
        double lin = d / e, root = d / std::pow(e, inv_step);
        rep.min_linear = std::min(rep.min_linear, lin);
        rep.max_linear = std::max(rep.max_linear, lin);
        rep.min_root = std::min(rep.min_root, root);
        rep.max_root = std::max(rep.max_root, root);
        ++rep.samples;
    }
    rep.c_k = std::max(1.0 / rep.min_linear, rep.max_root);
    return rep;
}

} // namespace fatou
