#include "fatou/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fatou/errors.hpp"
#include "fatou/parallel.hpp"
#include "fatou/quadrature.hpp"

namespace fatou {
namespace {

// Half-widths of a box containing B(0, 1), which is symmetric about 0.
std::vector<double> unit_ball_box(const GroupDescriptor& g) {
    std::vector<double> half;
    for (const auto& side : ball_bounding_box(g, 1.0)) half.push_back(std::max(-side[0], side[1]));
    return half;
}

McEstimate mean_and_error(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = pairwise_sum(v) / n;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = v.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

// Uniform point of B(0, 1) by rejection from the bounding box.
GroupPoint uniform_in_unit_ball(const GroupDescriptor& g, const std::vector<double>& box, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GroupPoint p = g.zero();
    for (;;) {
        for (std::size_t i = 0; i < box.size(); ++i) p.coords[i] = box[i] * u(rng);
        if (norm(p) < 1.0) return p;
    }
}

} // namespace

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    return std::mt19937_64(seq);
}

PathEnsemble simulate_horizontal_bm(GroupPtr g, std::size_t n_paths, double t_final, double dt, std::uint64_t seed) {
    if (!(t_final > 0.0)) throw DomainError("simulate_horizontal_bm requires t_final > 0");
    if (!(dt > 0.0) || dt > t_final / 100.0 * (1.0 + 1e-12))
        throw PreconditionError("simulate_horizontal_bm requires 0 < dt <= t_final / 100");
    if (n_paths == 0) throw DomainError("simulate_horizontal_bm requires n_paths > 0");
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
    const double h = t_final / static_cast<double>(steps);
    const double amp = std::sqrt(2.0 * h);
    const bool heis = !g->is_euclidean();
    const std::size_t nh = heis ? 2 : g->total_dim();

    PathEnsemble e;
    e.n_paths = n_paths;
    e.t_final = t_final;
    e.dt = h;
    e.seed = seed;
    e.generator_tag = heis ? "heisenberg:1/em/dx=sqrt2dB,ds=2(ydx-xdy)" : g->label() + "/em/dx=sqrt2dB";
    e.terminal_points.assign(n_paths, g->zero());
    parallel_for(n_paths, [&](std::size_t p) {
        auto rng = path_stream(seed, p);
        std::normal_distribution<double> normal;
        double x[3] = {0.0, 0.0, 0.0};
        for (std::size_t k = 0; k < steps; ++k) {
            double dx[3] = {0.0, 0.0, 0.0};
            for (std::size_t i = 0; i < nh; ++i) dx[i] = amp * normal(rng);
            if (heis) x[2] += 2.0 * (x[1] * dx[0] - x[0] * dx[1]);
            for (std::size_t i = 0; i < nh; ++i) x[i] += dx[i];
        }
        for (std::size_t i = 0; i < g->total_dim(); ++i) e.terminal_points[p].coords[i] = x[i];
    });
    return e;
}

std::vector<double> scott_bandwidth(const PathEnsemble& e) {
    if (e.terminal_points.empty()) throw DomainError("scott_bandwidth: empty ensemble");
    const std::size_t d = e.terminal_points.front().dim();
    const double n = static_cast<double>(e.terminal_points.size());
    std::vector<double> h(d);
    std::vector<double> col(e.terminal_points.size());
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t p = 0; p < col.size(); ++p) col[p] = e.terminal_points[p][i];
        McEstimate m = mean_and_error(col);
        h[i] = m.std_error * std::sqrt(n) * std::pow(n, -1.0 / (static_cast<double>(d) + 4.0));
    }
    return h;
}

KdeEstimate kde_density(const PathEnsemble& e, const GroupPoint& x, const std::vector<double>& bandwidth) {
    const std::size_t d = x.dim();
    if (bandwidth.size() != d) throw DomainError("kde_density: bandwidth has the wrong dimension");
    double norm_const = 1.0;
    for (double h : bandwidth) {
        if (!(h > 0.0)) throw DomainError("kde_density requires a positive bandwidth");
        norm_const /= h * std::sqrt(2.0 * std::numbers::pi);
    }
    std::vector<double> k(e.terminal_points.size());
    parallel_for(k.size(), [&](std::size_t p) {
        double q = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double u = (x[i] - e.terminal_points[p][i]) / bandwidth[i];
            q += u * u;
        }
        k[p] = norm_const * std::exp(-0.5 * q);
    });
    McEstimate m = mean_and_error(k);
    std::vector<double> sq(k.size());
    for (std::size_t p = 0; p < k.size(); ++p) sq[p] = k[p] * k[p];
    const double s1 = pairwise_sum(k), s2 = pairwise_sum(sq);
    KdeEstimate out;
    out.value = m.value;
    out.std_error = m.std_error;
    out.effective_count = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
    out.sparse = out.effective_count < 100.0;
    return out;
}

double smoothed_kernel(const KernelProfile& k, const GroupPoint& x, double t, const std::vector<double>& bandwidth) {
    const std::size_t d = x.dim();
    if (bandwidth.size() != d) throw DomainError("smoothed_kernel: bandwidth has the wrong dimension");
    // Gaussian weight folded into a Gauss-Legendre rule on +-6 h.
    const auto base = composite_gauss(-6.0, 6.0, 3, 8);
    std::vector<double> w(base.size());
    for (std::size_t j = 0; j < base.size(); ++j)
        w[j] = base[j].w * std::exp(-0.5 * base[j].x * base[j].x) / std::sqrt(2.0 * std::numbers::pi);
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= base.size();
    auto vals = parallel_map<double>(total, [&](std::size_t idx) {
        GroupPoint y = x;
        double weight = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            std::size_t j = idx % base.size();
            idx /= base.size();
            y.coords[i] = x[i] + bandwidth[i] * base[j].x;
            weight *= w[j];
        }
        return weight * k.eval(y, t);
    });
    return pairwise_sum(vals);
}

McEstimate mc_ball_volume(const GroupDescriptor& g, double radius, std::size_t n_samples, std::uint64_t seed) {
    if (!(radius > 0.0)) throw DomainError("mc_ball_volume requires radius > 0");
    if (n_samples == 0) throw DomainError("mc_ball_volume requires samples");
    const auto box = unit_ball_box(g);
    double box_volume = 1.0;
    for (std::size_t i = 0; i < box.size(); ++i) box_volume *= 2.0 * box[i] * std::pow(radius, g.exponent(i));
    // Blocks of samples share one stream so the count is scheduling-independent.
    const std::size_t block = 4096;
    const std::size_t blocks = (n_samples + block - 1) / block;
    auto hits = parallel_map<double>(blocks, [&](std::size_t b) {
        auto rng = path_stream(seed, b);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        GroupPoint p = g.zero();
        double c = 0.0;
        const std::size_t end = std::min(n_samples, (b + 1) * block);
        for (std::size_t s = b * block; s < end; ++s) {
            for (std::size_t i = 0; i < box.size(); ++i) p.coords[i] = box[i] * u(rng);
            if (norm(p) < 1.0) c += 1.0;
        }
        return c;
    });
    const double n = static_cast<double>(n_samples);
    const double frac = pairwise_sum(hits) / n;
    return {box_volume * frac, box_volume * std::sqrt(frac * (1.0 - frac) / n)};
}

std::vector<McEstimate> oracle_strong_derivative(const BoundaryMeasure& mu, const GroupPoint& x0, const Ball& b,
                                                 const std::vector<double>& radii, std::size_t n_samples,
                                                 std::uint64_t seed) {
    const auto& g = mu.group();
    if (n_samples == 0) throw DomainError("oracle_strong_derivative requires samples");
    const auto box = unit_ball_box(g);
    const AtomicMeasure atoms = atoms_of(mu);
    const bool density = has_density_part(mu);
    std::vector<McEstimate> out;
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        const double r = radii[ri];
        if (!(r > 0.0)) throw DomainError("oracle_strong_derivative requires r > 0");
        // x0 o delta_r B(c, R) = B(x0 o delta_r c, r R).
        const GroupPoint center = mul(x0, dilate(r, b.center));
        const double radius = r * b.radius;
        const double volume = ball_volume(g, radius);
        double atom_mass = 0.0;
        for (std::size_t i = 0; i < atoms.points.size(); ++i)
            if (dist(center, atoms.points[i]) < radius) atom_mass += atoms.weights[i];
        McEstimate q{atom_mass / volume, 0.0};
        if (density) {
            auto vals = parallel_map<double>(n_samples, [&](std::size_t s) {
                auto rng = path_stream(seed + ri, s);
                GroupPoint u = uniform_in_unit_ball(g, box, rng);
                return mu.density_at(mul(center, dilate(radius, u)));
            });
            McEstimate m = mean_and_error(vals);
            q.value += m.value;
            q.std_error = m.std_error;
        }
        out.push_back(q);
    }
    return out;
}

std::vector<OracleGridPoint> kde_grid_comparison(const KernelProfile& k, const PathEnsemble& e,
                                                 const std::vector<double>& span) {
    const auto& g = k.group();
    const std::size_t d = g.total_dim();
    if (span.size() != d) throw DomainError("kde_grid_comparison: span has the wrong dimension");
    const auto h = scott_bandwidth(e);
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= 3;
    std::vector<OracleGridPoint> out;
    for (std::size_t idx = 0; idx < total; ++idx) {
        OracleGridPoint p;
        p.x = g.zero();
        std::size_t rest = idx;
        for (std::size_t i = 0; i < d; ++i) {
            p.x.coords[i] = span[i] * (static_cast<double>(rest % 3) - 1.0);
            rest /= 3;
        }
        KdeEstimate est = kde_density(e, p.x, h);
        p.kde = est.value;
        p.std_error = est.std_error;
        p.sparse = est.sparse;
        p.gamma_value = k.eval(p.x, e.t_final);
        p.reference = smoothed_kernel(k, p.x, e.t_final, h);
        p.z_score = est.std_error > 0.0 ? (est.value - p.reference) / est.std_error : 0.0;
        out.push_back(p);
    }
    return out;
}

} // namespace fatou
