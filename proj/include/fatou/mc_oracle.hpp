#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fatou/heat_kernel.hpp"
#include "fatou/measures.hpp"

namespace fatou {

/// Per-path random stream: std::mt19937_64 seeded from (seed, path). Step k
/// of a path always consumes the same draws, so ensembles do not depend on
/// scheduling and a longer run extends a shorter one path by path.
std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path);

struct PathEnsemble {
    std::size_t n_paths = 0;
    double t_final = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::string generator_tag;
    std::vector<GroupPoint> terminal_points;
};

/// Euler-Maruyama for the diffusion generated by the sub-Laplacian:
/// dx_i = sqrt(2) dB_i on horizontal coordinates and, on H^1,
/// ds = 2 (y dx - x dy). The step is t_final / ceil(t_final / dt).
/// PreconditionError unless 0 < dt <= t_final / 100.
PathEnsemble simulate_horizontal_bm(GroupPtr g, std::size_t n_paths, double t_final, double dt, std::uint64_t seed);

/// Scott-type bandwidth per coordinate: sd_i * n^(-1/(d+4)).
std::vector<double> scott_bandwidth(const PathEnsemble& e);

struct KdeEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double effective_count = 0.0; ///< (sum K)^2 / sum K^2
    bool sparse = false;          ///< effective_count below 100
};

/// Product Gaussian kernel estimate in exponential coordinates.
KdeEstimate kde_density(const PathEnsemble& e, const GroupPoint& x, const std::vector<double>& bandwidth);

/// int prod_i N(x_i - y_i; h_i) Gamma(y, t) dy: the mean of the KDE, so
/// KDE minus this is pure sampling noise plus time-step bias.
double smoothed_kernel(const KernelProfile& k, const GroupPoint& x, double t, const std::vector<double>& bandwidth);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Rejection sampling of B(0, radius) from its bounding box.
McEstimate mc_ball_volume(const GroupDescriptor& g, double radius, std::size_t n_samples, std::uint64_t seed);

/// mu(x0 o delta_r B) / m(x0 o delta_r B) per r: atoms by a direct scan,
/// densities by the mean of the density over uniform samples of the ball.
std::vector<McEstimate> oracle_strong_derivative(const BoundaryMeasure& mu, const GroupPoint& x0, const Ball& b,
                                                 const std::vector<double>& radii, std::size_t n_samples,
                                                 std::uint64_t seed);

struct OracleGridPoint {
    GroupPoint x;
    double kde = 0.0;
    double std_error = 0.0;
    double reference = 0.0;   ///< smoothed kernel at the KDE bandwidth
    double gamma_value = 0.0; ///< unsmoothed kernel
    double z_score = 0.0;
    bool sparse = false;
};

/// KDE of the time-t ensemble against the kernel on a 3 x ... x 3 grid
/// spanning +-span_i per coordinate.
std::vector<OracleGridPoint> kde_grid_comparison(const KernelProfile& k, const PathEnsemble& e,
                                                 const std::vector<double>& span);

} // namespace fatou
