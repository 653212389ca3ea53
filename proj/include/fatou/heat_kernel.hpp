#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fatou/group.hpp"

namespace fatou {

/// Parameters of the inverse Fourier transform in the central variable used
/// for the Heisenberg kernel.
struct HeisenbergQuadratureSpec {
    double lambda_max = 44.0;    ///< truncation of the lambda integral
    int panels = 44;             ///< Gauss-Legendre panels on [0, lambda_max] (fast path)
    int order = 10;
    double fast_s_limit = 16.0;  ///< |s| above this uses the shifted contour
    double adaptive_tol = 1e-10; ///< relative tolerance of the shifted-contour integral
};

/// Time-one Gauss-Weierstrass kernel (4 pi)^(-n/2) exp(-|x|^2 / 4).
double gamma_euclidean(int n, const GroupPoint& x);

/// Time-one heat kernel of X^2 + Y^2 on H^1 at (x + iy, s):
///   gamma = (1 / 16 pi^2) int_0^inf cos(lambda s / 4) (lambda / sinh lambda)
///           exp(-(|z|^2 / 4) lambda coth lambda) d lambda.
/// For |s| > fast_s_limit the contour is moved to Im lambda = theta, with
/// theta minimizing the integrand on the imaginary axis, and integrated
/// adaptively. Throws EvaluationError if that integral does not converge.
double gamma_heisenberg(double x, double y, double s, const HeisenbergQuadratureSpec& spec = {});

/// One sample of the Gaussian-bound certification grid.
struct GaussianSample {
    double d = 0.0;       ///< d_L(x)
    double t = 0.0;
    double kernel = 0.0;  ///< Gamma(x, t)
    double c_lower = 1.0; ///< smallest c with c^-1 t^-Q/2 exp(-c d^2/t) <= Gamma
    double c_upper = 1.0; ///< smallest c with Gamma <= c t^-Q/2 exp(-d^2/(c t))
};

struct GaussianGridSpec {
    double d_min = 0.03;
    double d_max = 6.0;
    int d_points = 17;                         ///< geometric in d, plus d = 0
    std::vector<double> times{0.25, 1.0, 4.0}; ///< t values
    double c_cap = 1e4;                        ///< certification fails above this
    /// Grid with twice the density in d containing every original point.
    GaussianGridSpec refined() const;
};

struct GaussianCertificate {
    double c0 = 1.0;
    double upper_constant = 1.0; ///< smallest constant for the upper bound alone
    std::vector<GaussianSample> grid;
    double max_violation = 0.0; ///< max over grid of the relative bound violation (<= 0 when valid)
};

/// A point of the time-one heat rule: int g(w) gamma(w) dm(w) ~ sum weight g(w).
/// The node stores w^-1 since heat extensions evaluate x o delta_sqrt(t)(w^-1).
struct HeatNode {
    std::array<double, kMaxDim> w_inv;
    double weight;
};

struct PropertyCheck {
    std::string property;
    std::string grid;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

enum class ValidationState { Unchecked, Validated };

/// Time-one kernel gamma plus the scaling law Gamma(x, t) = t^-Q/2 gamma(delta_{1/sqrt t} x).
/// Construction certifies c0 and builds a truncated heat rule whose tail is
/// bounded through the Gaussian upper estimate.
class KernelProfile {
  public:
    /// Shared, lazily built profile for a shipped group.
    static std::shared_ptr<const KernelProfile> for_group(const GroupPtr& group);

    KernelProfile(GroupPtr group, const HeisenbergQuadratureSpec& spec = {});

    const GroupDescriptor& group() const { return *group_; }
    const GroupPtr& group_ptr() const { return group_; }
    const HeisenbergQuadratureSpec& quadrature_spec() const { return spec_; }

    double gamma(const GroupPoint& x) const;
    /// Gamma(x, t); DomainError for t <= 0.
    double eval(const GroupPoint& x, double t) const;

    const GaussianCertificate& certificate() const { return certificate_; }
    const std::vector<HeatNode>& heat_rule() const { return heat_rule_; }
    double heat_rule_radius() const { return heat_rule_radius_; }
    /// Upper-Gaussian estimate of int_{d(x) > R} Gamma(x, 1) dm(x).
    double tail_bound(double radius) const;
    /// Smallest R (time one) with tail_bound(R) <= tol.
    double truncation_radius(double tol) const;

    ValidationState validation_state() const { return report_ ? ValidationState::Validated
                                                              : ValidationState::Unchecked; }
    const std::vector<PropertyCheck>* validation_report() const {
        return report_ ? &*report_ : nullptr;
    }
    /// Copy of this profile carrying a battery report.
    KernelProfile with_validation(std::vector<PropertyCheck> report) const;

  private:
    void build_heat_rule();

    GroupPtr group_;
    HeisenbergQuadratureSpec spec_;
    GaussianCertificate certificate_;
    std::vector<HeatNode> heat_rule_;
    double heat_rule_radius_ = 0.0;
    std::optional<std::vector<PropertyCheck>> report_;
};

using KernelPtr = std::shared_ptr<const KernelProfile>;

double eval_kernel(const KernelProfile& k, const GroupPoint& x, double t);

/// |Gamma(x, t + tau) - int Gamma(xi^-1 o x, t) Gamma(xi, tau) dm(xi)|; the
/// integral uses the heat rule at the smaller of the two times.
double check_semigroup(const KernelProfile& k, const GroupPoint& x, double t, double tau);

/// Smallest c0 such that both Gaussian bounds hold on the grid.
GaussianCertificate certify_gaussian(const KernelProfile& k, const GaussianGridSpec& grid = {});

/// |L_h Gamma - D_t Gamma| at (x, t): second differences along the flows of
/// the horizontal fields (right translation by exp(hX_j)), centered time
/// difference with step h^2. Requires t > 2 h^2.
double pde_residual(const KernelProfile& k, const GroupPoint& x, double t, double h);

struct BatteryOptions {
    std::vector<double> times{0.25, 1.0, 4.0};
    double tol_normalization = 1e-3;
    double tol_symmetry = 1e-8;
    double tol_semigroup = -1.0; ///< < 0: 1e-6 on Euclidean groups, 1e-2 otherwise
    double tol_scaling = 1e-13;
};

/// Normalization, symmetry, semigroup, scaling, PDE-residual order and
/// Gaussian certificate checks for a profile.
std::vector<PropertyCheck> run_kernel_battery(const KernelProfile& k, const BatteryOptions& opt = {});

} // namespace fatou
