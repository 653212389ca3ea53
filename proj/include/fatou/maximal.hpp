#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fatou/heat_extension.hpp"

namespace fatou {

/// L-radial, radially nonincreasing, integrable profile phi(x) = p(d(x)),
/// bound to one group together with a quadrature rule for mu * phi_t.
class RadialProfile {
  public:
    /// Checks monotonicity and positivity on a grid and integrability by
    /// radial quadrature; DomainError otherwise.
    RadialProfile(std::string name, std::function<double(double)> p, GroupPtr group);

    const std::string& name() const { return name_; }
    double operator()(double rho) const { return p_(rho); }
    double phi0() const { return phi0_; }
    /// int_G phi dm = sigma(S) int_0^inf p(r) r^(Q-1) dr.
    double mass() const { return mass_; }
    double support_radius() const { return radius_; } ///< quadrature truncation
    const GroupDescriptor& group() const { return *group_; }
    /// Nodes y^-1 with weights p(d(y)) dm(y) on B(0, support_radius).
    const std::vector<HeatNode>& rule() const { return rule_; }

  private:
    std::string name_;
    std::function<double(double)> p_;
    GroupPtr group_;
    double phi0_ = 0.0;
    double mass_ = 0.0;
    double radius_ = 0.0;
    std::vector<HeatNode> rule_;
};

/// a exp(-b rho^2).
RadialProfile gaussian_profile(double a, double b, GroupPtr group);
/// Shipped profiles: "gaussian" (exp(-rho^2)), "minorant" (c0^-1 exp(-c0 rho^2)),
/// "majorant" (c0 exp(-rho^2 / c0)) with the kernel's certified c0.
RadialProfile named_profile(const std::string& name, const KernelProfile& k);

/// Geometric grid on [lo, hi] with `per_decade` points per decade.
struct ScaleGrid {
    double lo = 1e-3;
    double hi = 1e3;
    int per_decade = 40;
    std::vector<double> values() const;
};

/// The grid plus, for every atom at distance d from x inside [lo, hi], the
/// radius d (1 + 1e-12) where the ball quotient jumps.
std::vector<double> maximal_radii(const BoundaryMeasure& mu, const GroupPoint& x, const ScaleGrid& grid);

struct HLResult {
    double value = 0.0;
    bool divergent = false; ///< quotient grew by a factor >= 10 over the last decade at the small end
    std::vector<double> radii;
    std::vector<double> quotients;
};

HLResult hardy_littlewood(const BoundaryMeasure& mu, const GroupPoint& x, const std::vector<double>& radii);

/// mu * phi_t(xi) = int phi_t(eta^-1 o xi) dmu(eta), phi_t(x) = t^-Q phi(delta_{1/t} x).
double profile_convolution(const BoundaryMeasure& mu, const RadialProfile& phi, const GroupPoint& xi, double t);

double radial_max(const BoundaryMeasure& mu, const RadialProfile& phi, const GroupPoint& x,
                  const std::vector<double>& t_grid);
/// Sup over xi = x o delta_{beta alpha t}(omega), t in the grid; the beta = 0
/// placement makes it >= radial_max on the same grid.
double nontangential_max(const BoundaryMeasure& mu, const RadialProfile& phi, double alpha, const GroupPoint& x,
                         const std::vector<double>& t_grid, const std::vector<Placement>& placements);

struct SandwichConstants {
    double c_phi = 0.0;        ///< phi(1) m(B(0,1))
    double c_alpha_phi = 0.0;  ///< m(B(0,1)) (C_L alpha)^Q (2 phi(0) + sum_j phi(2^(j-1) alpha) 2^((j+1)Q))
    /// Same series with the first term 2^Q phi(0), which is what bounding
    /// phi(0) t^-Q mu(B(x0, 2 C_L alpha t)) by the ball quotient produces.
    double c_alpha_phi_strict = 0.0;
    int terms = 0;
};

/// Series truncated once a term drops below 1e-15 of the partial sum;
/// EvaluationError after 10^4 terms.
SandwichConstants sandwich_constants(const RadialProfile& phi, double alpha, const GroupDescriptor& g);

/// sup over s in the grid of Gamma mu(x0, s^2).
double heat_radial_max(const BoundaryMeasure& mu, const KernelProfile& k, const GroupPoint& x0,
                       const std::vector<double>& s_grid);
/// sup of Gamma mu(xi, s^2) over xi = x0 o delta_{beta alpha s}(omega).
double heat_max(const BoundaryMeasure& mu, const KernelProfile& k, const GroupPoint& x0, double alpha,
                const std::vector<double>& s_grid, const std::vector<Placement>& placements);

struct HeatConstants {
    double c_n = 0.0;     ///< c_phi for phi = c0^-1 exp(-c0 rho^2)
    double c_alpha = 0.0; ///< c_{alpha,psi} for psi = c0 exp(-rho^2 / c0)
};
HeatConstants heat_sandwich_constants(const KernelProfile& k, double alpha);

struct ChainReport {
    GroupPoint x;
    double alpha = 0.0;
    double m_hl = 0.0;        ///< over the radius window of the grid
    /// Over the window widened to [2 C_L alpha lo, 2^(terms+1) C_L alpha hi],
    /// the radii of the balls that cover the sup in the upper bound.
    double m_hl_upper = 0.0;
    bool hl_divergent = false;
    double m_rad = 0.0;   ///< radial max (or sup_s Gamma mu(x, s^2) for the heat chain)
    double m_nt = 0.0;    ///< nontangential max (or heat_max)
    double c_lower = 0.0;
    double c_upper = 0.0;
    double slack = 0.02;
    bool chain_ok = false;
};

/// c_phi M_HL <= M_rad <= M_nt <= c_alpha_phi M_HL_upper. The two sup
/// approximations M_rad and M_nt may fall short of their bound by the slack
/// factor; M_rad <= M_nt is checked exactly.
ChainReport lemma_chain(const BoundaryMeasure& mu, const RadialProfile& phi, double alpha, const GroupPoint& x,
                        const ScaleGrid& grid, double slack = 0.02);
ChainReport heat_chain(const BoundaryMeasure& mu, const KernelProfile& k, double alpha, const GroupPoint& x,
                       const ScaleGrid& grid, double slack = 0.02);

} // namespace fatou
