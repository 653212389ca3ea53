#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fatou/heat_extension.hpp"
#include "fatou/maximal.hpp"

namespace fatou {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kScenarioSchema = "fatou.scenario/1";

using Json = nlohmann::json;

/// One experiment for the boundary-limit equivalence at a vertex.
struct Scenario {
    std::string name;
    std::string group;
    Json measure;                          ///< measure spec, see build_measure
    std::vector<double> vertex;
    std::vector<double> apertures{0.5, 1.0, 2.0};
    std::vector<double> t_schedule;        ///< empty: default_t_schedule()
    std::vector<double> radii;             ///< empty: default_radii()
    std::size_t window = 5;
    double tolerance = 1e-2;
    std::uint64_t seed = 1;
    std::optional<std::string> expect;     ///< "equivalent" or "both-diverge"
    std::optional<double> expect_value;    ///< limit expected for "equivalent"
};

/// Measure specs (unknown keys rejected with UsageError):
///   {"type": "lebesgue", "level": L}
///   {"type": "density", "shape": ..., "coeffs": [...], "center": [...], "box": [[lo, hi], ...]}
///   {"type": "atomic", "points": [[...], ...], "weights": [...]}
///   {"type": "mixture", "components": [spec, ...], "coefficients": [...]}
BoundaryMeasure build_measure(const Json& spec, const GroupPtr& g);

/// Validates schema, keys and ranges; UsageError on any violation.
Scenario parse_scenario(const Json& config);
Scenario load_scenario(const std::string& path);
/// Canonical form (defaults filled in); parse_scenario(scenario_to_json(s)) == s.
Json scenario_to_json(const Scenario& s);
/// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
std::string config_hash(const Scenario& s);

enum class Verdict { Equivalent, BothDiverge, Mismatch };
std::string verdict_name(Verdict v);
Verdict parse_verdict(const std::string& name);

struct VerdictRule {
    double floor = 1e-2;      ///< |delta| <= max(floor, factor * (osc_D + osc_alpha))
    double osc_factor = 2.0;
};

/// equivalent: every trace converged and every delta within the rule;
/// both-diverge: derivative and at least one aperture not converged;
/// MISMATCH otherwise.
Verdict render_verdict(const DerivativeTrace& d, const std::vector<LimitTrace>& limits,
                       std::vector<double>& deltas, const VerdictRule& rule = {});

struct ScenarioReport {
    std::string name;
    std::string group;
    std::string config_hash;
    std::string version = kVersion;
    std::uint64_t seed = 0;
    std::vector<double> vertex;
    bool translated = true;
    bool restricted = true;
    double restriction_radius = 0.0;
    DerivativeTrace derivative;
    std::vector<LimitTrace> limits;        ///< one per aperture
    std::vector<double> deltas;            ///< |L_parabolic - L_strong| per aperture
    TailTrace tail;
    /// Monte Carlo ball-counting quotient for B(0, 1) at the smallest radius.
    double oracle_quotient = 0.0;
    double oracle_std_error = 0.0;
    VerdictRule rule;
    Verdict verdict = Verdict::Mismatch;
    std::optional<std::string> expect;
    std::optional<double> expect_value;
    bool expectation_met = true;
};

struct RunOptions {
    bool translate = true;  ///< move the vertex to the origin first
    bool restrict = true;   ///< restrict to B(vertex, 1 / C_L)
    std::size_t oracle_samples = 20000;
};

/// Errors from a stage are rethrown as the same exception type with the
/// stage name prefixed.
ScenarioReport run_scenario(const Scenario& s, const RunOptions& opt = {});

Json report_to_json(const ScenarioReport& r);
ScenarioReport report_from_json(const Json& j);

/// Header kind,ball_id,r,quotient,alpha,t,beta,direction_id,value; one row per
/// derivative quotient and per limit sample.
std::string report_to_csv(const ScenarioReport& r);

/// Writes text to path; std::runtime_error with the system message on failure.
void write_text_file(const std::string& path, const std::string& text);

/// Scenario lists of the "euclidean-gehring" and "heisenberg-core" suites.
std::vector<Scenario> preset_scenarios(const std::string& suite);
/// All suites accepted by run_suite.
std::vector<std::string> suite_names();

/// Runs every scenario (in parallel); UsageError for an empty list.
std::vector<ScenarioReport> run_scenarios(const std::vector<Scenario>& list, const RunOptions& opt = {});

struct MaximalCheckRow {
    std::string measure;
    ChainReport chain;
};

struct MaximalCheckReport {
    std::string group;
    std::string phi;                 ///< profile name or "heat"
    std::vector<MaximalCheckRow> rows;
    bool pass = true;
};

/// Random atomic measures (2 to 6 atoms in [-1, 1]^n, weights in [0.5, 1.5])
/// and a random evaluation point each, from path_stream(seed, i).
BoundaryMeasure random_atomic_measure(const GroupPtr& g, std::uint64_t seed, std::uint64_t index);
GroupPoint random_point(const GroupPtr& g, std::uint64_t seed, std::uint64_t index);

/// The chain c M_HL <= M_rad <= M_nt <= C M_HL on the given measures for every
/// alpha. phi = "heat" uses the heat maximal function and kernel constants.
MaximalCheckReport maximal_check(const GroupPtr& g, const std::string& phi, const std::vector<double>& alphas,
                                 const std::vector<std::pair<std::string, BoundaryMeasure>>& measures,
                                 const std::vector<GroupPoint>& points, const ScaleGrid& grid = {});
Json maximal_report_to_json(const MaximalCheckReport& r);

/// Density measures used by the maximal checks (on Euclidean groups).
std::vector<std::pair<std::string, BoundaryMeasure>> sandwich_densities(const GroupPtr& g);

Json battery_to_json(const std::string& group, const std::vector<PropertyCheck>& checks);

struct SuiteOutcome {
    std::string suite;
    Json report;
    std::vector<ScenarioReport> scenarios; ///< scenario suites only
    bool pass = true;
};

/// Runs one of suite_names(); UsageError for other names.
SuiteOutcome run_suite(const std::string& name);

} // namespace fatou
