#include "fatou/scenario.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "fatou/errors.hpp"
#include "fatou/mc_oracle.hpp"
#include "fatou/parallel.hpp"

namespace fatou {
namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw UsageError(where + ": expected an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key())) throw UsageError(where + ": unknown key '" + item.key() + "'");
}

double number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw UsageError(where + ": expected a number");
    return j.get<double>();
}

std::vector<double> numbers(const Json& j, const std::string& where) {
    if (!j.is_array()) throw UsageError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> coords_of(const GroupPoint& x) {
    return std::vector<double>(x.coords.begin(), x.coords.begin() + static_cast<std::ptrdiff_t>(x.dim()));
}

GroupPoint point_from(const GroupPtr& g, const Json& j, const std::string& where) {
    auto c = numbers(j, where);
    if (c.size() != g->total_dim())
        throw UsageError(where + ": expected " + std::to_string(g->total_dim()) + " coordinates");
    return g->point(c);
}

void require_decreasing(const std::vector<double>& v, const std::string& where) {
    if (v.empty()) throw UsageError(where + ": must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!(v[i] > 0.0) || (i > 0 && !(v[i] < v[i - 1])))
            throw UsageError(where + ": must be positive and strictly decreasing");
}

// Runs one stage, prefixing its name to any library error.
template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const UsageError& e) {
        throw UsageError(name + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(name + ": " + e.what());
    } catch (const PreconditionError& e) {
        throw PreconditionError(name + ": " + e.what());
    } catch (const EvaluationError& e) {
        throw EvaluationError(name + ": " + e.what());
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json ball_json(const Ball& b) { return {{"center", coords_of(b.center)}, {"radius", b.radius}}; }

Json limit_json(const LimitTrace& t) {
    Json placements = Json::array();
    for (const auto& p : t.placements)
        placements.push_back({{"beta", p.beta}, {"direction_id", p.direction_id}, {"omega", coords_of(p.omega)}});
    Json samples = Json::array();
    for (const auto& s : t.samples)
        samples.push_back({{"x", coords_of(s.x)},
                           {"t", s.t},
                           {"beta", s.beta},
                           {"direction_id", s.direction_id},
                           {"value", s.value}});
    return {{"aperture", t.aperture},       {"scales", t.scales},           {"placements", placements},
            {"samples", samples},           {"values", t.values},           {"estimate", t.estimate},
            {"oscillation", t.oscillation}, {"converged", t.converged},     {"window", t.window},
            {"tolerance", t.tolerance}};
}

LimitTrace limit_from(const Json& j, const GroupPtr& g) {
    LimitTrace t;
    t.aperture = j.at("aperture").get<double>();
    t.scales = j.at("scales").get<std::vector<double>>();
    for (const auto& p : j.at("placements"))
        t.placements.push_back({p.at("beta").get<double>(), p.at("direction_id").get<int>(),
                                point_from(g, p.at("omega"), "placement")});
    for (const auto& s : j.at("samples")) {
        LimitSample ls;
        ls.x = point_from(g, s.at("x"), "sample");
        ls.t = s.at("t").get<double>();
        ls.beta = s.at("beta").get<double>();
        ls.direction_id = s.at("direction_id").get<int>();
        ls.value = s.at("value").get<double>();
        t.samples.push_back(ls);
    }
    t.values = j.at("values").get<std::vector<std::vector<double>>>();
    t.estimate = j.at("estimate").get<double>();
    t.oscillation = j.at("oscillation").get<double>();
    t.converged = j.at("converged").get<bool>();
    t.window = j.at("window").get<std::size_t>();
    t.tolerance = j.at("tolerance").get<double>();
    return t;
}

Json chain_json(const ChainReport& c) {
    return {{"x", coords_of(c.x)},
            {"alpha", c.alpha},
            {"M_HL", c.m_hl},
            {"M_HL_upper", c.m_hl_upper},
            {"hl_divergent", c.hl_divergent},
            {"M_rad", c.m_rad},
            {"M_nt", c.m_nt},
            {"c_phi", c.c_lower},
            {"c_alpha_phi", c.c_upper},
            {"slack", c.slack},
            {"chain_ok", c.chain_ok}};
}

bool nonnegative_integer(const Json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

} // namespace

BoundaryMeasure build_measure(const Json& spec, const GroupPtr& g) {
    if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string())
        throw UsageError("measure: expected an object with a string 'type'");
    const std::string type = spec["type"].get<std::string>();
    try {
        if (type == "lebesgue") {
            check_keys(spec, {"type", "level"}, "measure(lebesgue)");
            double level = spec.contains("level") ? number(spec["level"], "measure.level") : 1.0;
            if (!(level >= 0.0) || !std::isfinite(level)) throw UsageError("measure.level must be finite and >= 0");
            return BoundaryMeasure::lebesgue(g, level);
        }
        if (type == "density") {
            check_keys(spec, {"type", "shape", "coeffs", "center", "box"}, "measure(density)");
            if (!spec.contains("shape") || !spec["shape"].is_string())
                throw UsageError("measure(density): 'shape' is required");
            DensityExpr e;
            e.shape = DensityExpr::parse_shape(spec["shape"].get<std::string>());
            if (!spec.contains("coeffs")) throw UsageError("measure(density): 'coeffs' is required");
            e.coeffs = numbers(spec["coeffs"], "measure.coeffs");
            if (spec.contains("center")) {
                GroupPoint c = point_from(g, spec["center"], "measure.center");
                e.center = c.coords;
            }
            std::optional<Box> box;
            if (spec.contains("box")) {
                if (!spec["box"].is_array() || spec["box"].size() != g->total_dim())
                    throw UsageError("measure.box: expected one [lo, hi] per coordinate");
                Box b;
                for (const auto& side : spec["box"]) {
                    auto lh = numbers(side, "measure.box");
                    if (lh.size() != 2 || !(lh[0] < lh[1])) throw UsageError("measure.box: need lo < hi");
                    b.push_back({lh[0], lh[1]});
                }
                box = b;
            }
            e.validate();
            return BoundaryMeasure::density(g, e, box);
        }
        if (type == "atomic") {
            check_keys(spec, {"type", "points", "weights"}, "measure(atomic)");
            if (!spec.contains("points") || !spec["points"].is_array())
                throw UsageError("measure(atomic): 'points' must be an array");
            std::vector<GroupPoint> pts;
            for (const auto& p : spec["points"]) pts.push_back(point_from(g, p, "measure.points"));
            auto w = spec.contains("weights") ? numbers(spec["weights"], "measure.weights")
                                              : std::vector<double>(pts.size(), 1.0);
            return BoundaryMeasure::atomic(g, pts, w);
        }
        if (type == "mixture") {
            check_keys(spec, {"type", "components", "coefficients"}, "measure(mixture)");
            if (!spec.contains("components") || !spec["components"].is_array())
                throw UsageError("measure(mixture): 'components' must be an array");
            std::vector<BoundaryMeasure> parts;
            for (const auto& c : spec["components"]) parts.push_back(build_measure(c, g));
            auto coef = spec.contains("coefficients") ? numbers(spec["coefficients"], "measure.coefficients")
                                                      : std::vector<double>(parts.size(), 1.0);
            return BoundaryMeasure::mixture(g, parts, coef);
        }
    } catch (const DomainError& e) {
        throw UsageError(std::string("measure: ") + e.what());
    }
    throw UsageError("measure: unknown type '" + type + "' (allowed: lebesgue, density, atomic, mixture)");
}

Scenario parse_scenario(const Json& j) {
    check_keys(j,
               {"schema", "name", "group", "measure", "vertex", "apertures", "t_schedule", "radii", "window",
                "tolerance", "seed", "expect", "expect_value"},
               "scenario");
    if (!j.contains("schema") || j["schema"] != kScenarioSchema)
        throw UsageError(std::string("scenario: 'schema' must be \"") + kScenarioSchema + "\"");
    for (const char* key : {"name", "group", "measure", "vertex"})
        if (!j.contains(key)) throw UsageError(std::string("scenario: missing '") + key + "'");
    Scenario s;
    if (!j["name"].is_string() || !j["group"].is_string()) throw UsageError("scenario: name and group are strings");
    s.name = j["name"].get<std::string>();
    s.group = j["group"].get<std::string>();
    GroupPtr g = GroupDescriptor::from_label(s.group);
    s.measure = j["measure"];
    build_measure(s.measure, g);
    s.vertex = coords_of(point_from(g, j["vertex"], "scenario.vertex"));
    if (j.contains("apertures")) s.apertures = numbers(j["apertures"], "scenario.apertures");
    if (s.apertures.empty()) throw UsageError("scenario.apertures: must not be empty");
    for (double a : s.apertures)
        if (!(a > 0.0) || !std::isfinite(a)) throw UsageError("scenario.apertures: must be positive");
    s.t_schedule = j.contains("t_schedule") ? numbers(j["t_schedule"], "scenario.t_schedule") : default_t_schedule();
    require_decreasing(s.t_schedule, "scenario.t_schedule");
    s.radii = j.contains("radii") ? numbers(j["radii"], "scenario.radii") : default_radii();
    require_decreasing(s.radii, "scenario.radii");
    if (j.contains("window")) {
        if (!nonnegative_integer(j["window"])) throw UsageError("scenario.window: expected a positive integer");
        s.window = j["window"].get<std::size_t>();
    }
    if (s.window < 2 || s.window > s.t_schedule.size() || s.window > s.radii.size())
        throw UsageError("scenario.window: must lie in [2, schedule length]");
    if (j.contains("tolerance")) s.tolerance = number(j["tolerance"], "scenario.tolerance");
    if (!(s.tolerance > 0.0)) throw UsageError("scenario.tolerance: must be positive");
    if (j.contains("seed")) {
        if (!nonnegative_integer(j["seed"])) throw UsageError("scenario.seed: expected a nonnegative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("expect") && !j["expect"].is_null()) {
        if (!j["expect"].is_string()) throw UsageError("scenario.expect: expected a string");
        s.expect = j["expect"].get<std::string>();
        Verdict v = parse_verdict(*s.expect);
        if (v == Verdict::Mismatch) throw UsageError("scenario.expect: must be equivalent or both-diverge");
    }
    if (j.contains("expect_value") && !j["expect_value"].is_null())
        s.expect_value = number(j["expect_value"], "scenario.expect_value");
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "': " + std::strerror(errno));
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(j);
}

Json scenario_to_json(const Scenario& s) {
    Json j = {{"schema", kScenarioSchema}, {"name", s.name},         {"group", s.group},
              {"measure", s.measure},      {"vertex", s.vertex},     {"apertures", s.apertures},
              {"t_schedule", s.t_schedule.empty() ? default_t_schedule() : s.t_schedule},
              {"radii", s.radii.empty() ? default_radii() : s.radii},
              {"window", s.window},        {"tolerance", s.tolerance}, {"seed", s.seed}};
    j["expect"] = s.expect ? Json(*s.expect) : Json(nullptr);
    j["expect_value"] = s.expect_value ? Json(*s.expect_value) : Json(nullptr);
    return j;
}

std::string config_hash(const Scenario& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : scenario_to_json(s).dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Equivalent: return "equivalent";
    case Verdict::BothDiverge: return "both-diverge";
    case Verdict::Mismatch: return "MISMATCH";
    }
    return "MISMATCH";
}

Verdict parse_verdict(const std::string& name) {
    if (name == "equivalent") return Verdict::Equivalent;
    if (name == "both-diverge") return Verdict::BothDiverge;
    if (name == "MISMATCH") return Verdict::Mismatch;
    throw UsageError("unknown verdict '" + name + "'");
}

Verdict render_verdict(const DerivativeTrace& d, const std::vector<LimitTrace>& limits, std::vector<double>& deltas,
                       const VerdictRule& rule) {
    deltas.clear();
    bool all_limits = true;
    bool agree = true;
    for (const auto& l : limits) {
        double delta = std::abs(l.estimate - d.estimate);
        deltas.push_back(delta);
        all_limits = all_limits && l.converged;
        agree = agree && delta <= std::max(rule.floor, rule.osc_factor * (d.oscillation + l.oscillation));
    }
    if (d.converged && all_limits) return agree ? Verdict::Equivalent : Verdict::Mismatch;
    if (!d.converged && !all_limits) return Verdict::BothDiverge;
    return Verdict::Mismatch;
}

ScenarioReport run_scenario(const Scenario& s, const RunOptions& opt) {
    ScenarioReport r;
    r.name = s.name;
    r.group = s.group;
    r.config_hash = config_hash(s);
    r.seed = s.seed;
    r.vertex = s.vertex;
    r.translated = opt.translate;
    r.restricted = opt.restrict;
    r.expect = s.expect;
    r.expect_value = s.expect_value;
    const auto t_schedule = s.t_schedule.empty() ? default_t_schedule() : s.t_schedule;
    const auto radii = s.radii.empty() ? default_radii() : s.radii;

    GroupPtr g = stage("build", [&] { return GroupDescriptor::from_label(s.group); });
    KernelPtr k = stage("kernel", [&] { return KernelProfile::for_group(g); });
    BoundaryMeasure mu = stage("build", [&] {
        auto m = build_measure(s.measure, g);
        require_class_m(m, *k);
        return m;
    });
    const GroupPoint x0 = g->point(s.vertex);
    const double radius = 1.0 / g->quasi_triangle_const();
    r.restriction_radius = opt.restrict ? radius : 0.0;

    BoundaryMeasure centered = stage("translate", [&] { return translate_measure(mu, x0); });
    const BoundaryMeasure& moved = opt.translate ? centered : mu;
    const GroupPoint v = opt.translate ? g->zero() : x0;
    BoundaryMeasure work = stage("restrict", [&] { return opt.restrict ? restrict(moved, Ball{v, radius}) : moved; });

    std::vector<double> tail_schedule;
    const double t_mono = tail_monotone_time(*g, radius);
    for (double t : t_schedule)
        if (t <= t_mono) tail_schedule.push_back(t);
    r.tail = stage("tail", [&] { return tail_vanishing_check(centered, *k, radius, tail_schedule); });

    DerivativeOptions dopt;
    dopt.window = s.window;
    dopt.tolerance = s.tolerance;
    r.derivative = stage("derivative",
                         [&] { return strong_derivative(work, v, default_ball_family(*g), radii, dopt); });

    LimitOptions lopt{s.window, s.tolerance};
    const auto placements = default_placements(*g);
    CaloricField u = [&](const GroupPoint& x, double t) { return heat_extend(work, *k, x, t); };
    for (double a : s.apertures)
        r.limits.push_back(
            stage("limit", [&] { return parabolic_limit(u, ParabolicRegion{v, a}, t_schedule, placements, lopt); }));

    auto oracle = stage("oracle", [&] {
        return oracle_strong_derivative(work, v, Ball{g->zero(), 1.0}, {radii.back()}, opt.oracle_samples, s.seed);
    });
    r.oracle_quotient = oracle.front().value;
    r.oracle_std_error = oracle.front().std_error;

    r.verdict = render_verdict(r.derivative, r.limits, r.deltas, r.rule);
    if (r.expect) {
        r.expectation_met = parse_verdict(*r.expect) == r.verdict;
        if (r.expectation_met && r.expect_value && r.verdict == Verdict::Equivalent) {
            const double tol = std::max(r.rule.floor, r.rule.osc_factor * r.derivative.oscillation);
            r.expectation_met = std::abs(r.derivative.estimate - *r.expect_value) <= tol;
            for (const auto& l : r.limits)
                r.expectation_met = r.expectation_met &&
                                    std::abs(l.estimate - *r.expect_value) <=
                                        std::max(r.rule.floor, r.rule.osc_factor * l.oscillation);
        }
    }
    return r;
}

Json report_to_json(const ScenarioReport& r) {
    Json family = Json::array();
    for (const auto& b : r.derivative.family) family.push_back(ball_json(b));
    Json limits = Json::array();
    for (const auto& l : r.limits) limits.push_back(limit_json(l));
    Json j = {
        {"name", r.name},
        {"group", r.group},
        {"version", r.version},
        {"config_hash", r.config_hash},
        {"seed", r.seed},
        {"vertex", r.vertex},
        {"reductions",
         {{"translated", r.translated}, {"restricted", r.restricted}, {"restriction_radius", r.restriction_radius}}},
        {"derivative",
         {{"family", family},
          {"radii", r.derivative.radii},
          {"quotients", r.derivative.quotients},
          {"estimate", r.derivative.estimate},
          {"oscillation", r.derivative.oscillation},
          {"converged", r.derivative.converged},
          {"window", r.derivative.window},
          {"tolerance", r.derivative.tolerance}}},
        {"limits", limits},
        {"deltas", r.deltas},
        {"tail",
         {{"outer_radius", r.tail.outer_radius},
          {"inner_radius", r.tail.inner_radius},
          {"schedule", r.tail.schedule},
          {"sup_tail", r.tail.sup_tail},
          {"monotone", r.tail.monotone}}},
        {"oracle", {{"quotient", r.oracle_quotient}, {"std_error", r.oracle_std_error}}},
        {"verdict_rule", {{"floor", r.rule.floor}, {"osc_factor", r.rule.osc_factor}}},
        {"verdict", verdict_name(r.verdict)},
        {"expectation_met", r.expectation_met},
    };
    j["expect"] = r.expect ? Json(*r.expect) : Json(nullptr);
    j["expect_value"] = r.expect_value ? Json(*r.expect_value) : Json(nullptr);
    return j;
}

ScenarioReport report_from_json(const Json& j) {
    try {
        ScenarioReport r;
        r.name = j.at("name").get<std::string>();
        r.group = j.at("group").get<std::string>();
        GroupPtr g = GroupDescriptor::from_label(r.group);
        r.version = j.at("version").get<std::string>();
        r.config_hash = j.at("config_hash").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.vertex = j.at("vertex").get<std::vector<double>>();
        const auto& red = j.at("reductions");
        r.translated = red.at("translated").get<bool>();
        r.restricted = red.at("restricted").get<bool>();
        r.restriction_radius = red.at("restriction_radius").get<double>();
        const auto& d = j.at("derivative");
        for (const auto& b : d.at("family"))
            r.derivative.family.push_back(Ball{point_from(g, b.at("center"), "family"), b.at("radius").get<double>()});
        r.derivative.radii = d.at("radii").get<std::vector<double>>();
        r.derivative.quotients = d.at("quotients").get<std::vector<std::vector<double>>>();
        r.derivative.estimate = d.at("estimate").get<double>();
        r.derivative.oscillation = d.at("oscillation").get<double>();
        r.derivative.converged = d.at("converged").get<bool>();
        r.derivative.window = d.at("window").get<std::size_t>();
        r.derivative.tolerance = d.at("tolerance").get<double>();
        for (const auto& l : j.at("limits")) r.limits.push_back(limit_from(l, g));
        r.deltas = j.at("deltas").get<std::vector<double>>();
        const auto& t = j.at("tail");
        r.tail.outer_radius = t.at("outer_radius").get<double>();
        r.tail.inner_radius = t.at("inner_radius").get<double>();
        r.tail.schedule = t.at("schedule").get<std::vector<double>>();
        r.tail.sup_tail = t.at("sup_tail").get<std::vector<double>>();
        r.tail.monotone = t.at("monotone").get<bool>();
        r.oracle_quotient = j.at("oracle").at("quotient").get<double>();
        r.oracle_std_error = j.at("oracle").at("std_error").get<double>();
        r.rule.floor = j.at("verdict_rule").at("floor").get<double>();
        r.rule.osc_factor = j.at("verdict_rule").at("osc_factor").get<double>();
        r.verdict = parse_verdict(j.at("verdict").get<std::string>());
        if (!j.at("expect").is_null()) r.expect = j.at("expect").get<std::string>();
        if (!j.at("expect_value").is_null()) r.expect_value = j.at("expect_value").get<double>();
        r.expectation_met = j.at("expectation_met").get<bool>();
        return r;
    } catch (const Json::exception& e) {
        throw UsageError(std::string("malformed report: ") + e.what());
    }
}

std::string report_to_csv(const ScenarioReport& r) {
    std::ostringstream os;
    os << "kind,ball_id,r,quotient,alpha,t,beta,direction_id,value\n";
    for (std::size_t b = 0; b < r.derivative.quotients.size(); ++b)
        for (std::size_t i = 0; i < r.derivative.radii.size(); ++i)
            os << "derivative," << b << ',' << fmt(r.derivative.radii[i]) << ','
               << fmt(r.derivative.quotients[b][i]) << ",,,,,\n";
    for (const auto& l : r.limits)
        for (const auto& s : l.samples)
            os << "limit,,,," << fmt(l.aperture) << ',' << fmt(s.t) << ',' << fmt(s.beta) << ','
               << s.direction_id << ',' << fmt(s.value) << '\n';
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "': " + std::strerror(errno));
    out << text;
    out.close();
    if (!out) throw std::runtime_error("error writing '" + path + "': " + std::strerror(errno));
}

std::vector<std::string> suite_names() {
    return {"euclidean-gehring", "heisenberg-core", "maximal-sandwich", "kernel-battery"};
}

std::vector<Scenario> preset_scenarios(const std::string& suite) {
    std::vector<Json> configs;
    auto add = [&](Json j) {
        j["schema"] = kScenarioSchema;
        configs.push_back(std::move(j));
    };
    // A vertex where the density has a nonzero gradient needs scales down to
    // about 5e-4 before first-order variation drops below the tolerance.
    const auto fine_t = default_t_schedule(1.0, 16);
    const auto fine_r = default_radii(16);
    if (suite == "euclidean-gehring") {
        add({{"name", "constant-density"},
             {"group", "euclidean:1"},
             {"measure", {{"type", "lebesgue"}, {"level", 2.0}}},
             {"vertex", {0.0}},
             {"expect", "equivalent"},
             {"expect_value", 2.0}});
        add({{"name", "continuous-density"},
             {"group", "euclidean:1"},
             {"measure", {{"type", "density"}, {"shape", "polynomial"}, {"coeffs", {1.0, 0.0, 1.0}}}},
             {"vertex", {0.0}},
             {"expect", "equivalent"},
             {"expect_value", 1.0}});
        add({{"name", "gehring-oscillatory"},
             {"group", "euclidean:1"},
             {"measure", {{"type", "density"}, {"shape", "log-oscillatory"}, {"coeffs", {1.0, 0.5}}}},
             {"vertex", {0.0}},
             {"expect", "both-diverge"}});
        add({{"name", "remote-atom"},
             {"group", "euclidean:1"},
             {"measure", {{"type", "atomic"}, {"points", {{5.0}}}, {"weights", {1.0}}}},
             {"vertex", {0.0}},
             {"expect", "equivalent"},
             {"expect_value", 0.0}});
        add({{"name", "off-center-vertex"},
             {"group", "euclidean:1"},
             {"measure", {{"type", "density"}, {"shape", "polynomial"}, {"coeffs", {1.0, 0.0, 1.0}}}},
             {"vertex", {0.5}},
             {"t_schedule", fine_t},
             {"radii", fine_r},
             {"expect", "equivalent"},
             {"expect_value", 1.25}});
        add({{"name", "mixture"},
             {"group", "euclidean:1"},
             {"measure",
              {{"type", "mixture"},
               {"components",
                {{{"type", "density"}, {"shape", "polynomial"}, {"coeffs", {1.0, 0.0, 1.0}}},
                 {{"type", "atomic"}, {"points", {{2.0}}}, {"weights", {1.0}}}}},
               {"coefficients", {1.0, 3.0}}}},
             {"vertex", {0.0}},
             {"expect", "equivalent"},
             {"expect_value", 1.0}});
        add({{"name", "planar-bump"},
             {"group", "euclidean:2"},
             {"measure", {{"type", "density"}, {"shape", "gaussian-bump"}, {"coeffs", {2.0, 1.0}}}},
             {"vertex", {0.3, -0.2}},
             {"t_schedule", fine_t},
             {"radii", fine_r},
             {"expect", "equivalent"},
             {"expect_value", 2.0 * std::exp(-0.13)}});
    } else if (suite == "heisenberg-core") {
        const double d4 = std::pow(0.3, 4) + 16.0 * 0.1 * 0.1; // Koranyi norm^4 of the off-center vertex
        add({{"name", "constant-density"},
             {"group", "heisenberg:1"},
             {"measure", {{"type", "lebesgue"}, {"level", 1.0}}},
             {"vertex", {0.0, 0.0, 0.0}},
             {"expect", "equivalent"},
             {"expect_value", 1.0}});
        add({{"name", "center-bump"},
             {"group", "heisenberg:1"},
             {"measure", {{"type", "density"}, {"shape", "gaussian-bump"}, {"coeffs", {2.0, 1.0}}}},
             {"vertex", {0.0, 0.0, 0.0}},
             {"expect", "equivalent"},
             {"expect_value", 2.0}});
        add({{"name", "remote-atom"},
             {"group", "heisenberg:1"},
             {"measure", {{"type", "atomic"}, {"points", {{1.0, 0.0, 0.0}}}, {"weights", {1.0}}}},
             {"vertex", {0.0, 0.0, 0.0}},
             {"expect", "equivalent"},
             {"expect_value", 0.0}});
        add({{"name", "log-oscillatory"},
             {"group", "heisenberg:1"},
             {"measure", {{"type", "density"}, {"shape", "log-oscillatory"}, {"coeffs", {1.0, 0.5}}}},
             {"vertex", {0.0, 0.0, 0.0}},
             {"expect", "both-diverge"}});
        add({{"name", "off-center-vertex"},
             {"group", "heisenberg:1"},
             {"measure", {{"type", "density"}, {"shape", "gaussian-bump"}, {"coeffs", {2.0, 1.0}}}},
             {"vertex", {0.3, 0.0, 0.1}},
             {"t_schedule", fine_t},
             {"radii", fine_r},
             {"expect", "equivalent"},
             {"expect_value", 2.0 * std::exp(-std::sqrt(d4))}});
        add({{"name", "mixture"},
             {"group", "heisenberg:1"},
             {"measure",
              {{"type", "mixture"},
               {"components",
                {{{"type", "density"}, {"shape", "gaussian-bump"}, {"coeffs", {1.0, 1.0}}},
                 {{"type", "atomic"}, {"points", {{1.0, 0.0, 0.0}}}, {"weights", {1.0}}}}},
               {"coefficients", {1.0, 1.0}}}},
             {"vertex", {0.0, 0.0, 0.0}},
             {"expect", "equivalent"},
             {"expect_value", 1.0}});
    } else {
        throw UsageError("unknown scenario suite '" + suite + "'");
    }
    std::vector<Scenario> out;
    for (const auto& c : configs) out.push_back(parse_scenario(c));
    return out;
}

std::vector<ScenarioReport> run_scenarios(const std::vector<Scenario>& list, const RunOptions& opt) {
    if (list.empty()) throw UsageError("suite has no scenarios");
    return parallel_map<ScenarioReport>(list.size(), [&](std::size_t i) { return run_scenario(list[i], opt); });
}

BoundaryMeasure random_atomic_measure(const GroupPtr& g, std::uint64_t seed, std::uint64_t index) {
    auto rng = path_stream(seed, 2 * index);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> count(2, 6);
    const int n = count(rng);
    std::vector<GroupPoint> pts;
    std::vector<double> w;
    for (int i = 0; i < n; ++i) {
        GroupPoint p = g->zero();
        for (std::size_t d = 0; d < g->total_dim(); ++d) p.coords[d] = u(rng);
        pts.push_back(p);
        w.push_back(1.0 + 0.5 * u(rng));
    }
    return BoundaryMeasure::atomic(g, pts, w);
}

GroupPoint random_point(const GroupPtr& g, std::uint64_t seed, std::uint64_t index) {
    auto rng = path_stream(seed, 2 * index + 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GroupPoint p = g->zero();
    for (std::size_t d = 0; d < g->total_dim(); ++d) p.coords[d] = u(rng);
    return p;
}

MaximalCheckReport maximal_check(const GroupPtr& g, const std::string& phi, const std::vector<double>& alphas,
                                 const std::vector<std::pair<std::string, BoundaryMeasure>>& measures,
                                 const std::vector<GroupPoint>& points, const ScaleGrid& grid) {
    if (measures.size() != points.size()) throw DomainError("maximal_check: one point per measure");
    if (alphas.empty()) throw UsageError("maximal_check: no apertures");
    MaximalCheckReport rep;
    rep.group = g->label();
    rep.phi = phi;
    KernelPtr k = KernelProfile::for_group(g);
    std::optional<RadialProfile> profile;
    if (phi != "heat") profile = named_profile(phi, *k);
    for (std::size_t i = 0; i < measures.size(); ++i)
        for (double a : alphas) {
            MaximalCheckRow row;
            row.measure = measures[i].first;
            row.chain = phi == "heat" ? heat_chain(measures[i].second, *k, a, points[i], grid)
                                      : lemma_chain(measures[i].second, *profile, a, points[i], grid);
            rep.pass = rep.pass && row.chain.chain_ok;
            rep.rows.push_back(std::move(row));
        }
    return rep;
}

Json maximal_report_to_json(const MaximalCheckReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json c = chain_json(row.chain);
        c["measure"] = row.measure;
        rows.push_back(c);
    }
    return {{"group", r.group}, {"phi", r.phi}, {"rows", rows}, {"pass", r.pass}};
}

std::vector<std::pair<std::string, BoundaryMeasure>> sandwich_densities(const GroupPtr& g) {
    auto expr = [](DensityShape shape, std::vector<double> c) {
        DensityExpr e;
        e.shape = shape;
        e.coeffs = std::move(c);
        return e;
    };
    Box unit_box(g->total_dim(), {-1.0, 1.0});
    DensityExpr shifted = expr(DensityShape::GaussianBump, {1.5, 0.5});
    shifted.center[0] = 0.7;
    return {
        {"constant-2", BoundaryMeasure::lebesgue(g, 2.0)},
        {"polynomial", BoundaryMeasure::density(g, expr(DensityShape::Polynomial, {1.0, 0.0, 1.0}))},
        {"bump", BoundaryMeasure::density(g, shifted)},
        {"log-oscillatory", BoundaryMeasure::density(g, expr(DensityShape::LogOscillatory, {1.0, 0.5}))},
        {"box-indicator", BoundaryMeasure::density(g, expr(DensityShape::Constant, {1.0}), unit_box)},
    };
}

Json battery_to_json(const std::string& group, const std::vector<PropertyCheck>& checks) {
    Json rows = Json::array();
    bool pass = true;
    for (const auto& c : checks) {
        rows.push_back({{"property", c.property},
                        {"grid", c.grid},
                        {"max_residual", c.max_residual},
                        {"tolerance", c.tolerance},
                        {"pass", c.pass}});
        pass = pass && c.pass;
    }
    return {{"group", group}, {"checks", rows}, {"pass", pass}};
}

SuiteOutcome run_suite(const std::string& name) {
    SuiteOutcome out;
    out.suite = name;
    if (name == "euclidean-gehring" || name == "heisenberg-core") {
        out.scenarios = run_scenarios(preset_scenarios(name));
        Json rows = Json::array();
        bool expectations = true;
        for (const auto& r : out.scenarios) {
            rows.push_back({{"name", r.name},
                            {"config_hash", r.config_hash},
                            {"verdict", verdict_name(r.verdict)},
                            {"derivative", r.derivative.estimate},
                            {"deltas", r.deltas},
                            {"tail_monotone", r.tail.monotone},
                            {"expect", r.expect ? Json(*r.expect) : Json(nullptr)},
                            {"expectation_met", r.expectation_met}});
            out.pass = out.pass && r.verdict != Verdict::Mismatch;
            expectations = expectations && r.expectation_met;
        }
        out.report = {{"suite", name},         {"version", kVersion},
                      {"scenarios", rows},     {"expectations_met", expectations},
                      {"pass", out.pass}};
        return out;
    }
    if (name == "maximal-sandwich") {
        const std::uint64_t seed = 2024;
        const std::vector<double> alphas{0.5, 1.0, 2.0};
        Json checks = Json::array();
        for (const char* label : {"euclidean:1", "euclidean:2", "heisenberg:1"}) {
            GroupPtr g = GroupDescriptor::from_label(label);
            std::vector<std::pair<std::string, BoundaryMeasure>> measures;
            std::vector<GroupPoint> points;
            for (std::uint64_t i = 0; i < 3; ++i) {
                measures.emplace_back("atomic-" + std::to_string(i), random_atomic_measure(g, seed, i));
                points.push_back(random_point(g, seed, i));
            }
            if (g->total_dim() == 1) {
                std::uint64_t i = 3;
                for (auto& d : sandwich_densities(g)) {
                    measures.push_back(d);
                    points.push_back(random_point(g, seed, i++));
                }
            }
            for (const char* phi : {"gaussian", "heat"}) {
                auto rep = maximal_check(g, phi, alphas, measures, points);
                out.pass = out.pass && rep.pass;
                checks.push_back(maximal_report_to_json(rep));
            }
        }
        out.report = {{"suite", name}, {"version", kVersion}, {"checks", checks}, {"pass", out.pass}};
        return out;
    }
    if (name == "kernel-battery") {
        Json groups = Json::array();
        for (const char* label : {"euclidean:1", "euclidean:2", "heisenberg:1"}) {
            GroupPtr g = GroupDescriptor::from_label(label);
            auto checks = run_kernel_battery(*KernelProfile::for_group(g));
            Json j = battery_to_json(label, checks);
            out.pass = out.pass && j["pass"].get<bool>();
            groups.push_back(j);
        }
        out.report = {{"suite", name}, {"version", kVersion}, {"groups", groups}, {"pass", out.pass}};
        return out;
    }
    throw UsageError("unknown suite '" + name + "' (allowed: euclidean-gehring, heisenberg-core, "
                     "maximal-sandwich, kernel-battery)");
}

} // namespace fatou
