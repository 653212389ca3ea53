#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fatou/errors.hpp"
#include "fatou/mc_oracle.hpp"
#include "fatou/scenario.hpp"

namespace {

using namespace fatou;

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kNumeric = 3 };

void emit(const Json& j, const std::string& path) {
    const std::string text = j.dump(2) + "\n";
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void write_scenario(const ScenarioReport& r, const std::string& dir, const std::string& format) {
    std::filesystem::create_directories(dir);
    if (format == "json" || format == "both") write_text_file(join(dir, r.name + ".json"), report_to_json(r).dump(2) + "\n");
    if (format == "csv" || format == "both") write_text_file(join(dir, r.name + ".csv"), report_to_csv(r));
}

void print_summary(const ScenarioReport& r) {
    std::printf("%-22s %-13s D=%.6g", r.name.c_str(), verdict_name(r.verdict).c_str(), r.derivative.estimate);
    for (const auto& l : r.limits) std::printf(" L(%.3g)=%.6g", l.aperture, l.estimate);
    std::printf("%s\n", r.expectation_met ? "" : "  [expectation not met]");
}

int cmd_run(const std::string& config, const std::string& out, const std::string& format, bool no_translate,
            bool no_restrict) {
    Scenario s = load_scenario(config);
    RunOptions opt;
    opt.translate = !no_translate;
    opt.restrict = !no_restrict;
    ScenarioReport r = run_scenario(s, opt);
    write_scenario(r, out, format);
    print_summary(r);
    return r.verdict == Verdict::Mismatch ? kFail : kPass;
}

int cmd_suite(const std::string& name, const std::string& out, const std::string& format) {
    SuiteOutcome o = run_suite(name);
    std::filesystem::create_directories(out);
    for (const auto& r : o.scenarios) {
        write_scenario(r, out, format);
        print_summary(r);
    }
    emit(o.report, join(out, name + ".json"));
    std::printf("suite %s: %s\n", name.c_str(), o.pass ? "pass" : "FAIL");
    return o.pass ? kPass : kFail;
}

int cmd_kernel_check(const std::string& group, const std::vector<double>& times, double tol, const std::string& out) {
    GroupPtr g = GroupDescriptor::from_label(group);
    BatteryOptions opt;
    for (double t : times)
        if (!(t > 0.0)) throw UsageError("--t values must be positive");
    if (!times.empty()) opt.times = times;
    if (!(tol > 0.0)) throw UsageError("--tol must be positive");
    opt.tol_normalization = tol;
    auto checks = run_kernel_battery(*KernelProfile::for_group(g), opt);
    Json j = battery_to_json(group, checks);
    for (const auto& c : checks)
        std::fprintf(stderr, "%-14s %-4s residual %.3g (tol %.3g)\n", c.property.c_str(), c.pass ? "ok" : "FAIL",
                     c.max_residual, c.tolerance);
    emit(j, out);
    return j["pass"].get<bool>() ? kPass : kFail;
}

int cmd_maximal_check(const std::string& group, const std::string& phi, const std::vector<double>& alphas,
                      int count, std::uint64_t seed, const std::string& out) {
    if (count < 1) throw UsageError("--measures must be positive");
    GroupPtr g = GroupDescriptor::from_label(group);
    std::vector<std::pair<std::string, BoundaryMeasure>> measures;
    std::vector<GroupPoint> points;
    for (int i = 0; i < count; ++i) {
        measures.emplace_back("atomic-" + std::to_string(i), random_atomic_measure(g, seed, i));
        points.push_back(random_point(g, seed, i));
    }
    auto rep = maximal_check(g, phi, alphas, measures, points);
    emit(maximal_report_to_json(rep), out);
    return rep.pass ? kPass : kFail;
}

int cmd_oracle_validate(const std::string& group, double paths, double t, double dt, std::uint64_t seed,
                        const std::string& out) {
    if (!(paths >= 1.0) || paths != std::floor(paths)) throw UsageError("--paths must be a positive integer");
    if (!(t > 0.0)) throw UsageError("--t must be positive");
    GroupPtr g = GroupDescriptor::from_label(group);
    const double step = dt > 0.0 ? dt : t / 256.0;
    auto e = simulate_horizontal_bm(g, static_cast<std::size_t>(paths), t, step, seed);
    std::vector<double> span(g->total_dim(), std::sqrt(2.0 * t));
    if (!g->is_euclidean()) span = {0.8 * std::sqrt(t), 0.8 * std::sqrt(t), 1.5 * t};
    auto grid = kde_grid_comparison(*KernelProfile::for_group(g), e, span);
    Json points = Json::array();
    std::size_t within = 0;
    for (const auto& p : grid) {
        std::vector<double> x(p.x.coords.begin(), p.x.coords.begin() + static_cast<std::ptrdiff_t>(p.x.dim()));
        points.push_back({{"x", x},
                          {"kde", p.kde},
                          {"stderr", p.std_error},
                          {"reference", p.reference},
                          {"gamma_value", p.gamma_value},
                          {"z_score", p.z_score},
                          {"sparse", p.sparse}});
        if (std::abs(p.z_score) <= 3.0) ++within;
    }
    const auto needed = static_cast<std::size_t>(std::ceil(25.0 / 27.0 * static_cast<double>(grid.size())));
    const bool pass = within >= needed;
    emit({{"group", group},
          {"paths", e.n_paths},
          {"t", t},
          {"dt", e.dt},
          {"seed", seed},
          {"generator", e.generator_tag},
          {"bandwidth", scott_bandwidth(e)},
          {"points", points},
          {"within_3_sigma", within},
          {"required", needed},
          {"pass", pass}},
         out);
    return pass ? kPass : kFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary limits of caloric functions on stratified groups: scenario runner and checks"};
    app.require_subcommand(1);

    std::string config, out = ".", format = "both";
    bool no_translate = false, no_restrict = false;
    auto* run = app.add_subcommand("run", "Run one scenario config (JSON)");
    run->add_option("config", config, "Scenario file")->required();
    run->add_option("--out", out, "Output directory");
    run->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
    run->add_flag("--no-translate", no_translate, "Evaluate at the vertex instead of translating it to 0");
    run->add_flag("--no-restrict", no_restrict, "Skip the restriction to B(0, 1/C_L)");

    std::string suite;
    auto* suite_cmd = app.add_subcommand("suite", "Run a preset suite");
    suite_cmd->add_option("name", suite, "euclidean-gehring, heisenberg-core, maximal-sandwich, kernel-battery")
        ->required();
    suite_cmd->add_option("--out", out, "Output directory");
    suite_cmd->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));

    std::string group = "heisenberg:1", report;
    auto* kc = app.add_subcommand("kernel-check", "Run the kernel property battery");
    kc->add_option("--group", group, "Group label")->required();
    std::vector<double> kc_times{0.25, 1.0, 4.0};
    double kc_tol = 1e-3;
    kc->add_option("--t", kc_times, "Times for normalization and symmetry")->delimiter(',');
    kc->add_option("--tol", kc_tol, "Normalization tolerance");
    kc->add_option("--out", report, "Report file (default stdout)");

    std::string phi = "gaussian";
    std::vector<double> alphas{0.5, 1.0, 2.0};
    int count = 5;
    std::uint64_t seed = 1;
    auto* mc = app.add_subcommand("maximal-check", "Check the maximal-function sandwich on random atomic measures");
    mc->add_option("--group", group, "Group label")->required();
    mc->add_option("--phi", phi, "gaussian, minorant, majorant or heat");
    mc->add_option("--alpha", alphas, "Apertures")->delimiter(',');
    mc->add_option("--measures", count, "Number of random measures");
    mc->add_option("--seed", seed, "Seed");
    mc->add_option("--out", report, "Report file (default stdout)");

    double paths = 5e5, t = 1.0, dt = 0.0;
    std::uint64_t oseed = 42;
    auto* ov = app.add_subcommand("oracle-validate", "Compare a Monte Carlo kernel density estimate with the kernel");
    ov->add_option("--group", group, "Group label");
    ov->add_option("--paths", paths, "Number of paths (accepts 5e5)");
    ov->add_option("--t", t, "Time");
    ov->add_option("--dt", dt, "Euler-Maruyama step (default t/256)");
    ov->add_option("--seed", oseed, "Seed");
    ov->add_option("--out", report, "Report file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        if (*run) return cmd_run(config, out, format, no_translate, no_restrict);
        if (*suite_cmd) return cmd_suite(suite, out, format);
        if (*kc) return cmd_kernel_check(group, kc_times, kc_tol, report);
        if (*mc) return cmd_maximal_check(group, phi, alphas, count, seed, report);
        if (*ov) return cmd_oracle_validate(group, paths, t, dt, oseed, report);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}
