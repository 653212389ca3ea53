// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "fatou/mc_oracle.hpp"
#include "fatou/scenario.hpp"

using namespace fatou;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > budget_s) {
        o.pass = false;
        o.detail += "; over the time budget";
    }
    if (!o.pass) ++failures;
    std::printf("ACCEPTANCE %d %s %s: %s [%.1f s, budget %.0f s]\n", id, o.pass ? "PASS" : "FAIL", title.c_str(),
                o.detail.c_str(), secs, budget_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

GroupPoint unit_point(const GroupDescriptor& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> c(g.total_dim());
    for (auto& v : c) v = u(rng);
    return g.point(c);
}

// |a - b| / max(1, |b|).
double err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
double err(const GroupPoint& a, const GroupPoint& b) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.dim(); ++k) e = std::max(e, err(a[k], b[k]));
    return e;
}

Outcome group_axioms() {
    constexpr int kCases = 10000;
    constexpr double kTol = 1e-12;
    std::map<std::string, double> worst;
    for (const char* label : {"euclidean:1", "euclidean:2", "euclidean:3", "heisenberg:1"}) {
        auto g = GroupDescriptor::from_label(label);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> logr(-1, 1);
        for (int i = 0; i < kCases; ++i) {
            auto x = unit_point(*g, rng), y = unit_point(*g, rng), z = unit_point(*g, rng);
            double r = std::pow(10.0, logr(rng));
            auto upd = [&](const char* k, double e) { worst[k] = std::max(worst[k], e); };
            upd("associativity", err(mul(mul(x, y), z), mul(x, mul(y, z))));
            upd("identity", std::max(err(mul(x, g->zero()), x), err(mul(g->zero(), x), x)));
            upd("inverse", std::max(err(mul(x, inverse(x)), g->zero()), err(mul(inverse(x), x), g->zero())));
            upd("dilation", err(dilate(r, mul(x, y)), mul(dilate(r, x), dilate(r, y))));
            upd("homogeneity", std::abs(norm(dilate(r, x)) - r * norm(x)) / std::max(1.0, r * norm(x)));
            upd("symmetry", std::abs(norm(inverse(x)) - norm(x)));
        }
    }
    Outcome o;
    for (const auto& [k, v] : worst) {
        o.pass = o.pass && v <= kTol;
        o.detail += (o.detail.empty() ? "" : ", ") + k + " " + fmt("%.2g", v);
    }
    o.detail += " (tol 1e-12, 10^4 cases per group on R^1, R^2, R^3, H^1)";
    return o;
}

Outcome kernel_battery() {
    Outcome o;
    for (const char* label : {"euclidean:1", "euclidean:2", "heisenberg:1"}) {
        auto g = GroupDescriptor::from_label(label);
        auto checks = run_kernel_battery(*KernelProfile::for_group(g));
        std::string failed;
        for (const auto& c : checks)
            if (!c.pass) failed += " " + c.property + "=" + fmt("%.3g", c.max_residual);
        o.pass = o.pass && failed.empty() && checks.size() == 6;
        o.detail += std::string(o.detail.empty() ? "" : "; ") + label + (failed.empty() ? " all 6 ok" : failed);
    }
    return o;
}

int run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + "\"" FATOU_CLI_PATH "\" " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / ("fatou-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

Outcome oracle_agreement(const fs::path& dir) {
    auto out = dir / "oracle.json";
    int rc = run_cli("oracle-validate --group heisenberg:1 --paths 5e5 --t 1 --seed 42 --out \"" + out.string() + "\"");
    std::ifstream in(out);
    auto j = Json::parse(in);
    double worst = 0.0;
    for (const auto& p : j["points"]) worst = std::max(worst, std::abs(p["z_score"].get<double>()));
    Outcome o;
    o.pass = rc == 0 && j["pass"].get<bool>() && j["points"].size() == 27;
    o.detail = std::to_string(j["within_3_sigma"].get<int>()) + "/27 points with |z| <= 3 (need " +
               std::to_string(j["required"].get<int>()) + "), max |z| " + fmt("%.2f", worst) +
               ", 5e5 paths, t = 1, dt = 1/256";
    return o;
}

Outcome maximal_sandwich() {
    const std::vector<double> alphas{0.5, 1.0, 2.0};
    const std::uint64_t seed = 4242;
    std::size_t rows = 0, bad = 0;
    double worst_upper = 0.0;
    for (const char* label : {"euclidean:1", "euclidean:2", "heisenberg:1"}) {
        auto g = GroupDescriptor::from_label(label);
        std::vector<std::pair<std::string, BoundaryMeasure>> measures;
        std::vector<GroupPoint> points;
        // Three evaluation points for each of 20 atomic measures.
        for (std::uint64_t i = 0; i < 20; ++i)
            for (std::uint64_t p = 0; p < 3; ++p) {
                measures.emplace_back("atomic-" + std::to_string(i), random_atomic_measure(g, seed, i));
                points.push_back(random_point(g, seed, 100 * (p + 1) + i));
            }
        if (g->total_dim() == 1)
            for (auto& d : sandwich_densities(g))
                for (std::uint64_t p = 0; p < 3; ++p) {
                    measures.push_back(d);
                    points.push_back(random_point(g, seed, 1000 + 10 * p + measures.size()));
                }
        for (const char* phi : {"gaussian", "heat"}) {
            auto rep = maximal_check(g, phi, alphas, measures, points);
            for (const auto& r : rep.rows) {
                ++rows;
                if (!r.chain.chain_ok) ++bad;
                if (!r.chain.hl_divergent && r.chain.m_hl_upper > 0.0)
                    worst_upper = std::max(worst_upper, r.chain.m_nt / (r.chain.c_upper * r.chain.m_hl_upper));
            }
        }
    }
    Outcome o;
    o.pass = bad == 0;
    o.detail = std::to_string(rows - bad) + "/" + std::to_string(rows) +
               " chains hold (20 atomic measures on R^1, R^2, H^1 and 5 densities on R^1, 3 points each, "
               "alpha in {0.5, 1, 2}, gaussian and heat profiles, slack 2%); max M_nt / (c_alpha M_HL_upper) " +
               fmt("%.3g", worst_upper);
    return o;
}

Outcome commutation() {
    constexpr double kAtomTol = 1e-10, kDensityTol = 1e-4;
    double worst_atom = 0.0, worst_density = 0.0;
    for (const char* label : {"euclidean:1", "euclidean:2", "heisenberg:1"}) {
        auto g = GroupDescriptor::from_label(label);
        auto k = KernelProfile::for_group(g);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<CommutationSample> samples;
        for (int i = 0; i < 100; ++i) samples.push_back({unit_point(*g, rng), 0.05 + 2 * u(rng)});
        const double r = 0.3 + 3 * u(rng);
        const GroupPoint x0 = unit_point(*g, rng);
        auto atoms = random_atomic_measure(g, 5, 0);
        worst_atom = std::max({worst_atom, dilation_commutation_check(atoms, *k, r, samples),
                               translation_commutation_check(atoms, *k, x0, samples)});
        DensityExpr bump;
        bump.shape = DensityShape::GaussianBump;
        bump.coeffs = {1.5, 0.8};
        DensityExpr poly;
        poly.shape = DensityShape::Polynomial;
        poly.coeffs = {1.0, 0.0, 1.0};
        for (const auto& e : {bump, poly}) {
            auto mu = BoundaryMeasure::density(g, e);
            worst_density = std::max({worst_density, dilation_commutation_check(mu, *k, r, samples),
                                      translation_commutation_check(mu, *k, x0, samples)});
        }
    }
    Outcome o;
    o.pass = worst_atom <= kAtomTol && worst_density <= kDensityTol;
    o.detail = "atomic " + fmt("%.2g", worst_atom) + " (tol 1e-10), densities " + fmt("%.2g", worst_density) +
               " (tol 1e-4); 100 samples per group on R^1, R^2, H^1";
    return o;
}

std::vector<ScenarioReport> g_reports; // default runs, reused by criterion 7

Outcome fatou_equivalence() {
    Outcome o;
    for (const char* suite : {"euclidean-gehring", "heisenberg-core"}) {
        auto list = preset_scenarios(suite);
        auto reps = run_scenarios(list);
        std::size_t mismatch = 0, missed = 0, diverge = 0;
        for (const auto& r : reps) {
            mismatch += r.verdict == Verdict::Mismatch;
            missed += !r.expectation_met;
            diverge += r.verdict == Verdict::BothDiverge;
        }
        const std::size_t minimum = std::string(suite) == "euclidean-gehring" ? 6 : 5;
        o.pass = o.pass && mismatch == 0 && missed == 0 && diverge >= 1 && reps.size() >= minimum;
        o.detail += std::string(o.detail.empty() ? "" : "; ") + suite + ": " + std::to_string(reps.size()) +
                    " scenarios, " + std::to_string(mismatch) + " MISMATCH, " + std::to_string(diverge) +
                    " both-diverge, " + std::to_string(missed) + " off expectation";
        g_reports.insert(g_reports.end(), reps.begin(), reps.end());
    }
    return o;
}

Outcome reduction_invariance() {
    std::vector<Scenario> all = preset_scenarios("euclidean-gehring");
    auto h = preset_scenarios("heisenberg-core");
    all.insert(all.end(), h.begin(), h.end());
    if (g_reports.size() != all.size()) g_reports = run_scenarios(all);
    std::size_t changed = 0, nonmonotone = 0;
    for (RunOptions opt : {RunOptions{false, true, 20000}, RunOptions{true, false, 20000}}) {
        auto reps = run_scenarios(all, opt);
        for (std::size_t i = 0; i < reps.size(); ++i) changed += reps[i].verdict != g_reports[i].verdict;
    }
    for (const auto& r : g_reports) nonmonotone += !r.tail.monotone;
    Outcome o;
    o.pass = changed == 0 && nonmonotone == 0;
    o.detail = std::to_string(changed) + " verdict changes without translation or restriction, " +
               std::to_string(nonmonotone) + "/" + std::to_string(g_reports.size()) + " tails non-monotone";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Files of two output directories compared byte by byte; empty string when identical.
std::string compare_dirs(const fs::path& a, const fs::path& b) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
    std::size_t nb = std::distance(fs::directory_iterator(b), fs::directory_iterator{});
    if (names.empty() || names.size() != nb) return "file sets differ";
    for (const auto& n : names)
        if (slurp(a / n) != slurp(b / n)) return n + " differs";
    return {};
}

Outcome determinism(const fs::path& dir) {
    const std::string configs = FATOU_CONFIG_DIR;
    const std::vector<std::string> commands{
        "run \"" + configs + "/continuous-density.json\" --format both --out {}",
        "run \"" + configs + "/heisenberg-bump.json\" --format both --out {}",
        "suite euclidean-gehring --format both --out {}",
        "kernel-check --group euclidean:2 --out {}/kernel.json",
        "maximal-check --group heisenberg:1 --phi heat --measures 3 --seed 11 --out {}/maximal.json",
        "oracle-validate --group heisenberg:1 --paths 20000 --seed 5 --out {}/oracle.json",
    };
    // Each command runs three times: twice with the default worker count and once with FATOU_THREADS=3.
    const std::vector<std::string> envs{"", "", "FATOU_THREADS=3"};
    std::size_t identical = 0;
    std::string problems;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::vector<fs::path> outs;
        for (std::size_t k = 0; k < envs.size(); ++k) {
            auto out = dir / ("det-" + std::to_string(c) + "-" + std::to_string(k));
            fs::create_directories(out);
            std::string cmd = commands[c];
            for (auto pos = cmd.find("{}"); pos != std::string::npos; pos = cmd.find("{}"))
                cmd.replace(pos, 2, "\"" + out.string() + "\"");
            int rc = run_cli(cmd, envs[k]);
            if (rc != 0 && rc != 1) problems += " [" + commands[c] + ": exit " + std::to_string(rc) + "]";
            outs.push_back(out);
        }
        std::string d1 = compare_dirs(outs[0], outs[1]), d2 = compare_dirs(outs[0], outs[2]);
        if (d1.empty() && d2.empty())
            ++identical;
        else
            problems += " [" + commands[c] + ": " + (d1.empty() ? d2 : d1) + "]";
    }
    Outcome o;
    o.pass = problems.empty();
    o.detail = std::to_string(identical) + "/" + std::to_string(commands.size()) +
               " commands byte-identical across reruns and FATOU_THREADS" + problems;
    return o;
}

} // namespace

int main() {
    const fs::path dir = scratch_dir();
    report(1, "group axioms", 5, group_axioms);
    report(2, "kernel battery", 600, kernel_battery);
    report(3, "oracle agreement", 600, [&] { return oracle_agreement(dir); });
    report(4, "maximal sandwich", 300, maximal_sandwich);
    report(5, "dilation/translation commutation", 120, commutation);
    report(6, "Fatou equivalence suites", 900, fatou_equivalence);
    report(7, "reduction invariance", 1800, reduction_invariance);
    report(8, "determinism", 1800, [&] { return determinism(dir); });
    std::error_code ec;
    fs::remove_all(dir, ec);
    std::printf("ACCEPTANCE SUMMARY %d/8 passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
