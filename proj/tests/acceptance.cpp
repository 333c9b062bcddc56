// Acceptance suite: one PASS/FAIL line per criterion.
//
//   cavlab_acceptance [--out DIR] [--known-fail N]...
//
// Exit status counts criteria whose outcome differs from the expectation: every
// criterion is expected to pass unless listed with --known-fail, in which case
// it is expected to fail (a known failure that starts passing is reported too).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cavlab/forward.hpp"
#include "cavlab/runner.hpp"
#include "cavlab/scenario.hpp"

using namespace cavlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    std::vector<std::string> notes;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path g_out = "acceptance-out";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double number(const Summary& s, const std::string& key) {
    const auto v = s.get(key);
    return v.empty() ? std::nan("") : std::stod(v);
}

RunResult run_case(const std::string& command, const std::string& name, const std::string& tag,
                   std::optional<nlohmann::json> config = std::nullopt) {
    RunOptions o;
    o.command = command;
    if (config)
        o.config = std::move(config);
    else
        o.case_name = name;
    o.out = g_out / tag;
    fs::remove_all(o.out);
    std::ostringstream log;
    return run(o, log);
}

// Max-norm error of Crank-Nicolson against u = exp(-8 pi^2 t) sin 2 pi x sin 2 pi y
// at t = 0.1 on the nested-squares domain, nt steps.
double eigenmode_error(double h, int nt) {
    const double pi = std::numbers::pi, T = 0.1;
    const Grid g = Grid::make(0.25, 2.0, 0.25, 2.0, h);
    const auto cls = rasterize(AxisRectangle{0.5, 0.5, 1.0, 1.0}, g);
    BoundaryInput b{preset_profile("sinsin", {}), TimeProfile(TimeProfile::Exponential{1.0, -8 * pi * pi}), 0.0};
    ForwardInputs in;
    in.dirichlet = &b;
    in.u0 = initial_field(b.g0, cls);
    const auto f = solve(cls, EllipticOperator::laplacian(), in, {T, nt, Scheme::CrankNicolson, nt, 0});
    const double amp = std::exp(-8 * pi * pi * T);
    double e = 0.0;
    for (int n = 0; n < g.size(); ++n) {
        if (cls.is_cavity(n)) continue;
        const double exact = amp * b.g0(g.x(g.i_of(n)), g.y(g.j_of(n)));
        e = std::max(e, std::abs(f.snapshots.back()[static_cast<std::size_t>(n)] - exact));
    }
    return e;
}

Outcome criterion1() {
    Outcome o;
    Stopwatch sw;
    std::vector<double> err;
    std::vector<int> steps;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        // dt = h^2, rounded to the nearest step count that lands on t = 0.1
        const int nt = static_cast<int>(std::lround(0.1 / (h * h)));
        steps.push_back(nt);
        err.push_back(eigenmode_error(h, nt));
    }
    const double secs = sw.seconds();
    const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
    const bool decreasing = err[1] < err[0] && err[2] < err[1];
    o.pass = decreasing && p1 >= 1.8 && p2 >= 1.8 && secs < 60.0;
    o.detail = fmt::format("errors {:.4e} {:.4e} {:.4e} (nt {} {} {}), orders {:.3f} {:.3f}, {:.1f} s", err[0], err[1],
                           err[2], steps[0], steps[1], steps[2], p1, p2, secs);

    // control with dt = h^2 / 16: the same meshes with the time error pushed below the space error
    std::vector<double> fine;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64})
        fine.push_back(eigenmode_error(h, static_cast<int>(std::ceil(1.6 / (h * h)))));
    o.notes.push_back(fmt::format("control dt = h^2/16: errors {:.4e} {:.4e} {:.4e}, orders {:.3f} {:.3f}", fine[0],
                                  fine[1], fine[2], std::log2(fine[0] / fine[1]), std::log2(fine[1] / fine[2])));
    return o;
}

Outcome criterion2() {
    Stopwatch sw;
    const auto r = run_case("counterexample", "nested-squares", "c2");
    const double secs = sw.seconds();
    const double ratio = number(r.summary, "ratio");
    Outcome o;
    o.pass = r.exit_code == kExitOk && r.summary.get("h") == "0.015625" && ratio <= 3.0 && secs < 120.0;
    o.detail = fmt::format("h {}, gap/floor {:.3e}, exit {}, {:.1f} s", r.summary.get("h"), ratio, r.exit_code, secs);
    return o;
}

Outcome criterion3() {
    const auto r = run_case("counterexample", "t-affine-source", "c3");
    const double rel = number(r.summary, "affine_rel_error");
    const double ratio = number(r.summary, "ratio");
    Outcome o;
    o.pass = r.exit_code == kExitOk && r.summary.get("h") == "0.03125" && rel <= 5e-3 && ratio <= 3.0;
    o.detail = fmt::format("|u - t f0| / |t f0| {:.3e}, gap/floor {:.3e}, exit {}", rel, ratio, r.exit_code);
    return o;
}

Outcome criterion4() {
    Stopwatch sw;
    const auto r = run_case("distinguish", "bang-bang-Q1", "c4");
    const double secs = sw.seconds();
    const double ratio = number(r.summary, "ratio");
    const double shape_only = number(r.summary, "shape_only_ratio");
    const bool hyp = r.summary.get("hypothesis_7a") == "pass" && r.summary.get("hypothesis_7b") == "pass" &&
                     r.summary.get("hypothesis_7c") == "pass";
    Outcome o;
    o.pass = r.exit_code == kExitOk && hyp && r.summary.get("h") == "0.03125" && ratio > 10.0 && shape_only > 10.0 &&
             secs < 120.0;
    o.detail = fmt::format("(7a)-(7c) {}, gap/floor {:.3e}, same-u0 control {:.3e}, exit {}, {:.1f} s",
                           hyp ? "pass" : "not all pass", ratio, shape_only, r.exit_code, secs);
    return o;
}

Outcome criterion5() {
    const auto r = run_case("q2", "constant-coeff-Q2", "c5");
    const double ratio = number(r.summary, "ratio");
    const double comm = number(r.summary, "commutator_norm");
    auto same = read_json(preset_case_text("constant-coeff-Q2"), "constant-coeff-Q2");
    same["experiment"]["second"] = "D1";
    same["experiment"]["second_operator"] = same["experiment"]["operator"];
    const auto z = run_case("q2", "", "c5-same", same);
    const double gap0 = number(z.summary, "gap");
    Outcome o;
    o.pass = r.exit_code == kExitOk && comm < 1e-10 && r.summary.get("hypothesis_7d") == "pass" && ratio > 10.0 &&
             z.exit_code == kExitOk && gap0 == 0.0;
    o.detail = fmt::format("commutator {:.3e}, (7d) {}, gap/floor {:.3e}; D1 = D2 gap {:.3e}, exits {} {}", comm,
                           r.summary.get("hypothesis_7d"), ratio, gap0, r.exit_code, z.exit_code);
    return o;
}

Outcome criterion6() {
    const auto r = run_case("distinguish", "zero-u0-smooth-mu", "c6");
    const double ratio = number(r.summary, "ratio");
    // contrast: the t-affine source has u0 = 0 too, but no jump for (7b) to see; distinguish
    // refuses it and the counterexample run reports it indistinguishable
    const auto refused = run_case("distinguish", "t-affine-source", "c6-refused");
    const auto c = run_case("counterexample", "t-affine-source", "c6-contrast");
    const double cratio = number(c.summary, "ratio");
    Outcome o;
    o.pass = r.exit_code == kExitOk && r.summary.get("hypothesis_route") == "known zero initial data" &&
             ratio > 10.0 && refused.exit_code == kExitHypothesis && c.exit_code == kExitOk &&
             c.summary.get("hypothesis_7b") == "fail" && cratio <= 3.0;
    o.detail = fmt::format("smooth mu gap/floor {:.3e} via '{}'; t-affine (7b) {}, gap/floor {:.3e}, "
                           "distinguish exit {}",
                           ratio, r.summary.get("hypothesis_route"), c.summary.get("hypothesis_7b"), cratio,
                           refused.exit_code);
    return o;
}

Outcome criterion7() {
    Stopwatch sw;
    const auto r = run_case("reconstruct", "circle-reconstruct", "c7");
    const double secs = sw.seconds();
    const double hd = number(r.summary, "hausdorff");
    const double h = number(r.summary, "h");
    const double evals = number(r.summary, "evaluations");
    Outcome o;
    o.pass = r.exit_code == kExitOk && r.summary.get("policy") == "WINDOWED" && h == 1.0 / 32 && hd < 2 * h &&
             evals <= 2000 && secs < 600.0;
    o.detail = fmt::format("{}, Hausdorff {:.4e} vs 2h = {:.4e}, {} evaluations, {:.1f} s", r.summary.get("best_shape"),
                           hd, 2 * h, evals, secs);
    return o;
}

Outcome criterion8() {
    struct Rerun {
        std::string command, name, tag;
    };
    const std::vector<Rerun> runs{{"counterexample", "nested-squares", "c2"},
                                  {"distinguish", "bang-bang-Q1", "c4"},
                                  {"reconstruct", "circle-reconstruct", "c7"}};
    Outcome o;
    o.pass = true;
    std::vector<std::string> parts;
    for (const auto& r : runs) {
        const auto first = g_out / r.tag / "summary.txt";
        if (!fs::exists(first)) run_case(r.command, r.name, r.tag);
        run_case(r.command, r.name, r.tag + "-rerun");
        const bool same = slurp(first) == slurp(g_out / (r.tag + "-rerun") / "summary.txt") && !slurp(first).empty();
        o.pass = o.pass && same;
        parts.push_back(fmt::format("{} {}", r.name, same ? "identical" : "DIFFERS"));
    }
    o.detail = fmt::format("{}, {}, {}", parts[0], parts[1], parts[2]);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> known_fail;
    for (int k = 1; k < argc; ++k) {
        const std::string a = argv[k];
        if (a == "--out" && k + 1 < argc) {
            g_out = argv[++k];
        } else if (a == "--known-fail" && k + 1 < argc) {
            known_fail.insert(std::stoi(argv[++k]));
        } else {
            std::fprintf(stderr, "usage: %s [--out DIR] [--known-fail N]...\n", argv[0]);
            return 2;
        }
    }
    fs::create_directories(g_out);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"forward solver second order in space", criterion1},
        {"nested squares with compatible data are indistinguishable", criterion2},
        {"t-affine source: u = t f0 and indistinguishable", criterion3},
        {"bang-bang source distinguishes nested squares", criterion4},
        {"two commuting operators distinguish D1 from D2", criterion5},
        {"zero initial data with smooth mu distinguishes", criterion6},
        {"circle reconstruction within 2h", criterion7},
        {"summaries are byte-identical on rerun", criterion8},
    };

    int unexpected = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = fmt::format("threw: {}", e.what());
        }
        const bool expected_pass = !known_fail.contains(id);
        std::printf("%s criterion %d: %s: %s%s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                    o.detail.c_str(), expected_pass ? "" : o.pass ? " (known failure now passes)" : " (known failure)");
        for (const auto& n : o.notes) std::printf("     criterion %d note: %s\n", id, n.c_str());
        std::fflush(stdout);
        if (o.pass != expected_pass) ++unexpected;
    }
    if (!known_fail.empty()) {
        std::string list;
        for (int id : known_fail) list += fmt::format(" {}", id);
        std::printf("known failures declared:%s\n", list.c_str());
    }
    return unexpected;
}
