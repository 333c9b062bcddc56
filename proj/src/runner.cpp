#include "cavlab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "cavlab/error.hpp"
#include "cavlab/scenario.hpp"

namespace cavlab {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> commands() {
    return {"forward", "observe", "counterexample", "distinguish", "q2", "reconstruct", "sweep"};
}

std::vector<double> parse_range(const std::string& text) {
    if (text.empty()) return {};
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw Error(ErrorCode::BadAxis, fmt::format("malformed range '{}'", text));
        }
    };
    std::vector<std::string> parts;
    const char sep = text.find(':') != std::string::npos ? ':' : ',';
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    std::vector<double> out;
    if (sep == ',') {
        for (const auto& p : parts) out.push_back(number(p));
        return out;
    }
    if (parts.size() != 3) throw Error(ErrorCode::BadAxis, fmt::format("range '{}' is not from:to:count", text));
    const double from = number(parts[0]), to = number(parts[1]);
    const double count = number(parts[2]);
    if (count < 0 || count != std::floor(count))
        throw Error(ErrorCode::BadAxis, fmt::format("range count in '{}' must be a non-negative integer", text));
    const int n = static_cast<int>(count);
    for (int k = 0; k < n; ++k) out.push_back(n == 1 ? from : from + (to - from) * k / (n - 1));
    return out;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size();) {
        std::size_t e = k;
        while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[k]]) ++e;
        const double avg = 0.5 * static_cast<double>(k + e) + 1.0;
        for (std::size_t q = k; q <= e; ++q) r[idx[q]] = avg;
        k = e + 1;
    }
    return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const auto rx = ranks({x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)});
    const auto ry = ranks({y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)});
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sxy += (rx[k] - mx) * (ry[k] - my);
        sxx += (rx[k] - mx) * (rx[k] - mx);
        syy += (ry[k] - my) * (ry[k] - my);
    }
    if (sxx == 0 || syy == 0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

namespace {

json load_config(const RunOptions& o) {
    const int given = int(o.scenario.has_value()) + int(o.case_name.has_value()) + int(o.config.has_value());
    if (given != 1) throw Error(ErrorCode::ConfigParse, "give exactly one of --scenario and --case");
    json j;
    if (o.config) {
        j = *o.config;
    } else if (o.case_name) {
        j = read_json(preset_case_text(*o.case_name), "case " + canonical_case_name(*o.case_name));
    } else {
        std::ifstream f(*o.scenario);
        if (!f) throw Error(ErrorCode::ConfigParse, fmt::format("cannot read {}", o.scenario->string()));
        std::stringstream buf;
        buf << f.rdbuf();
        j = read_json(buf.str(), o.scenario->string());
    }
    if (o.h) {
        if (!j.is_object() || !j.contains("grid") || !j["grid"].is_object())
            throw Error(ErrorCode::ConfigParse, "grid: missing table");
        j["grid"]["h"] = *o.h;
    }
    if (o.seed) j["seed"] = *o.seed;
    return j;
}

Design make_design(const Scenario& sc) {
    if (sc.modes.outer == OuterBc::Neumann)
        throw Error(ErrorCode::Unsupported, "distinguishability runs use a Dirichlet outer boundary");
    Design d;
    const Scenario* p = &sc;
    d.source = [p](const Grid& g) { return p->build_source(g); };
    d.boundary = sc.boundary;
    d.u0_first = sc.u0_first;
    d.u0_second = sc.u0_second;
    d.time = sc.time;
    d.modes = sc.modes;
    d.region = sc.region(sc.experiment.region);
    d.kind = sc.experiment.kind;
    d.window = sc.experiment.window;
    d.quadrature = sc.experiment.quadrature;
    d.exclusion_zones = sc.exclusion_zones();
    return d;
}

enum class Compliance { None, Q1, Q2, Inverse };

Compliance compliance_for(const std::string& cmd) {
    if (cmd == "distinguish") return Compliance::Q1;
    if (cmd == "q2") return Compliance::Q2;
    if (cmd == "reconstruct") return Compliance::Inverse;
    return Compliance::None;
}

struct Validation {
    std::string text;
    HypothesisReport hypotheses;
    bool operators_ok = true;
    bool compliant = true;
    std::string route;
    std::optional<double> commutator;
};

bool pass(const HypothesisReport& r, const char* clause) { return r.passed(clause).value_or(false); }

/// Every check that does not need a time-dependent solve.
Validation validate(const Scenario& sc, const std::string& cmd) {
    Validation v;
    std::string& t = v.text;
    const auto& x = sc.experiment;

    std::vector<std::string> ops{x.op};
    if (cmd == "q2" && x.second_op != x.op) ops.push_back(x.second_op);
    for (const auto& name : ops) {
        const auto rep = check_operator(sc.op(name), sc.grid);
        t += rep.text(name);
        if (!t.empty() && t.back() != '\n') t += '\n';
        v.operators_ok = v.operators_ok && rep.ok();
    }

    const auto cavities = sc.candidates();
    for (const auto& c : cavities) {
        const auto cls = rasterize(c, sc.grid);
        t += fmt::format("cavity {}: {} fluid, {} cavity-boundary, {} cavity-interior nodes\n", describe(c),
                         cls.count(NodeLabel::Fluid), cls.count(NodeLabel::CavityBoundary),
                         cls.count(NodeLabel::CavityInterior));
        for (const auto& name : ops) {
            if (!check_operator(sc.op(name), sc.grid).ok()) continue;
            const auto inv = check_invertibility(assemble(sc.op(name), cls, sc.modes));
            if (inv.invertible)
                t += fmt::format("operator {} on {}: invertible, smallest |eigenvalue| {:.6g}\n", name, describe(c),
                                 inv.min_abs_eigenvalue);
            else
                t += fmt::format("operator {} on {}: singular\n", name, describe(c));
            v.operators_ok = v.operators_ok && inv.invertible;
        }
    }
    if (sc.boundary && sc.boundary->collar_width > 0.0) {
        build_lift(*sc.boundary, sc.grid, cavities);
        t += fmt::format("lift: collar of width {} clears every candidate cavity\n", sc.boundary->collar_width);
    }

    const Region& obs = sc.region(x.region);
    const Region* omega = x.kind == ObservationKind::InteriorOnOmega ? &obs : nullptr;
    if (const auto src = sc.build_source(sc.grid)) {
        const auto zones = sc.exclusion_zones();
        v.hypotheses = validate_hypotheses(*src, sc.grid, cavities, zones, omega, sc.time.T);
        if (!src->tag.empty()) t += fmt::format("source tag: {}\n", src->tag);
    } else {
        v.hypotheses.items.push_back({"7b", false, "no source: f = 0"});
    }
    t += v.hypotheses.text();

    if (cmd == "q2") {
        const std::vector<CavityShape> both{sc.shape(x.first), sc.shape(x.second)};
        const auto bank = make_test_bank(sc.grid, both, 16, 7);
        if (bank.empty()) {
            t += "commutator_norm=unavailable (no test bump fits clear of both cavities)\n";
        } else {
            v.commutator = commutator_norm(sc.op(x.op), sc.op(x.second_op), sc.grid, bank);
            t += fmt::format("commutator_norm={:.17g} ({})\n", *v.commutator,
                             *v.commutator < 1e-10 ? "commuting on the test bank" : "not commuting; report only");
        }
    }

    const auto& h = v.hypotheses;
    const bool jump_ok = pass(h, "7a") && pass(h, "7b") && pass(h, "7c");
    switch (compliance_for(cmd)) {
        case Compliance::None:
            v.route = "none required";
            break;
        case Compliance::Q1: {
            const bool zero_u0 = sc.u0_first_zero && sc.u0_second_zero;
            const bool separable = sc.source && sc.source->form == SourceConfig::Form::Separable;
            const bool zero_data = zero_u0 && ((separable && pass(h, "7c")) || (!sc.source && sc.boundary));
            if (jump_ok)
                v.route = "jump source (7a)-(7c)";
            else if (zero_data)
                v.route = "known zero initial data";
            else
                v.compliant = false;
            break;
        }
        case Compliance::Q2:
            if (pass(h, "7a") && pass(h, "7b") && pass(h, "7d"))
                v.route = "jump source (7a), (7b), (7d)";
            else
                v.compliant = false;
            break;
        case Compliance::Inverse:
            if (jump_ok)
                v.route = "jump source (7a)-(7c)";
            else
                v.compliant = false;
            break;
    }
    if (compliance_for(cmd) != Compliance::None && !v.operators_ok) v.compliant = false;
    if (!v.compliant) v.route = "none";
    t += fmt::format("route: {}\n", v.route);
    t += fmt::format("compliant: {}\n", v.compliant ? "yes" : "no");
    return v;
}

void header(Summary& s, const std::string& cmd, const Scenario& sc) {
    s.add("command", cmd);
    s.add("scenario", sc.name);
    s.add("seed", sc.seed);
    s.add("h", sc.grid.h);
    s.add("T", sc.time.T);
    s.add("nt", sc.time.nt);
    s.add("scheme", to_string(sc.time.scheme));
}

SpaceTimeField forward_field(const Scenario& sc, const CavityShape& shape, const EllipticOperator& op,
                             const SpatialProfile& u0, const std::optional<SourceSpec>& src) {
    const auto cls = rasterize(shape, sc.grid);
    ForwardInputs in;
    in.source = src ? &*src : nullptr;
    in.dirichlet = sc.boundary ? &*sc.boundary : nullptr;
    in.u0 = initial_field(u0, cls);
    in.modes = sc.modes;
    if (sc.modes.outer == OuterBc::Neumann) return neumann_source_solve(cls, op, *sc.neumann, std::move(in), sc.time);
    return solve(cls, op, in, sc.time);
}

std::string expect_for(const Scenario& sc, const std::string& fallback) {
    return sc.experiment.expect.empty() ? fallback : sc.experiment.expect;
}

bool verdict_met(const std::string& expect, double ratio) {
    return expect == "indistinguishable" ? ratio <= 3.0 : ratio > 10.0;
}

int cmd_forward(const Scenario& sc, const fs::path& out, Summary& s, std::ostream& log) {
    const auto src = sc.build_source(sc.grid);
    const auto& shape = sc.shape(sc.experiment.first);
    const auto& op = sc.op(sc.experiment.op);
    const auto field = forward_field(sc, shape, op, sc.u0_first, src);
    for (std::size_t k = 0; k < field.size(); ++k) {
        const int n = static_cast<int>(std::lround(field.times[k] / sc.time.dt()));
        write_field_csv(out / fmt::format("field_{:05d}.csv", n), field.cls, field.snapshots[k]);
    }
    write_pgm(out / "field_final.pgm", field.cls, field.snapshots.back());
    double max_abs = 0.0, l2 = 0.0;
    for (int n = 0; n < sc.grid.size(); ++n) {
        const double u = field.snapshots.back()[static_cast<std::size_t>(n)];
        max_abs = std::max(max_abs, std::abs(u));
        l2 += u * u;
    }
    s.add("shape", describe(shape));
    s.add("operator", op.name);
    s.add("outer_bc", sc.modes.outer == OuterBc::Neumann ? "neumann" : "dirichlet");
    s.add("cavity_bc", sc.modes.cavity == CavityBc::Robin ? "robin" : "dirichlet");
    s.add("fluid_nodes", field.cls.count(NodeLabel::Fluid));
    s.add("snapshots", field.size());
    s.add("final_time", field.times.back());
    s.add("final_max_abs", max_abs);
    s.add("final_l2", std::sqrt(l2) * sc.grid.h);
    log << fmt::format("forward: {} snapshots, final max |u| = {:.6g}\n", field.size(), max_abs);
    return kExitOk;
}

int cmd_observe(const Scenario& sc, const fs::path& out, Summary& s, std::ostream& log) {
    const auto src = sc.build_source(sc.grid);
    const auto& shape = sc.shape(sc.experiment.first);
    const auto& op = sc.op(sc.experiment.op);
    const auto field = forward_field(sc, shape, op, sc.u0_first, src);
    auto obs = crop(extract(field, sc.region(sc.experiment.region), op, sc.experiment.kind), sc.experiment.window);
    if (sc.experiment.noise_level > 0.0) obs = add_noise(obs, sc.experiment.noise_level, sc.seed);
    write_observation_csv(out / "observation.csv", obs, sc.seed);
    s.add("shape", describe(shape));
    s.add("kind", to_string(obs.kind));
    s.add("region", obs.region);
    s.add("locations", obs.locations.size());
    s.add("stamps", obs.stamps.size());
    s.add("max_abs", obs.max_abs());
    s.add("noise_level", sc.experiment.noise_level);
    log << fmt::format("observe: {} locations x {} stamps\n", obs.locations.size(), obs.stamps.size());
    return kExitOk;
}

void write_pair(const fs::path& out, const DistinguishReport& r, std::uint64_t seed) {
    write_observation_csv(out / "observation_first.csv", r.first, seed);
    write_observation_csv(out / "observation_second.csv", r.second, seed);
}

int cmd_counterexample(const Scenario& sc, const fs::path& out, Summary& s, std::ostream& log) {
    const auto& x = sc.experiment;
    const auto design = make_design(sc);
    const auto r = distinguishability(sc.shape(x.first), sc.shape(x.second), sc.op(x.op), design, sc.grid);
    write_pair(out, r, sc.seed);
    s.add("first", describe(sc.shape(x.first)));
    s.add("second", describe(sc.shape(x.second)));
    s.add_lines(r.text());
    bool ok = verdict_met(expect_for(sc, "indistinguishable"), r.ratio);

    if (sc.source && sc.source->form == SourceConfig::Form::Counterexample && sc.u0_first_zero && !sc.boundary) {
        // u = t f0 exactly; compare at the final time.
        const auto src = sc.build_source(sc.grid);
        const auto field = forward_field(sc, sc.shape(x.first), sc.op(x.op), sc.u0_first, src);
        const auto f0 = sc.source->f0.sample(sc.grid);
        const double t = field.times.back();
        double err = 0.0, ref = 0.0;
        for (int n = 0; n < sc.grid.size(); ++n) {
            const auto k = static_cast<std::size_t>(n);
            err = std::max(err, std::abs(field.snapshots.back()[k] - t * f0[k]));
            ref = std::max(ref, std::abs(t * f0[k]));
        }
        const double rel = ref > 0 ? err / ref : err;
        s.add("affine_rel_error", rel);
        s.add("affine_tolerance", 5e-3);
        ok = ok && rel <= 5e-3;
    }
    s.add("expect", expect_for(sc, "indistinguishable"));
    s.add("verdict", ok ? "PASS" : "FAIL");
    log << fmt::format("counterexample: ratio {:.4g} ({})\n", r.ratio, r.verdict);
    return ok ? kExitOk : kExitVerdict;
}

int cmd_distinguish(const Scenario& sc, const fs::path& out, Summary& s, std::ostream& log) {
    const auto& x = sc.experiment;
    const auto design = make_design(sc);
    const auto r = distinguishability(sc.shape(x.first), sc.shape(x.second), sc.op(x.op), design, sc.grid);
    write_pair(out, r, sc.seed);
    s.add("first", describe(sc.shape(x.first)));
    s.add("second", describe(sc.shape(x.second)));
    s.add_lines(r.text());
    const std::string expect = expect_for(sc, "distinguishable");
    bool ok = verdict_met(expect, r.ratio);
    const json& init = sc.raw.contains("initial") ? sc.raw["initial"] : json::object();
    if (init.contains("second") && init.value("first", json()) != init["second"]) {
        // Control: same initial data for both cavities, so the gap reflects the shapes alone.
        Design same = design;
        same.u0_second = same.u0_first;
        const auto c = distinguishability(sc.shape(x.first), sc.shape(x.second), sc.op(x.op), same, sc.grid);
        s.add("shape_only_gap", c.gap);
        s.add("shape_only_floor", c.floor);
        s.add("shape_only_ratio", c.ratio);
        ok = ok && verdict_met(expect, c.ratio);
    }
    s.add("expect", expect);
    s.add("verdict", ok ? "PASS" : "FAIL");
    log << fmt::format("distinguish: ratio {:.4g} ({})\n", r.ratio, r.verdict);
    return ok ? kExitOk : kExitVerdict;
}

int cmd_q2(const Scenario& sc, const fs::path& out, Summary& s, std::ostream& log) {
    const auto& x = sc.experiment;
    const auto design = make_design(sc);
    const auto r =
        q2_distinguishability(sc.shape(x.first), sc.shape(x.second), sc.op(x.op), sc.op(x.second_op), design, sc.grid);
    write_pair(out, r, sc.seed);
    s.add("first", describe(sc.shape(x.first)));
    s.add("second", describe(sc.shape(x.second)));
    s.add("operator_first", x.op);
    s.add("operator_second", x.second_op);
    s.add_lines(r.text());
    const bool identical = x.first == x.second && x.op == x.second_op;
    bool ok = false;
    if (identical) {
        s.add("expect", "zero gap");
        ok = r.gap == 0.0;
    } else {
        const std::string expect = expect_for(sc, "distinguishable");
        s.add("expect", expect);
        ok = verdict_met(expect, r.ratio);
    }
    s.add("verdict", ok ? "PASS" : "FAIL");
    log << fmt::format("q2: gap {:.4g}, ratio {:.4g} ({})\n", r.gap, r.ratio, r.verdict);
    return ok ? kExitOk : kExitVerdict;
}

int cmd_reconstruct(const Scenario& sc, const fs::path& out, Summary& s, std::ostream& log) {
    if (!sc.inverse) throw Error(ErrorCode::ConfigParse, "inverse: missing table (needed by reconstruct)");
    const auto& inv = *sc.inverse;
    const auto& x = sc.experiment;
    const auto& truth = sc.shape(inv.truth);
    const auto& op = sc.op(x.op);
    const auto src = sc.build_source(sc.grid);

    const auto field = forward_field(sc, truth, op, inv.data_initial, src);
    Observation data = extract(field, sc.region(x.region), op, x.kind);
    if (inv.noise > 0.0) data = add_noise(data, inv.noise, sc.seed);
    write_observation_csv(out / "observation_data.csv", data, sc.seed);

    ForwardScenario fsc;
    fsc.grid = sc.grid;
    fsc.op = op;
    fsc.source = src;
    fsc.boundary = sc.boundary;
    fsc.time = sc.time;
    fsc.modes = sc.modes;
    fsc.region = sc.region(x.region);
    fsc.kind = x.kind;

    InverseProblemSpec spec;
    spec.data = data;
    spec.param = inv.param;
    spec.policy = inv.policy;
    spec.window = inv.window;
    spec.lambda = inv.lambda;
    spec.quadrature = x.quadrature;
    spec.optimizer = inv.optimizer;
    spec.optimizer.seed = sc.seed;
    spec.joint_basis = inv.joint_basis;

    const auto res = reconstruct(spec, fsc);
    write_trace_csv(out / "trace.csv", res);

    const double hd = hausdorff_distance(res.best_shape, truth);
    const double tol = 2.0 * sc.grid.h;
    s.add("truth", describe(truth));
    s.add("policy", to_string(inv.policy));
    s.add("window", inv.window);
    s.add("noise_level", inv.noise);
    for (std::size_t k = 0; k < res.best_params.size(); ++k) s.add(fmt::format("best_p{}", k), res.best_params[k]);
    s.add("best_shape", describe(res.best_shape));
    s.add("objective", res.objective);
    s.add("misfit", res.misfit);
    s.add("evaluations", res.evaluations);
    s.add("solves", res.solves);
    s.add("budget", inv.optimizer.max_evaluations);
    s.add("budget_exhausted", res.budget_exhausted);
    for (const auto& st : res.starts)
        s.add(fmt::format("start_{}", st.start),
              fmt::format("objective={:.17g} evaluations={} converged={}", st.best_objective, st.evaluations,
                          st.converged ? "true" : "false"));
    s.add("hausdorff", hd);
    s.add("tolerance", tol);
    const bool ok = hd < tol && res.evaluations <= inv.optimizer.max_evaluations;
    s.add("verdict", ok ? "PASS" : "FAIL");
    log << fmt::format("reconstruct: {} evaluations, Hausdorff {:.4g} (tolerance {:.4g})\n", res.evaluations, hd, tol);
    return ok ? kExitOk : kExitVerdict;
}

int cmd_sweep(const Scenario& base, const RunOptions& o, const fs::path& out, Summary& s, std::ostream& log) {
    std::string axis;
    std::vector<double> values;
    if (o.axis) {
        axis = *o.axis;
        if (o.range)
            values = parse_range(*o.range);
        else if (base.sweep)
            values = base.sweep->values;
    } else if (base.sweep) {
        axis = base.sweep->axis;
        values = o.range ? parse_range(*o.range) : base.sweep->values;
    } else {
        throw Error(ErrorCode::BadAxis, "sweep needs an axis (--axis or a sweep table)");
    }
    json_number_at(base.raw, axis);

    std::string csv = "parameter,gap,floor,ratio\n";
    std::vector<double> ratios;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (double v : values) {
        json j = base.raw;
        set_json_number_at(j, axis, v);
        const Scenario sc = parse_scenario(j);
        const auto& x = sc.experiment;
        const auto design = make_design(sc);
        const auto r = x.op == x.second_op
                           ? distinguishability(sc.shape(x.first), sc.shape(x.second), sc.op(x.op), design, sc.grid)
                           : q2_distinguishability(sc.shape(x.first), sc.shape(x.second), sc.op(x.op),
                                                   sc.op(x.second_op), design, sc.grid);
        csv += fmt::format("{},{},{},{}\n", format_double(v), format_double(r.gap), format_double(r.floor),
                           format_double(r.ratio));
        ratios.push_back(r.ratio);
        min_ratio = std::min(min_ratio, r.ratio);
        log << fmt::format("sweep: {} = {:.6g} -> ratio {:.4g}\n", axis, v, r.ratio);
    }
    write_text(out / "sweep.csv", csv);
    s.add("axis", axis);
    s.add("rows", values.size());
    if (!values.empty()) s.add("min_ratio", min_ratio);
    if (values.size() >= 2) s.add("spearman", spearman(values, ratios));
    return kExitOk;
}

}  // namespace

RunResult run(const RunOptions& o, std::ostream& log) {
    RunResult res;
    Summary& s = res.summary;
    try {
        const auto cmds = commands();
        if (std::find(cmds.begin(), cmds.end(), o.command) == cmds.end())
            throw Error(ErrorCode::ConfigParse, fmt::format("unknown command '{}'", o.command));
        fs::create_directories(o.out);
        const Scenario sc = parse_scenario(load_config(o));
        header(s, o.command, sc);

        const Validation v = validate(sc, o.command);
        write_text(o.out / "hypotheses.txt", v.text);
        s.add("hypothesis_route", v.route);
        s.add("compliant", v.compliant);

        if (!v.compliant) {
            res.exit_code = kExitHypothesis;
            res.error = fmt::format("{}: {} requires hypothesis compliance; see hypotheses.txt",
                                    to_string(ErrorCode::HypothesisViolation), o.command);
            s.add("verdict", "FAIL");
            s.add("error", res.error);
        } else if (o.validate_only) {
            s.add("validation", "pass");
        } else if (o.command == "forward") {
            res.exit_code = cmd_forward(sc, o.out, s, log);
        } else if (o.command == "observe") {
            res.exit_code = cmd_observe(sc, o.out, s, log);
        } else if (o.command == "counterexample") {
            res.exit_code = cmd_counterexample(sc, o.out, s, log);
        } else if (o.command == "distinguish") {
            res.exit_code = cmd_distinguish(sc, o.out, s, log);
        } else if (o.command == "q2") {
            res.exit_code = cmd_q2(sc, o.out, s, log);
        } else if (o.command == "reconstruct") {
            res.exit_code = cmd_reconstruct(sc, o.out, s, log);
        } else {
            res.exit_code = cmd_sweep(sc, o, o.out, s, log);
        }
    } catch (const Error& e) {
        res.exit_code = kExitError;
        res.error = e.what();
        s.add("error", res.error);
    } catch (const std::exception& e) {
        res.exit_code = kExitError;
        res.error = e.what();
        s.add("error", res.error);
    }
    try {
        write_text(o.out / "summary.txt", s.text());
    } catch (const std::exception& e) {
        if (res.exit_code == kExitOk) res.exit_code = kExitError;
        if (res.error.empty()) res.error = e.what();
    }
    return res;
}

}  // namespace cavlab
