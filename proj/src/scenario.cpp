#include "cavlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "cavlab/error.hpp"

namespace cavlab {

using nlohmann::json;

namespace {

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

[[noreturn]] void parse_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ConfigParse, path.empty() ? what : fmt::format("{}: {}", path, what));
}

std::string type_name(const json& j) { return j.type_name(); }

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) parse_error(path, fmt::format("expected a number, found {}", type_name(j)));
    return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) parse_error(path, fmt::format("expected an integer, found {}", type_name(j)));
    return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) parse_error(path, fmt::format("expected a string, found {}", type_name(j)));
    return j.get<std::string>();
}

std::vector<double> as_numbers(const json& j, const std::string& path) {
    if (!j.is_array()) parse_error(path, fmt::format("expected an array of numbers, found {}", type_name(j)));
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(as_number(j[k], fmt::format("{}[{}]", path, k)));
    return out;
}

/// Object view that remembers which keys were read, so leftovers can be
/// reported as unknown.
class Table {
public:
    Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) parse_error(path_, fmt::format("expected a table, found {}", type_name(j_)));
    }

    const std::string& path() const { return path_; }
    std::string path(const std::string& key) const { return join_path(path_, key); }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key) {
        if (!j_.contains(key)) parse_error(path_, fmt::format("missing key '{}'", key));
        used_.insert(key);
        return j_.at(key);
    }
    const json* find(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }
    Table table(const std::string& key) { return Table(at(key), path(key)); }

    double number(const std::string& key) { return as_number(at(key), path(key)); }
    double number(const std::string& key, double fallback) {
        const json* v = find(key);
        return v ? as_number(*v, path(key)) : fallback;
    }
    int integer(const std::string& key, int fallback) {
        const json* v = find(key);
        return v ? as_int(*v, path(key)) : fallback;
    }
    std::string string(const std::string& key) { return as_string(at(key), path(key)); }
    std::string string(const std::string& key, const std::string& fallback) {
        const json* v = find(key);
        return v ? as_string(*v, path(key)) : fallback;
    }
    bool boolean(const std::string& key, bool fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) parse_error(path(key), fmt::format("expected a boolean, found {}", type_name(*v)));
        return v->get<bool>();
    }
    std::vector<double> numbers(const std::string& key) { return as_numbers(at(key), path(key)); }

    void mark(const std::string& key) { used_.insert(key); }

    /// Throws on the first key that was never read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) parse_error(path(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

SpatialProfile parse_profile(const json& j, const std::string& path) {
    if (j.is_number()) {
        const double v = j.get<double>();
        return v == 0.0 ? SpatialProfile::zero() : SpatialProfile::constant(v);
    }
    std::string name;
    std::map<std::string, double> params;
    if (j.is_string()) {
        name = j.get<std::string>();
    } else {
        Table t(j, path);
        name = t.string("preset");
        const auto names = preset_names();
        if (std::find(names.begin(), names.end(), name) == names.end())
            parse_error(t.path("preset"), fmt::format("unknown profile preset '{}'", name));
        for (const auto& p : preset_parameters(name))
            if (t.has(p)) params[p] = t.number(p);
        t.finish();
    }
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        parse_error(path, fmt::format("unknown profile preset '{}'", name));
    return preset_profile(name, params);
}

TimeProfile parse_time_profile(const json& j, const std::string& path) {
    if (j.is_number()) return TimeProfile::constant(j.get<double>());
    Table t(j, path);
    std::optional<TimeProfile> out;
    if (t.has("constant")) out = TimeProfile::constant(t.number("constant"));
    if (t.has("exponential")) {
        if (out) parse_error(path, "give exactly one of constant, exponential, piecewise");
        Table e = t.table("exponential");
        TimeProfile::Exponential ex{e.number("amplitude", 1.0), e.number("rate")};
        e.finish();
        out = TimeProfile(ex);
    }
    if (t.has("piecewise")) {
        if (out) parse_error(path, "give exactly one of constant, exponential, piecewise");
        Table p = t.table("piecewise");
        auto breaks = p.numbers("breaks");
        const json& pj = p.at("pieces");
        if (!pj.is_array()) parse_error(p.path("pieces"), "expected an array of coefficient arrays");
        std::vector<std::vector<double>> pieces;
        for (std::size_t k = 0; k < pj.size(); ++k)
            pieces.push_back(as_numbers(pj[k], fmt::format("{}[{}]", p.path("pieces"), k)));
        p.finish();
        if (breaks.empty() || breaks.size() != pieces.size())
            parse_error(p.path("pieces"), "need one coefficient array per breakpoint");
        for (std::size_t k = 1; k < breaks.size(); ++k)
            if (!(breaks[k] > breaks[k - 1])) parse_error(p.path("breaks"), "breakpoints must increase");
        out = TimeProfile(PiecewisePolynomial(std::move(breaks), std::move(pieces)));
    }
    if (!out) parse_error(path, "expected one of constant, exponential, piecewise");
    t.finish();
    return *out;
}

CavityShape parse_shape(const json& j, const std::string& path) {
    Table t(j, path);
    const std::string type = t.string("type");
    CavityShape out;
    if (type == "rectangle") {
        AxisRectangle r{t.number("x0"), t.number("y0"), t.number("x1"), t.number("y1")};
        if (!(r.x1 > r.x0 && r.y1 > r.y0)) throw Error(ErrorCode::EmptyCavity, fmt::format("{}: empty rectangle", path));
        out = r;
    } else if (type == "circle") {
        StarShape s{t.number("cx"), t.number("cy"), t.number("r"), {}, {}};
        if (!(s.rho0 > 0)) throw Error(ErrorCode::NegativeRadius, fmt::format("{}: radius must be positive", path));
        out = s;
    } else if (type == "star") {
        StarShape s{t.number("cx"), t.number("cy"), t.number("rho0"), {}, {}};
        if (t.has("a")) s.a = t.numbers("a");
        if (t.has("b")) s.b = t.numbers("b");
        if (s.a.size() != s.b.size()) throw Error(ErrorCode::BadArity, fmt::format("{}: a and b differ in length", path));
        out = s;
    } else {
        parse_error(t.path("type"), fmt::format("unknown shape type '{}'", type));
    }
    t.finish();
    return out;
}

EllipticOperator parse_operator(const std::string& name, const json& j, const std::string& path) {
    Table t(j, path);
    EllipticOperator op;
    op.name = name;
    auto coeff = [&](const char* key, SpatialProfile& slot) {
        if (const json* v = t.find(key)) slot = parse_profile(*v, t.path(key));
    };
    coeff("a11", op.a11);
    coeff("a12", op.a12);
    coeff("a22", op.a22);
    coeff("b1", op.b1);
    coeff("b2", op.b2);
    coeff("c", op.c);
    op.alpha = t.number("alpha", 1.0);
    op.c0 = t.number("c0", 0.0);
    t.finish();
    return op;
}

Patch parse_patch(Table& t) {
    if (t.has("rect") == t.has("disc")) parse_error(t.path(), "give exactly one of rect, disc");
    if (t.has("rect")) {
        const auto v = t.numbers("rect");
        if (v.size() != 4) parse_error(t.path("rect"), "expected [x0, y0, x1, y1]");
        return RectPatch{v[0], v[1], v[2], v[3]};
    }
    const auto v = t.numbers("disc");
    if (v.size() != 3) parse_error(t.path("disc"), "expected [cx, cy, r]");
    return DiscPatch{v[0], v[1], v[2]};
}

Region parse_region(const std::string& name, const json& j, const std::string& path) {
    Table t(j, path);
    const std::string type = t.string("type");
    Region out;
    if (type == "subboundary") {
        const json& segs = t.at("segments");
        if (!segs.is_array() || segs.empty()) parse_error(t.path("segments"), "expected a non-empty array");
        std::vector<EdgeSegment> list;
        for (std::size_t k = 0; k < segs.size(); ++k) {
            Table s(segs[k], fmt::format("{}[{}]", t.path("segments"), k));
            const std::string e = s.string("edge");
            const auto edge = edge_from_string(e);
            if (!edge) parse_error(s.path("edge"), fmt::format("unknown edge '{}'", e));
            EdgeSegment seg{*edge};
            seg.from = s.number("from", seg.from);
            seg.to = s.number("to", seg.to);
            s.finish();
            list.push_back(seg);
        }
        out = Region::subboundary(name, std::move(list));
    } else if (type == "boundary") {
        out = Region::full_boundary(name);
    } else if (type == "interior") {
        out = Region::interior(name, parse_patch(t));
    } else if (type == "zone") {
        out = Region::zone(name, parse_patch(t));
    } else {
        parse_error(t.path("type"), fmt::format("unknown region type '{}'", type));
    }
    t.finish();
    return out;
}

std::vector<double> parse_remainder(Table& src, const char* key, SpatialProfile& space) {
    if (!src.has(key)) return {};
    Table r = src.table(key);
    auto coeffs = r.numbers("coefficients");
    space = parse_profile(r.at("profile"), r.path("profile"));
    r.finish();
    return coeffs;
}

SourceConfig parse_source(const json& j, const std::string& path) {
    Table t(j, path);
    SourceConfig s;
    const std::string form = t.string("form", "jump");
    s.f0 = parse_profile(t.at("f0"), t.path("f0"));
    if (const json* v = t.find("exclusion")) {
        if (!v->is_array()) parse_error(t.path("exclusion"), "expected an array of region names");
        for (std::size_t k = 0; k < v->size(); ++k)
            s.exclusion.push_back(as_string((*v)[k], fmt::format("{}[{}]", t.path("exclusion"), k)));
    }
    if (form == "jump") {
        s.form = SourceConfig::Form::Jump;
        s.m = t.integer("m", 0);
        const auto b = t.numbers("breakpoints");
        if (b.size() != 3) parse_error(t.path("breakpoints"), "expected [t0, t1, t2]");
        s.t0 = b[0];
        s.t1 = b[1];
        s.t2 = b[2];
        if (t.has("a")) {
            const auto a = t.numbers("a");
            if (a.size() != 2) parse_error(t.path("a"), "expected [a1, a2]");
            s.a1 = a[0];
            s.a2 = a[1];
        }
        s.r1_time = parse_remainder(t, "r1", s.r1_space);
        s.r2_time = parse_remainder(t, "r2", s.r2_space);
        s.ramp_width = t.number("ramp_width", 0.0);
        s.claims_jump = t.boolean("claims_jump", s.ramp_width == 0.0);
    } else if (form == "separable") {
        s.form = SourceConfig::Form::Separable;
        s.mu = parse_time_profile(t.at("mu"), t.path("mu"));
    } else if (form == "counterexample") {
        s.form = SourceConfig::Form::Counterexample;
        s.op = t.string("operator", "");
    } else {
        parse_error(t.path("form"), fmt::format("unknown source form '{}'", form));
    }
    t.finish();
    return s;
}

std::vector<double> sweep_values(Table& t) {
    if (t.has("values")) {
        if (t.has("from") || t.has("to") || t.has("count")) parse_error(t.path(), "give values or from/to/count");
        return t.numbers("values");
    }
    const double from = t.number("from"), to = t.number("to");
    const int count = t.integer("count", 0);
    if (count < 0) parse_error(t.path("count"), "count must be non-negative");
    std::vector<double> v;
    for (int k = 0; k < count; ++k) v.push_back(count == 1 ? from : from + (to - from) * k / (count - 1));
    return v;
}

template <class Map>
const typename Map::mapped_type& lookup(const Map& m, const std::string& name, const char* what) {
    auto it = m.find(name);
    if (it == m.end()) throw Error(ErrorCode::MissingReference, fmt::format("unknown {} '{}'", what, name));
    return it->second;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string item;
    while (std::getline(ss, item, '.')) parts.push_back(item);
    return parts;
}

json* walk(json& j, const std::string& path) {
    json* cur = &j;
    for (const auto& part : split_path(path)) {
        if (part.empty()) return nullptr;
        if (cur->is_object()) {
            if (!cur->contains(part)) return nullptr;
            cur = &(*cur)[part];
        } else if (cur->is_array()) {
            if (!std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; })) return nullptr;
            const std::size_t k = std::stoul(part);
            if (k >= cur->size()) return nullptr;
            cur = &(*cur)[k];
        } else {
            return nullptr;
        }
    }
    return cur;
}

}  // namespace

const CavityShape& Scenario::shape(const std::string& n) const { return lookup(shapes, n, "shape"); }
const EllipticOperator& Scenario::op(const std::string& n) const { return lookup(operators, n, "operator"); }
const Region& Scenario::region(const std::string& n) const { return lookup(regions, n, "region"); }

std::vector<Region> Scenario::exclusion_zones() const {
    std::vector<Region> out;
    if (source)
        for (const auto& z : source->exclusion) out.push_back(region(z));
    return out;
}

std::vector<CavityShape> Scenario::candidates() const {
    std::vector<CavityShape> out;
    std::vector<std::string> names;
    if (!experiment.first.empty()) names.push_back(experiment.first);
    if (!experiment.second.empty()) names.push_back(experiment.second);
    if (inverse) names.push_back(inverse->truth);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    for (const auto& n : names) out.push_back(shape(n));
    return out;
}

std::optional<SourceSpec> Scenario::build_source(const Grid& g) const {
    if (!source) return std::nullopt;
    const SourceConfig& c = *source;
    SourceSpec s;
    switch (c.form) {
        case SourceConfig::Form::Jump:
            s.form = SourceForm::Jump;
            s.m = c.m;
            s.t0 = c.t0;
            s.t1 = c.t1;
            s.t2 = c.t2;
            s.a1 = c.a1;
            s.a2 = c.a2;
            s.f0 = c.f0;
            s.r1_time = c.r1_time;
            s.r1_space = c.r1_space;
            s.r2_time = c.r2_time;
            s.r2_space = c.r2_space;
            s.ramp_width = c.ramp_width;
            s.claims_jump = c.claims_jump;
            break;
        case SourceConfig::Form::Separable:
            s = SourceSpec::separable(c.f0, c.mu);
            break;
        case SourceConfig::Form::Counterexample: {
            const auto cav = candidates();
            return counterexample_source(c.f0, op(c.op.empty() ? experiment.op : c.op), g, cav, time.T);
        }
    }
    validate_source(s);
    return s;
}

json read_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line and column
        const std::size_t at = std::min(e.byte, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < at; ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::ConfigParse, fmt::format("{}:{}:{}: malformed JSON ({})", origin, line, col, e.what()));
    }
}

Scenario parse_scenario(const json& j) {
    Table root(j, "");
    Scenario sc;
    sc.raw = j;
    const int schema = root.integer("schema", kScenarioSchema);
    if (schema != kScenarioSchema)
        parse_error("schema", fmt::format("unsupported schema version {} (expected {})", schema, kScenarioSchema));
    sc.name = root.string("name", "scenario");
    if (const json* v = root.find("seed")) {
        if (!v->is_number_unsigned()) parse_error("seed", "expected a non-negative integer");
        sc.seed = v->get<std::uint64_t>();
    }

    {
        Table g = root.table("grid");
        sc.grid = Grid::make(g.number("x_min", 0.0), g.number("x_max", 2.0), g.number("y_min", 0.0),
                             g.number("y_max", 2.0), g.number("h"));
        g.finish();
    }

    if (root.has("shapes")) {
        const json& s = root.at("shapes");
        if (!s.is_object()) parse_error("shapes", "expected a table of named shapes");
        for (auto it = s.begin(); it != s.end(); ++it)
            sc.shapes.emplace(it.key(), parse_shape(it.value(), join_path("shapes", it.key())));
    }

    sc.operators.emplace("A", EllipticOperator::laplacian());
    if (root.has("operators")) {
        const json& s = root.at("operators");
        if (!s.is_object()) parse_error("operators", "expected a table of named operators");
        for (auto it = s.begin(); it != s.end(); ++it)
            sc.operators[it.key()] = parse_operator(it.key(), it.value(), join_path("operators", it.key()));
    }

    if (root.has("regions")) {
        const json& s = root.at("regions");
        if (!s.is_object()) parse_error("regions", "expected a table of named regions");
        for (auto it = s.begin(); it != s.end(); ++it)
            sc.regions.emplace(it.key(), parse_region(it.key(), it.value(), join_path("regions", it.key())));
    }

    if (const json* v = root.find("source")) sc.source = parse_source(*v, "source");

    if (root.has("boundary")) {
        Table b = root.table("boundary");
        BoundaryInput bi;
        bi.g0 = parse_profile(b.at("g0"), b.path("g0"));
        if (const json* v = b.find("mu")) bi.mu = parse_time_profile(*v, b.path("mu"));
        bi.collar_width = b.number("collar_width", 0.0);
        b.finish();
        sc.boundary = bi;
    }

    if (root.has("neumann")) {
        Table n = root.table("neumann");
        NeumannInput ni;
        const json& flux = n.at("flux");
        if (flux.is_object() && !flux.contains("preset")) {
            Table f(flux, n.path("flux"));
            for (Edge e : {Edge::Left, Edge::Right, Edge::Bottom, Edge::Top}) {
                const std::string key = to_string(e);
                if (const json* v = f.find(key))
                    ni.flux[static_cast<std::size_t>(e)] = parse_profile(*v, f.path(key));
            }
            f.finish();
        } else {
            const auto p = parse_profile(flux, n.path("flux"));
            ni.flux.fill(p);
        }
        if (const json* v = n.find("mu")) ni.mu = parse_time_profile(*v, n.path("mu"));
        n.finish();
        sc.neumann = ni;
    }

    if (root.has("initial")) {
        Table i = root.table("initial");
        if (const json* v = i.find("first")) {
            sc.u0_first = parse_profile(*v, i.path("first"));
            sc.u0_second = sc.u0_first;
        }
        if (const json* v = i.find("second")) sc.u0_second = parse_profile(*v, i.path("second"));
        i.finish();
    }
    sc.u0_first_zero = sc.u0_first.is_identically_zero();
    sc.u0_second_zero = sc.u0_second.is_identically_zero();

    {
        Table t = root.table("time");
        sc.time.T = t.number("T");
        sc.time.nt = t.integer("nt", 100);
        const std::string scheme = t.string("scheme", "crank-nicolson");
        const auto s = scheme_from_string(scheme);
        if (!s) parse_error(t.path("scheme"), fmt::format("unknown scheme '{}'", scheme));
        sc.time.scheme = *s;
        sc.time.stride = t.integer("stride", 1);
        sc.time.startup_steps = t.integer("startup_steps", 0);
        t.finish();
        if (!(sc.time.T > 0) || sc.time.nt < 1 || sc.time.stride < 1 || sc.time.startup_steps < 0)
            parse_error("time", "need T > 0, nt >= 1, stride >= 1, startup_steps >= 0");
    }

    if (const json* v = root.find("outer_bc")) {
        const std::string s = as_string(*v, "outer_bc");
        if (s == "dirichlet")
            sc.modes.outer = OuterBc::Dirichlet;
        else if (s == "neumann")
            sc.modes.outer = OuterBc::Neumann;
        else
            parse_error("outer_bc", fmt::format("unknown outer condition '{}'", s));
    }
    if (root.has("cavity_bc")) {
        Table c = root.table("cavity_bc");
        const std::string type = c.string("type");
        if (type == "dirichlet") {
            sc.modes.cavity = CavityBc::Dirichlet;
        } else if (type == "robin") {
            sc.modes.cavity = CavityBc::Robin;
            sc.modes.robin_m = parse_profile(c.at("m"), c.path("m"));
        } else {
            parse_error(c.path("type"), fmt::format("unknown cavity condition '{}'", type));
        }
        c.finish();
    }
    if (sc.modes.outer == OuterBc::Neumann && !sc.neumann)
        parse_error("outer_bc", "neumann outer condition needs a neumann section");
    if (sc.neumann && sc.modes.outer != OuterBc::Neumann)
        parse_error("neumann", "a neumann section needs outer_bc = \"neumann\"");
    if (sc.neumann && sc.boundary) parse_error("boundary", "boundary and neumann sections are exclusive");

    {
        Table e = root.table("experiment");
        auto& x = sc.experiment;
        x.first = e.string("first");
        x.second = e.string("second", x.first);
        x.op = e.string("operator", "A");
        x.second_op = e.string("second_operator", x.op);
        x.region = e.string("region");
        const std::string kind = e.string("kind", "conormal");
        if (kind == "conormal")
            x.kind = ObservationKind::ConormalOnGamma;
        else if (kind == "interior")
            x.kind = ObservationKind::InteriorOnOmega;
        else
            parse_error(e.path("kind"), fmt::format("unknown observation kind '{}'", kind));
        x.window = e.number("window", 0.0);
        const std::string quad = e.string("quadrature", "trapezoid");
        if (quad == "trapezoid")
            x.quadrature = Quadrature::Trapezoid;
        else if (quad == "unit")
            x.quadrature = Quadrature::Unit;
        else
            parse_error(e.path("quadrature"), fmt::format("unknown quadrature '{}'", quad));
        x.expect = e.string("expect", "");
        if (!x.expect.empty() && x.expect != "distinguishable" && x.expect != "indistinguishable")
            parse_error(e.path("expect"), "expected distinguishable or indistinguishable");
        x.noise_level = e.number("noise", 0.0);
        e.finish();
    }

    if (root.has("inverse")) {
        Table t = root.table("inverse");
        InverseConfig in;
        in.truth = t.string("truth");
        in.param.modes = t.integer("modes", 0);
        in.param.lower = t.numbers("lower");
        in.param.upper = t.numbers("upper");
        in.param.min_radius = t.number("min_radius", in.param.min_radius);
        if (in.param.lower.size() != in.param.arity() || in.param.upper.size() != in.param.arity())
            throw Error(ErrorCode::BadArity, fmt::format("inverse: box needs {} entries for {} modes",
                                                         in.param.arity(), in.param.modes));
        const std::string policy = t.string("policy", "windowed");
        if (policy == "windowed")
            in.policy = U0Policy::Windowed;
        else if (policy == "joint")
            in.policy = U0Policy::Joint;
        else
            parse_error(t.path("policy"), fmt::format("unknown policy '{}'", policy));
        in.window = t.number("window", 0.0);
        in.lambda = t.number("lambda", 0.0);
        in.optimizer.starts = t.integer("starts", in.optimizer.starts);
        in.optimizer.max_evaluations = t.integer("max_evaluations", in.optimizer.max_evaluations);
        in.optimizer.simplex_tol = t.number("simplex_tol", in.optimizer.simplex_tol);
        in.optimizer.initial_step = t.number("initial_step", in.optimizer.initial_step);
        in.noise = t.number("noise", 0.0);
        if (const json* v = t.find("data_initial")) in.data_initial = parse_profile(*v, t.path("data_initial"));
        in.joint_basis = t.integer("joint_basis", in.joint_basis);
        t.finish();
        sc.inverse = in;
    }

    if (root.has("sweep")) {
        Table t = root.table("sweep");
        SweepConfig sw;
        sw.axis = t.string("axis");
        sw.values = sweep_values(t);
        t.finish();
        json_number_at(j, sw.axis);
        sc.sweep = sw;
    }

    root.finish();

    // referential integrity
    const auto& x = sc.experiment;
    sc.shape(x.first);
    sc.shape(x.second);
    sc.op(x.op);
    sc.op(x.second_op);
    const Region& obs = sc.region(x.region);
    if (x.kind == ObservationKind::ConormalOnGamma && obs.kind != RegionKind::Subboundary)
        throw Error(ErrorCode::RegionKindMismatch, fmt::format("experiment.region '{}' is not a subboundary", x.region));
    if (x.kind == ObservationKind::InteriorOnOmega && obs.kind != RegionKind::InteriorPatch)
        throw Error(ErrorCode::RegionKindMismatch,
                    fmt::format("experiment.region '{}' is not an interior patch", x.region));
    if (sc.source) {
        for (const auto& z : sc.source->exclusion)
            if (sc.region(z).kind != RegionKind::ActivationZone)
                throw Error(ErrorCode::RegionKindMismatch, fmt::format("source.exclusion '{}' is not a zone", z));
        if (sc.source->form == SourceConfig::Form::Counterexample && !sc.source->op.empty()) sc.op(sc.source->op);
    }
    if (sc.inverse) sc.shape(sc.inverse->truth);
    for (const auto& [name, r] : sc.regions) {
        if (r.kind != RegionKind::InteriorPatch) continue;
        for (const auto& [sname, s] : sc.shapes)
            if (!disjoint(r, s, sc.grid))
                throw Error(ErrorCode::InvalidSpec,
                            fmt::format("observation patch '{}' overlaps cavity '{}'", name, sname));
    }
    return sc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::ConfigParse, fmt::format("cannot read {}", path.string()));
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_scenario(read_json(buf.str(), path.string()));
}

double json_number_at(const json& j, const std::string& path) {
    json copy = j;
    const json* v = walk(copy, path);
    if (!v || !v->is_number()) throw Error(ErrorCode::BadAxis, fmt::format("'{}' does not name a numeric setting", path));
    return v->get<double>();
}

void set_json_number_at(json& j, const std::string& path, double value) {
    json* v = walk(j, path);
    if (!v || !v->is_number()) throw Error(ErrorCode::BadAxis, fmt::format("'{}' does not name a numeric setting", path));
    *v = value;
}

// Built-in cases. The squares sit in (1/4, 2)^2; the circle case uses (0, 2)^2.
namespace {

constexpr const char* kNestedSquares = R"({
  "schema": 1,
  "name": "nested-squares",
  "seed": 1,
  "grid": {"x_min": 0.25, "x_max": 2, "y_min": 0.25, "y_max": 2, "h": 0.015625},
  "shapes": {
    "D1": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.0, "y1": 1.0},
    "D2": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.5, "y1": 1.5}
  },
  "regions": {"left": {"type": "subboundary", "segments": [{"edge": "left"}]}},
  "boundary": {"g0": "sinsin", "mu": {"exponential": {"amplitude": 1, "rate": -78.95683520871486}}},
  "initial": {"first": "sinsin"},
  "time": {"T": 0.1, "nt": 400, "scheme": "crank-nicolson", "stride": 4},
  "experiment": {"first": "D1", "second": "D2", "region": "left", "kind": "conormal",
                 "expect": "indistinguishable"}
})";

constexpr const char* kTAffine = R"({
  "schema": 1,
  "name": "t-affine-source",
  "seed": 1,
  "grid": {"x_min": 0.25, "x_max": 2, "y_min": 0.25, "y_max": 2, "h": 0.03125},
  "shapes": {
    "D1": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.0, "y1": 1.0},
    "D2": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.5, "y1": 1.5}
  },
  "regions": {
    "omega": {"type": "interior", "disc": [1.75, 1.1, 0.15]},
    "left": {"type": "subboundary", "segments": [{"edge": "left"}]}
  },
  "source": {"form": "counterexample", "f0": {"preset": "bump", "cx": 1.75, "cy": 1.1, "radius": 0.15}},
  "time": {"T": 0.1, "nt": 100},
  "experiment": {"first": "D1", "second": "D2", "region": "omega", "kind": "interior",
                 "expect": "indistinguishable"}
})";

constexpr const char* kBangBang = R"({
  "schema": 1,
  "name": "bang-bang-Q1",
  "seed": 1,
  "grid": {"x_min": 0.25, "x_max": 2, "y_min": 0.25, "y_max": 2, "h": 0.03125},
  "shapes": {
    "D1": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.0, "y1": 1.0},
    "D2": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.5, "y1": 1.5}
  },
  "regions": {
    "left": {"type": "subboundary", "segments": [{"edge": "left"}]},
    "zone": {"type": "zone", "rect": [0.4, 0.4, 1.6, 1.6]}
  },
  "source": {"form": "jump", "m": 0, "breakpoints": [0.05, 0.5, 1.0], "a": [1, 0],
             "f0": {"preset": "bump", "cx": 1.75, "cy": 1.75, "radius": 0.2},
             "exclusion": ["zone"], "ramp_width": 0},
  "initial": {
    "first": {"preset": "fourier", "x_min": 0.25, "x_max": 2, "y_min": 0.25, "y_max": 2, "seed": 1},
    "second": {"preset": "fourier", "x_min": 0.25, "x_max": 2, "y_min": 0.25, "y_max": 2, "seed": 2}
  },
  "time": {"T": 1.0, "nt": 200},
  "experiment": {"first": "D1", "second": "D2", "region": "left", "kind": "conormal", "window": 0.05,
                 "expect": "distinguishable"},
  "sweep": {"axis": "source.breakpoints.1", "from": 0.1, "to": 0.9, "count": 9}
})";

constexpr const char* kConstantQ2 = R"({
  "schema": 1,
  "name": "constant-coeff-Q2",
  "seed": 1,
  "grid": {"x_min": 0.25, "x_max": 2, "y_min": 0.25, "y_max": 2, "h": 0.03125},
  "shapes": {
    "D1": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.0, "y1": 1.0},
    "D2": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.5, "y1": 1.5}
  },
  "operators": {
    "P1": {"c": 1, "c0": 1},
    "P2": {"a11": 2, "a22": 2, "c": 0.5, "alpha": 2, "c0": 0.5}
  },
  "regions": {
    "omega": {"type": "interior", "rect": [1.6, 0.4, 1.9, 0.7]},
    "zone": {"type": "zone", "rect": [0.4, 0.4, 1.6, 1.6]}
  },
  "source": {"form": "jump", "m": 0, "breakpoints": [0.05, 0.5, 1.0], "a": [1, 0],
             "f0": {"preset": "bump", "cx": 1.75, "cy": 1.75, "radius": 0.2},
             "exclusion": ["zone"]},
  "time": {"T": 1.0, "nt": 200},
  "experiment": {"first": "D1", "second": "D2", "operator": "P1", "second_operator": "P2",
                 "region": "omega", "kind": "interior", "window": 0.05, "expect": "distinguishable"}
})";

constexpr const char* kRobin = R"({
  "schema": 1,
  "name": "robin-cavity",
  "seed": 1,
  "grid": {"x_min": 0.25, "x_max": 2, "y_min": 0.25, "y_max": 2, "h": 0.03125},
  "shapes": {
    "D1": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.0, "y1": 1.0},
    "D2": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.5, "y1": 1.5}
  },
  "regions": {"left": {"type": "subboundary", "segments": [{"edge": "left"}]}},
  "boundary": {"g0": 1},
  "cavity_bc": {"type": "robin", "m": 1},
  "time": {"T": 0.5, "nt": 50, "stride": 10, "startup_steps": 2},
  "experiment": {"first": "D1", "second": "D2", "region": "left", "kind": "conormal"}
})";

constexpr const char* kNeumann = R"({
  "schema": 1,
  "name": "neumann-source",
  "seed": 1,
  "grid": {"x_min": 0.25, "x_max": 2, "y_min": 0.25, "y_max": 2, "h": 0.03125},
  "shapes": {
    "D1": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.0, "y1": 1.0},
    "D2": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.5, "y1": 1.5}
  },
  "operators": {"A": {"c": 1, "c0": 1}},
  "regions": {"left": {"type": "subboundary", "segments": [{"edge": "left"}]}},
  "outer_bc": "neumann",
  "neumann": {"flux": 1},
  "time": {"T": 1.0, "nt": 100, "stride": 20},
  "experiment": {"first": "D1", "second": "D2", "region": "left", "kind": "conormal"}
})";

constexpr const char* kZeroU0 = R"({
  "schema": 1,
  "name": "zero-u0-smooth-mu",
  "seed": 1,
  "grid": {"x_min": 0.25, "x_max": 2, "y_min": 0.25, "y_max": 2, "h": 0.03125},
  "shapes": {
    "D1": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.0, "y1": 1.0},
    "D2": {"type": "rectangle", "x0": 0.5, "y0": 0.5, "x1": 1.5, "y1": 1.5}
  },
  "regions": {"left": {"type": "subboundary", "segments": [{"edge": "left"}]}},
  "source": {"form": "separable", "f0": {"preset": "bump", "cx": 1.75, "cy": 1.75, "radius": 0.2},
             "mu": {"piecewise": {"breaks": [0], "pieces": [[0, 1]]}}},
  "time": {"T": 1.0, "nt": 200},
  "experiment": {"first": "D1", "second": "D2", "region": "left", "kind": "conormal", "window": 0.05,
                 "expect": "distinguishable"}
})";

constexpr const char* kCircle = R"({
  "schema": 1,
  "name": "circle-reconstruct",
  "seed": 1,
  "grid": {"x_min": 0, "x_max": 2, "y_min": 0, "y_max": 2, "h": 0.03125},
  "shapes": {"C": {"type": "circle", "cx": 1.1, "cy": 1.1, "r": 0.3}},
  "operators": {"A": {"c": 4, "c0": 4}},
  "regions": {
    "all": {"type": "boundary"},
    "zone": {"type": "zone", "rect": [0.5, 0.5, 1.7, 1.7]}
  },
  "source": {"form": "jump", "m": 0, "breakpoints": [0.05, 0.9, 1.2], "a": [1, 0],
             "f0": {"preset": "collar", "x0": 0.5, "y0": 0.5, "x1": 1.7, "y1": 1.7, "width": 0.2, "value": 10},
             "exclusion": ["zone"]},
  "time": {"T": 1.2, "nt": 120},
  "experiment": {"first": "C", "region": "all", "kind": "conormal"},
  "inverse": {"truth": "C", "modes": 0, "lower": [0.8, 0.8, 0.1], "upper": [1.4, 1.4, 0.4],
              "policy": "windowed", "window": 0.6, "starts": 4, "max_evaluations": 2000,
              "data_initial": {"preset": "fourier", "x_min": 0, "x_max": 2, "y_min": 0, "y_max": 2, "seed": 5}}
})";

const std::map<std::string, const char*>& case_table() {
    static const std::map<std::string, const char*> t{
        {"nested-squares", kNestedSquares},   {"t-affine-source", kTAffine},
        {"bang-bang-Q1", kBangBang},          {"constant-coeff-Q2", kConstantQ2},
        {"robin-cavity", kRobin},             {"neumann-source", kNeumann},
        {"zero-u0-smooth-mu", kZeroU0},       {"circle-reconstruct", kCircle},
    };
    return t;
}

}  // namespace

std::vector<std::string> preset_cases() {
    std::vector<std::string> out;
    for (const auto& [k, v] : case_table()) out.push_back(k);
    return out;
}

std::string canonical_case_name(const std::string& name) {
    if (name == "bang-bang") return "bang-bang-Q1";
    if (name == "constant-coeff") return "constant-coeff-Q2";
    return name;
}

std::string preset_case_text(const std::string& name) {
    const auto& t = case_table();
    auto it = t.find(canonical_case_name(name));
    if (it == t.end()) throw Error(ErrorCode::MissingReference, fmt::format("unknown case '{}'", name));
    return it->second;
}

}  // namespace cavlab
