#include "cavlab/sources.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cavlab/error.hpp"

namespace cavlab {

SourceSpec SourceSpec::bang_bang(SpatialProfile f0, double t0, double t1, double t2) {
    SourceSpec s;
    s.form = SourceForm::Jump;
    s.m = 0;
    s.t0 = t0;
    s.t1 = t1;
    s.t2 = t2;
    s.a1 = 1.0;
    s.a2 = 0.0;
    s.f0 = std::move(f0);
    return s;
}

SourceSpec SourceSpec::separable(SpatialProfile f0, TimeProfile mu) {
    SourceSpec s;
    s.form = SourceForm::Separable;
    s.f0 = std::move(f0);
    s.mu = std::move(mu);
    s.claims_jump = false;
    return s;
}

std::vector<double> SourceSpec::breakpoints() const {
    if (form == SourceForm::Separable) return mu.breakpoints();
    if (ramp_width > 0.0) return {t0, t2};
    return {t0, t1, t2};
}

namespace {

PiecewisePolynomial integrate_times(PiecewisePolynomial p, int m) {
    for (int k = 0; k < m; ++k) p = p.integral();
    return p;
}

std::vector<double> or_zero(const std::vector<double>& c) { return c.empty() ? std::vector<double>{0.0} : c; }

int poly_degree(const std::vector<double>& c) {
    for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j)
        if (c[static_cast<std::size_t>(j)] != 0.0) return j;
    return 0;
}

bool has_remainder(const std::vector<double>& time, const SpatialProfile& space) {
    if (space.is_identically_zero()) return false;
    return std::any_of(time.begin(), time.end(), [](double c) { return c != 0.0; });
}

}  // namespace

void validate_source(SourceSpec& s) {
    s.validated_ = false;
    if (s.form == SourceForm::Separable) {
        s.validated_ = true;
        return;
    }
    if (s.m < 0 || s.m > 6) throw Error(ErrorCode::InvalidSpec, fmt::format("derivative order m = {} outside 0..6", s.m));
    if (!(s.t0 >= 0.0 && s.t0 < s.t1 && s.t1 < s.t2))
        throw Error(ErrorCode::InvalidSpec,
                    fmt::format("breakpoints must satisfy 0 <= t0 < t1 < t2, got {}, {}, {}", s.t0, s.t1, s.t2));
    if (poly_degree(s.r1_time) > 6 || poly_degree(s.r2_time) > 6)
        throw Error(ErrorCode::InvalidSpec, "remainder polynomials are limited to degree 6");
    if (s.ramp_width < 0.0) throw Error(ErrorCode::InvalidSpec, "ramp width must be nonnegative");
    if (s.ramp_width > 0.0) {
        if (s.m != 0) throw Error(ErrorCode::InvalidSpec, "a ramp replaces the switch only for m = 0");
        if (s.claims_jump) throw Error(ErrorCode::InvalidSpec, "a ramped source cannot claim a jump");
        if (s.t1 - 0.5 * s.ramp_width < s.t0 || s.t1 + 0.5 * s.ramp_width > s.t2)
            throw Error(ErrorCode::InvalidSpec, "ramp does not fit between t0 and t2");
    }
    if (s.claims_jump && (s.a1 == s.a2 || s.f0.is_identically_zero()))
        throw Error(ErrorCode::InvalidSpec,
                    fmt::format("claimed jump violates a1 f0 != a2 f0 (a1 = {}, a2 = {}, f0 = {})", s.a1, s.a2,
                                s.f0.name()));
    const std::vector<double> br{s.t0, s.t1, s.t2};
    s.amp_f0_ = integrate_times(PiecewisePolynomial(br, {{s.a1}, {s.a2}, {0.0}}), s.m);
    s.amp_r1_ = integrate_times(PiecewisePolynomial(br, {or_zero(s.r1_time), {0.0}, {0.0}}), s.m);
    s.amp_r2_ = integrate_times(PiecewisePolynomial(br, {{0.0}, or_zero(s.r2_time), {0.0}}), s.m);
    s.validated_ = true;
}

double source_amplitude(const SourceSpec& s, int term, double t, Side side, int order) {
    if (!s.validated_) throw Error(ErrorCode::UnvalidatedSpec, "source spec used before validate_source");
    if (s.form == SourceForm::Separable) {
        if (term != 0) return 0.0;
        if (const auto* p = s.mu.polynomial()) {
            PiecewisePolynomial d = *p;
            for (int k = 0; k < order; ++k) d = d.derivative();
            return d(t, side);
        }
        if (order == 0) return s.mu.value(t, side);
        if (order == 1) return s.mu.derivative(t, side);
        throw Error(ErrorCode::Unsupported, "exponential profile differentiated more than once");
    }
    if (s.ramp_width > 0.0 && term == 0) {
        if (order != 0) throw Error(ErrorCode::Unsupported, "ramped source differentiated in time");
        const bool before = t < s.t0 || (t == s.t0 && side == Side::Left);
        const bool after = t > s.t2 || (t == s.t2 && side == Side::Right);
        if (before || after) return 0.0;
        const double w = s.ramp_width;
        return s.a1 + (s.a2 - s.a1) * smooth_step((t - (s.t1 - 0.5 * w)) / w);
    }
    const PiecewisePolynomial* p = term == 0 ? &s.amp_f0_ : term == 1 ? &s.amp_r1_ : &s.amp_r2_;
    if (order == 0) return (*p)(t, side);
    PiecewisePolynomial d = *p;
    for (int k = 0; k < order; ++k) d = d.derivative();
    return d(t, side);
}

double eval_source_derivative(const SourceSpec& s, double x, double y, double t, int order, Side side) {
    if (!s.validated()) throw Error(ErrorCode::UnvalidatedSpec, "source spec used before validate_source");
    double v = 0.0;
    if (!s.f0.is_identically_zero()) v += s.f0(x, y) * source_amplitude(s, 0, t, side, order);
    if (s.form == SourceForm::Jump) {
        if (!s.r1_space.is_identically_zero()) v += s.r1_space(x, y) * source_amplitude(s, 1, t, side, order);
        if (!s.r2_space.is_identically_zero()) v += s.r2_space(x, y) * source_amplitude(s, 2, t, side, order);
    }
    return v;
}

double eval_source(const SourceSpec& s, double x, double y, double t, Side side) {
    return eval_source_derivative(s, x, y, t, 0, side);
}

SampledSource sample_source(const SourceSpec& spec, const Grid& grid) {
    if (!spec.validated()) throw Error(ErrorCode::UnvalidatedSpec, "source spec used before validate_source");
    SampledSource out;
    out.spec = &spec;
    out.f0 = spec.f0.sample(grid);
    if (spec.form == SourceForm::Jump) {
        if (!spec.r1_space.is_identically_zero()) out.r1 = spec.r1_space.sample(grid);
        if (!spec.r2_space.is_identically_zero()) out.r2 = spec.r2_space.sample(grid);
    }
    return out;
}

void SampledSource::field(double t, Side side, std::span<const int> nodes, std::span<double> out) const {
    const double c0 = source_amplitude(*spec, 0, t, side);
    const double c1 = r1.empty() ? 0.0 : source_amplitude(*spec, 1, t, side);
    const double c2 = r2.empty() ? 0.0 : source_amplitude(*spec, 2, t, side);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto n = static_cast<std::size_t>(nodes[k]);
        double v = c0 * f0[n];
        if (c1 != 0.0) v += c1 * r1[n];
        if (c2 != 0.0) v += c2 * r2[n];
        out[k] = v;
    }
}

bool HypothesisReport::all_pass() const {
    return std::all_of(items.begin(), items.end(), [](const HypothesisItem& i) { return i.pass; });
}

std::optional<bool> HypothesisReport::passed(const std::string& clause) const {
    for (const auto& i : items)
        if (i.clause == clause) return i.pass;
    return std::nullopt;
}

std::string HypothesisReport::text() const {
    std::string out;
    for (const auto& i : items) out += fmt::format("({}) {}: {}\n", i.clause, i.pass ? "pass" : "FAIL", i.detail);
    return out;
}

namespace {

struct VanishCheck {
    int nodes = 0;
    int violations = 0;
};

/// Counts nodes selected by `inside` where any of the given fields is nonzero.
template <class Pred>
VanishCheck vanish_on(const Grid& grid, const std::vector<const std::vector<double>*>& fields, Pred inside) {
    VanishCheck c;
    for (int n = 0; n < grid.size(); ++n) {
        if (!inside(grid.x(grid.i_of(n)), grid.y(grid.j_of(n)))) continue;
        ++c.nodes;
        for (const auto* f : fields) {
            if ((*f)[static_cast<std::size_t>(n)] != 0.0) {
                ++c.violations;
                break;
            }
        }
    }
    return c;
}

}  // namespace

HypothesisReport validate_hypotheses(const SourceSpec& s, const Grid& grid, std::span<const CavityShape> cavities,
                                     std::span<const Region> zones, const Region* omega, double T) {
    HypothesisReport r;
    const bool jump_form = s.form == SourceForm::Jump;

    // (7a)
    {
        HypothesisItem it{"7a", true, ""};
        if (jump_form) {
            const bool order_ok = s.t0 >= 0.0 && s.t0 < s.t1 && s.t1 < s.t2;
            const bool horizon_ok = s.t2 <= T * (1.0 + 1e-12);
            it.pass = s.m >= 0 && order_ok && horizon_ok;
            it.detail = fmt::format("m = {}, breakpoints {} < {} < {} within T = {}{}", s.m, s.t0, s.t1, s.t2, T,
                                    it.pass ? "; d^k f/dt^k square integrable for k <= m by construction"
                                            : horizon_ok ? "; breakpoints out of order" : "; t2 exceeds T");
        } else {
            it.detail = "f = f0(x) mu(t) with m = 0";
        }
        r.items.push_back(it);
    }

    // (7b)
    {
        HypothesisItem it{"7b", false, ""};
        const auto f0v = s.f0.sample(grid);
        const bool f0_nonzero = std::any_of(f0v.begin(), f0v.end(), [](double v) { return v != 0.0; });
        if (jump_form) {
            if (!f0_nonzero)
                it.detail = "f0 vanishes on every node";
            else if (s.a1 == s.a2)
                it.detail = fmt::format("a1 = a2 = {}: a1 f0 = a2 f0, no jump of d^{} f/dt^{} at t1", s.a1, s.m, s.m);
            else if (s.ramp_width > 0.0)
                it.detail = fmt::format("switch at t1 smoothed by a C-infinity ramp of width {}", s.ramp_width);
            else {
                it.pass = true;
                it.detail = fmt::format("d^{} f/dt^{} jumps by ({} - {}) f0 at t1 = {}; remainders polynomial in t",
                                        s.m, s.m, s.a2, s.a1, s.t1);
            }
        } else if (!f0_nonzero) {
            it.detail = "f0 vanishes on every node";
        } else if (const auto* p = s.mu.polynomial()) {
            for (std::size_t k = 0; k < p->breaks().size() && !it.pass; ++k) {
                const double b = p->breaks()[k];
                if (!(b > 0.0 && b < T)) continue;
                if (const auto o = p->discontinuity_order(k)) {
                    it.pass = true;
                    it.detail = fmt::format("piecewise-polynomial mu with a jump of d^{} mu/dt^{} at t = {}", *o, *o, b);
                }
            }
            if (!it.pass) it.detail = "mu is a single polynomial on (0, T): no jump in any derivative";
        } else {
            it.detail = "mu is smooth on (0, T): no jump in any derivative";
        }
        r.items.push_back(it);
    }

    // (7c) and (7d)
    std::vector<std::vector<double>> samples;
    samples.push_back(s.f0.sample(grid));
    if (jump_form && has_remainder(s.r1_time, s.r1_space)) samples.push_back(s.r1_space.sample(grid));
    if (jump_form && has_remainder(s.r2_time, s.r2_space)) samples.push_back(s.r2_space.sample(grid));
    std::vector<const std::vector<double>*> fields;
    for (const auto& v : samples) fields.push_back(&v);

    VanishCheck cav;
    for (const auto& shape : cavities) {
        const auto c = vanish_on(grid, fields, [&](double x, double y) { return contains_closed(shape, x, y); });
        cav.nodes += c.nodes;
        cav.violations += c.violations;
    }
    VanishCheck zone;
    for (const auto& z : zones) {
        const auto c = vanish_on(grid, fields, [&](double x, double y) { return patch_contains(z.patch, x, y); });
        zone.nodes += c.nodes;
        zone.violations += c.violations;
    }
    {
        HypothesisItem it{"7c", cav.violations == 0 && zone.violations == 0, ""};
        it.detail = fmt::format("source terms vanish on {}/{} cavity nodes", cav.nodes - cav.violations, cav.nodes);
        if (!zones.empty()) {
            int inside = 0;
            for (const auto& shape : cavities)
                for (const auto& z : zones)
                    if (inside_zone(z, shape)) {
                        ++inside;
                        break;
                    }
            it.detail += fmt::format(" and {}/{} exclusion-zone nodes; {}/{} cavities inside a zone",
                                     zone.nodes - zone.violations, zone.nodes, inside, cavities.size());
        }
        r.items.push_back(it);
    }
    if (omega != nullptr) {
        const auto c = vanish_on(grid, fields, [&](double x, double y) { return patch_contains(omega->patch, x, y); });
        HypothesisItem it{"7d", cav.violations == 0 && zone.violations == 0 && c.violations == 0, ""};
        it.detail = fmt::format("source terms vanish on {}/{} cavity nodes and {}/{} nodes of {}",
                                cav.nodes - cav.violations, cav.nodes, c.nodes - c.violations, c.nodes, omega->name);
        r.items.push_back(it);
    }
    return r;
}

namespace {

int distance_index(const Grid& g, int i, int j) { return std::min({i, g.nx - 1 - i, j, g.ny - 1 - j}); }

double shape_boundary_distance(const CavityShape& shape, const Grid& g) {
    double d = 1e300;
    for (const auto& p : boundary_samples(shape, 1024))
        d = std::min({d, p.x - g.x_min, g.x_max - p.x, p.y - g.y_min, g.y_max - p.y});
    return d;
}

}  // namespace

SpatialProfile build_lift(const BoundaryInput& g, const Grid& grid, std::span<const CavityShape> cavities) {
    const double w = g.collar_width;
    if (w < 2.0 * grid.h * (1.0 - 1e-12))
        throw Error(ErrorCode::InvalidSpec, fmt::format("collar width {} below 2h = {}", w, 2.0 * grid.h));
    for (const auto& shape : cavities) {
        const double d = shape_boundary_distance(shape, grid);
        if (d < w)
            throw Error(ErrorCode::CollarOverlapsCavity,
                        fmt::format("collar of width {} reaches {} (distance {})", w, describe(shape), d));
    }
    std::vector<double> v(static_cast<std::size_t>(grid.size()), 0.0);
    for (int n = 0; n < grid.size(); ++n) {
        const int i = grid.i_of(n), j = grid.j_of(n);
        const int k = distance_index(grid, i, j);
        const double d = k * grid.h;
        if (d >= w) continue;
        // project onto the nearest edge, keeping grid coordinates so boundary values are exact
        double px = grid.x(i), py = grid.y(j);
        if (k == i)
            px = grid.x(0);
        else if (k == grid.nx - 1 - i)
            px = grid.x(grid.nx - 1);
        else if (k == j)
            py = grid.y(0);
        else
            py = grid.y(grid.ny - 1);
        const double g0 = g.g0(px, py);
        v[static_cast<std::size_t>(n)] = k == 0 ? g0 : g0 * cubic_cutoff(d / w);
    }
    return SpatialProfile::sampled(fmt::format("lift({})", g.g0.name()), grid, std::move(v));
}

namespace {

std::vector<double> discrete_apply(const EllipticOperator& op, const Grid& grid, const std::vector<double>& v) {
    const auto d = assemble(op, rasterize_empty(grid));
    const Eigen::VectorXd av = d.apply_nodes(v);
    std::vector<double> out(static_cast<std::size_t>(grid.size()), 0.0);
    for (int k = 0; k < d.unknowns(); ++k) out[static_cast<std::size_t>(d.unknown_nodes[static_cast<std::size_t>(k)])] = av[k];
    return out;
}

}  // namespace

SourceSpec lifted_source(const BoundaryInput& g, const SpatialProfile& lift, const EllipticOperator& op,
                         const Grid& grid, double T) {
    const auto* p = g.mu.polynomial();
    if (p == nullptr || p->breaks().size() != 2 || p->breaks()[0] > 0.0 || !(p->breaks()[1] > 0.0 && p->breaks()[1] < T) ||
        p->degree() > 1)
        throw Error(ErrorCode::Unsupported, "lifted source needs mu piecewise linear with one kink inside (0, T)");
    const auto& pieces = p->pieces();
    auto coeff = [&](std::size_t k, std::size_t j) { return j < pieces[k].size() ? pieces[k][j] : 0.0; };

    SourceSpec s;
    s.form = SourceForm::Jump;
    s.m = 0;
    s.t0 = 0.0;
    s.t1 = p->breaks()[1];
    s.t2 = T;
    s.a1 = -coeff(0, 1);
    s.a2 = -coeff(1, 1);
    s.f0 = lift;
    const auto alift = SpatialProfile::sampled("A lift", grid, discrete_apply(op, grid, lift.sample(grid)));
    s.r1_time = {-coeff(0, 0), -coeff(0, 1)};
    s.r1_space = alift;
    s.r2_time = {-coeff(1, 0), -coeff(1, 1)};
    s.r2_space = alift;
    s.claims_jump = s.a1 != s.a2;
    s.tag = "LIFTED";
    validate_source(s);
    return s;
}

SourceSpec counterexample_source(const SpatialProfile& f0, const EllipticOperator& op, const Grid& grid,
                                 std::span<const CavityShape> cavities, double T) {
    const auto v = f0.sample(grid);
    std::vector<char> cavity(static_cast<std::size_t>(grid.size()), 0);
    for (int n = 0; n < grid.size(); ++n)
        for (const auto& shape : cavities)
            if (contains_closed(shape, grid.x(grid.i_of(n)), grid.y(grid.j_of(n)))) cavity[static_cast<std::size_t>(n)] = 1;

    for (int n = 0; n < grid.size(); ++n) {
        if (v[static_cast<std::size_t>(n)] == 0.0) continue;
        const int i = grid.i_of(n), j = grid.j_of(n);
        if (distance_index(grid, i, j) < 2)
            throw Error(ErrorCode::SupportTooClose,
                        fmt::format("supp f0 reaches within two nodes of the outer boundary at ({}, {})", grid.x(i),
                                    grid.y(j)));
        for (int dj = -2; dj <= 2; ++dj)
            for (int di = -2; di <= 2; ++di)
                if (cavity[static_cast<std::size_t>(grid.index(i + di, j + dj))])
                    throw Error(ErrorCode::SupportTooClose,
                                fmt::format("supp f0 reaches within two nodes of a cavity at ({}, {})", grid.x(i),
                                            grid.y(j)));
    }

    SourceSpec s;
    s.form = SourceForm::Jump;
    s.m = 0;
    s.t0 = 0.0;
    s.t1 = 0.5 * T;
    s.t2 = T;
    s.a1 = 1.0;
    s.a2 = 1.0;
    s.f0 = f0;
    const auto af0 = SpatialProfile::sampled(fmt::format("A {}", f0.name()), grid, discrete_apply(op, grid, v));
    s.r1_time = {0.0, 1.0};
    s.r1_space = af0;
    s.r2_time = {0.0, 1.0};
    s.r2_space = af0;
    s.claims_jump = false;
    s.tag = "NON_UNIQUENESS_DEMO";
    validate_source(s);
    return s;
}

}  // namespace cavlab
