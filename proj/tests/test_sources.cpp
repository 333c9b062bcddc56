#include "doctest.h"

#include "cavlab/error.hpp"
#include "cavlab/forward.hpp"
#include "cavlab/sources.hpp"
#include "support.hpp"

using namespace cavlab;
using testing::kD1;
using testing::kD2;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidSpec;
}

SpatialProfile bump(double cx, double cy, double r) {
    return preset_profile("bump", {{"cx", cx}, {"cy", cy}, {"radius", r}});
}

SourceSpec bang_bang_source() {
    auto s = SourceSpec::bang_bang(bump(1.75, 1.75, 0.2), 0.05, 0.5, 1.0);
    validate_source(s);
    return s;
}

/// Five-point central difference, exact for polynomials of degree <= 4.
double fd5(auto&& f, double t, double e) {
    return (f(t - 2 * e) - 8 * f(t - e) + 8 * f(t + e) - f(t + 2 * e)) / (12 * e);
}

}  // namespace

TEST_SUITE("sources") {

TEST_CASE("bang-bang source switches off at t1") {
    const auto s = bang_bang_source();
    const double f0 = s.f0(1.75, 1.75);
    CHECK(f0 == doctest::Approx(1.0));
    CHECK(eval_source(s, 1.75, 1.75, 0.01) == 0.0);
    CHECK(eval_source(s, 1.75, 1.75, 0.3) == f0);
    CHECK(eval_source(s, 1.75, 1.75, 0.5, Side::Left) == f0);
    CHECK(eval_source(s, 1.75, 1.75, 0.5, Side::Right) == 0.0);
    CHECK(eval_source(s, 1.75, 1.75, 0.9) == 0.0);
    CHECK(eval_source(s, 1.0, 1.0, 0.3) == 0.0);
    CHECK(s.breakpoints() == std::vector<double>{0.05, 0.5, 1.0});
}

TEST_CASE("unvalidated or inconsistent specs are rejected") {
    auto s = SourceSpec::bang_bang(bump(1.75, 1.75, 0.2), 0.05, 0.5, 1.0);
    CHECK(code_of([&] { eval_source(s, 1, 1, 0.3); }) == ErrorCode::UnvalidatedSpec);
    s.a2 = s.a1;
    CHECK(code_of([&] { validate_source(s); }) == ErrorCode::InvalidSpec);
    s.claims_jump = false;
    CHECK_NOTHROW(validate_source(s));
    auto bad = SourceSpec::bang_bang(bump(1.75, 1.75, 0.2), 0.5, 0.2, 1.0);
    CHECK(code_of([&] { validate_source(bad); }) == ErrorCode::InvalidSpec);
    auto ramp = SourceSpec::bang_bang(bump(1.75, 1.75, 0.2), 0.05, 0.5, 1.0);
    ramp.ramp_width = 0.1;
    CHECK(code_of([&] { validate_source(ramp); }) == ErrorCode::InvalidSpec);
    ramp.claims_jump = false;
    CHECK_NOTHROW(validate_source(ramp));
}

TEST_CASE("m = 1 integrates the declared slopes") {
    SourceSpec s;
    s.m = 1;
    s.t0 = 0.1;
    s.t1 = 0.4;
    s.t2 = 0.8;
    s.a1 = 2.0;
    s.a2 = -1.0;
    s.f0 = SpatialProfile::constant(1.0);
    validate_source(s);
    CHECK(eval_source(s, 1, 1, 0.05) == 0.0);
    CHECK(eval_source(s, 1, 1, 0.3) == doctest::Approx(0.4));
    CHECK(eval_source(s, 1, 1, 0.4) == doctest::Approx(0.6));
    CHECK(eval_source(s, 1, 1, 0.6) == doctest::Approx(0.4));
    CHECK(eval_source(s, 1, 1, 0.9) == doctest::Approx(0.2));
    CHECK(eval_source_derivative(s, 1, 1, 0.4, 1, Side::Left) == doctest::Approx(2.0));
    CHECK(eval_source_derivative(s, 1, 1, 0.4, 1, Side::Right) == doctest::Approx(-1.0));
}

TEST_CASE("integrated source differentiates back to its declaration") {
    testing::Draw d(21);
    const SpatialProfile f0 = SpatialProfile::constant(1.0);
    for (int trial = 0; trial < 40; ++trial) {
        SourceSpec s;
        s.m = d.integer(0, 3);
        s.t0 = d.uniform(0.0, 0.2);
        s.t1 = s.t0 + d.uniform(0.2, 0.5);
        s.t2 = s.t1 + d.uniform(0.2, 0.5);
        s.a1 = d.uniform(-2, 2);
        s.a2 = s.a1 + d.uniform(0.5, 1.5);
        s.f0 = f0;
        s.r1_time = {d.uniform(-1, 1), d.uniform(-1, 1)};
        s.r1_space = SpatialProfile::constant(0.5);
        s.r2_time = {d.uniform(-1, 1), d.uniform(-1, 1)};
        s.r2_space = SpatialProfile::constant(-0.25);
        validate_source(s);

        auto declared = [&](double t) {
            if (t > s.t0 && t < s.t1) return s.a1 + 0.5 * (s.r1_time[0] + s.r1_time[1] * t);
            if (t > s.t1 && t < s.t2) return s.a2 - 0.25 * (s.r2_time[0] + s.r2_time[1] * t);
            return 0.0;
        };
        const double e = 1e-2;
        for (int k = 0; k < 6; ++k) {
            const int piece = k % 3;
            const double lo = piece == 0 ? s.t0 : piece == 1 ? s.t1 : s.t2;
            const double hi = piece == 0 ? s.t1 : piece == 1 ? s.t2 : s.t2 + 0.5;
            const double t = d.uniform(lo + 3 * e, hi - 3 * e);
            CHECK(eval_source_derivative(s, 1, 1, t, s.m) == doctest::Approx(declared(t)).epsilon(1e-12));
            for (int order = 0; order < s.m; ++order) {
                const double fd = fd5([&](double tt) { return eval_source_derivative(s, 1, 1, tt, order); }, t, e);
                const double exact = eval_source_derivative(s, 1, 1, t, order + 1);
                CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
            }
        }
        // derivatives below m are continuous across the breakpoints
        for (double b : {s.t1, s.t2})
            for (int order = 0; order < s.m; ++order)
                CHECK(eval_source_derivative(s, 1, 1, b, order, Side::Left) ==
                      doctest::Approx(eval_source_derivative(s, 1, 1, b, order, Side::Right)).epsilon(1e-12));
    }
}

TEST_CASE("jump of the m-th derivative at t1 is (a2 - a1) f0") {
    for (int m = 0; m <= 3; ++m) {
        SourceSpec s;
        s.m = m;
        s.t0 = 0.0;
        s.t1 = 0.3;
        s.t2 = 0.7;
        s.a1 = 1.5;
        s.a2 = -0.5;
        s.f0 = bump(1.75, 1.75, 0.2);
        validate_source(s);
        const double f0 = s.f0(1.7, 1.8);
        const double jump = eval_source_derivative(s, 1.7, 1.8, 0.3, m, Side::Right) -
                            eval_source_derivative(s, 1.7, 1.8, 0.3, m, Side::Left);
        CHECK(jump == doctest::Approx((s.a2 - s.a1) * f0));
    }
}

TEST_CASE("lift matches the boundary data and decays across the collar") {
    const Grid g = testing::squares_grid(1.0 / 32);
    const std::vector<CavityShape> cav{kD1};
    BoundaryInput b{preset_profile("sinsin", {}), TimeProfile::constant(1.0), 6 * g.h};
    const auto lift = build_lift(b, g, cav).sample(g);
    for (int n = 0; n < g.size(); ++n) {
        const int i = g.i_of(n), j = g.j_of(n);
        const double x = g.x(i), y = g.y(j);
        if (g.on_edge(i, j)) CHECK(lift[static_cast<std::size_t>(n)] == b.g0(x, y));
        if (contains_closed(kD1, x, y)) CHECK(lift[static_cast<std::size_t>(n)] == 0.0);
    }

    BoundaryInput one{SpatialProfile::constant(1.0), TimeProfile::constant(1.0), 8 * g.h};
    const auto l1 = build_lift(one, g, cav).sample(g);
    CHECK(l1[static_cast<std::size_t>(g.index(4, 14))] == doctest::Approx(0.5));
    CHECK(l1[static_cast<std::size_t>(g.index(8, 14))] == 0.0);

    one.collar_width = 1.5 * g.h;
    CHECK(code_of([&] { build_lift(one, g, cav); }) == ErrorCode::InvalidSpec);
    one.collar_width = 0.3;
    CHECK(code_of([&] { build_lift(one, g, cav); }) == ErrorCode::CollarOverlapsCavity);
}

TEST_CASE("lifted problem reproduces the direct Dirichlet solve") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const std::vector<CavityShape> cav{kD1};
    const auto cls = rasterize(kD1, g);
    const auto op = EllipticOperator::laplacian(1.0);
    const double T = 1.0;
    BoundaryInput b{preset_profile("sinsin", {}), TimeProfile(PiecewisePolynomial({0.0, 0.5}, {{0.0, 1.0}, {1.0, -1.0}})),
                    4 * g.h};
    const auto lift = build_lift(b, g, cav);
    const auto lsrc = lifted_source(b, lift, op, g, T);
    const TimeGrid tg{T, 20, Scheme::CrankNicolson, 1, 0};

    ForwardInputs direct;
    direct.dirichlet = &b;
    const auto u = solve(cls, op, direct, tg);
    ForwardInputs lifted;
    lifted.source = &lsrc;
    const auto v = solve(cls, op, lifted, tg);

    const auto gl = lift.sample(g);
    double worst = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        const double mu = b.mu.value(u.times[n]);
        for (std::size_t k = 0; k < gl.size(); ++k) {
            const double back = v.snapshots[n][k] + (cls.is_cavity(static_cast<int>(k)) ? 0.0 : mu * gl[k]);
            worst = std::max(worst, std::abs(back - u.snapshots[n][k]));
            scale = std::max(scale, std::abs(u.snapshots[n][k]));
        }
    }
    CHECK(scale > 0.1);
    CHECK(worst <= 1e-10 * scale);
}

TEST_CASE("counterexample source is f0 + t A_h f0") {
    const Grid g = testing::squares_grid(1.0 / 32);
    const std::vector<CavityShape> cav{kD1, kD2};
    const auto op = EllipticOperator::laplacian(1.0);
    const auto f0 = bump(1.75, 1.1, 0.15);
    const auto s = counterexample_source(f0, op, g, cav, 2.0);
    CHECK(s.tag == "NON_UNIQUENESS_DEMO");
    const auto v = f0.sample(g);
    const double h2 = g.h * g.h;
    for (int j = 2; j < g.ny - 2; ++j)
        for (int i = 2; i < g.nx - 2; ++i) {
            const double x = g.x(i), y = g.y(j);
            auto at = [&](int a, int b) { return v[static_cast<std::size_t>(g.index(a, b))]; };
            const double af0 =
                -(at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4 * at(i, j)) / h2 + at(i, j);
            CHECK(eval_source(s, x, y, 0.0) == doctest::Approx(at(i, j)));
            CHECK(eval_source(s, x, y, 1.0, Side::Left) == doctest::Approx(at(i, j) + af0).epsilon(1e-12));
            CHECK(eval_source(s, x, y, 1.5) == doctest::Approx(at(i, j) + 1.5 * af0).epsilon(1e-12));
        }
    CHECK(code_of([&] { counterexample_source(bump(1.9, 1.1, 0.1), op, g, cav, 1.0); }) ==
          ErrorCode::SupportTooClose);
    CHECK(code_of([&] { counterexample_source(bump(1.7, 0.9, 0.15), op, g, cav, 1.0); }) ==
          ErrorCode::SupportTooClose);
}

TEST_CASE("hypothesis report itemises each clause") {
    const Grid g = testing::squares_grid(1.0 / 32);
    const std::vector<CavityShape> cav{kD1, kD2};
    const std::vector<Region> zones{Region::zone("zone", RectPatch{0.4, 0.4, 1.6, 1.6})};
    const auto omega = Region::interior("omega", RectPatch{1.6, 0.4, 1.9, 0.7});

    const auto ok = validate_hypotheses(bang_bang_source(), g, cav, zones, &omega, 1.0);
    CHECK(ok.all_pass());
    CHECK(ok.passed("7d") == true);
    CHECK(ok.text().find("(7b) pass") != std::string::npos);

    auto everywhere = SourceSpec::bang_bang(SpatialProfile::constant(1.0), 0.05, 0.5, 1.0);
    validate_source(everywhere);
    const auto c = validate_hypotheses(everywhere, g, cav, zones, nullptr, 1.0);
    CHECK(c.passed("7c") == false);
    CHECK(c.passed("7b") == true);
    CHECK_FALSE(c.passed("7d").has_value());

    auto flat = bang_bang_source();
    flat.a2 = flat.a1;
    flat.claims_jump = false;
    validate_source(flat);
    CHECK(validate_hypotheses(flat, g, cav, zones, nullptr, 1.0).passed("7b") == false);

    CHECK(validate_hypotheses(bang_bang_source(), g, cav, zones, nullptr, 0.8).passed("7a") == false);

    const auto near = Region::interior("near", RectPatch{1.6, 1.6, 1.9, 1.9});
    CHECK(validate_hypotheses(bang_bang_source(), g, cav, zones, &near, 1.0).passed("7d") == false);

    auto smooth = SourceSpec::separable(bump(1.75, 1.75, 0.2), TimeProfile::constant(1.0));
    validate_source(smooth);
    CHECK(validate_hypotheses(smooth, g, cav, zones, nullptr, 1.0).passed("7b") == false);
    auto kinked = SourceSpec::separable(bump(1.75, 1.75, 0.2), TimeProfile(PiecewisePolynomial({0.0}, {{0.0, 1.0}})));
    validate_source(kinked);
    CHECK(validate_hypotheses(kinked, g, cav, zones, nullptr, 1.0).passed("7b") == false);
    auto broken = SourceSpec::separable(bump(1.75, 1.75, 0.2),
                                        TimeProfile(PiecewisePolynomial({0.0, 0.5}, {{0.0, 1.0}, {0.5}})));
    validate_source(broken);
    CHECK(validate_hypotheses(broken, g, cav, zones, nullptr, 1.0).passed("7b") == true);
}

TEST_CASE("piecewise polynomials and cutoffs") {
    const PiecewisePolynomial p({0.0, 1.0}, {{0.0, 2.0}, {2.0}});
    CHECK(p(-0.5) == 0.0);
    CHECK(p(0.5) == doctest::Approx(1.0));
    CHECK(p(1.0, Side::Left) == doctest::Approx(2.0));
    CHECK(p(3.0) == doctest::Approx(2.0));
    CHECK(p.jump(0, 1) == doctest::Approx(0.0));
    CHECK(p.jump(1, 1) == doctest::Approx(-2.0));
    CHECK(p.discontinuity_order(1) == 1);
    const auto ip = p.integral();
    CHECK(ip(1.0) == doctest::Approx(1.0));
    CHECK(ip(2.0) == doctest::Approx(3.0));
    CHECK(ip.derivative()(0.5) == doctest::Approx(p(0.5)));
    CHECK(code_of([] { PiecewisePolynomial({1.0, 0.5}, {{1.0}, {1.0}}); }) == ErrorCode::InvalidSpec);

    CHECK(cubic_cutoff(0.0) == 1.0);
    CHECK(cubic_cutoff(0.5) == doctest::Approx(0.5));
    CHECK(cubic_cutoff(1.0) == 0.0);
    CHECK(smooth_step(-1.0) == 0.0);
    CHECK(smooth_step(2.0) == 1.0);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5));
    double last = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double v = smooth_step(k / 100.0);
        CHECK(v >= last);
        last = v;
    }

    const auto b = bump(1.0, 1.0, 0.2);
    CHECK(b(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(b(1.2, 1.0) == 0.0);
    const auto f = preset_profile("fourier", {{"x_min", 0.25}, {"x_max", 2}, {"y_min", 0.25}, {"y_max", 2}});
    CHECK(std::abs(f(0.25, 1.1)) < 1e-14);
    CHECK(std::abs(f(1.1, 2.0)) < 1e-14);
    CHECK(std::abs(f(1.1, 1.3)) > 0.0);
    CHECK(code_of([] { preset_profile("nope", {}); }) == ErrorCode::ConfigParse);
    CHECK(SpatialProfile::zero().is_identically_zero());
    CHECK(SpatialProfile::constant(2.0).constant_value() == 2.0);
}

}  // TEST_SUITE
