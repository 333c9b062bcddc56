#include "doctest.h"

#include "cavlab/error.hpp"
#include "cavlab/forward.hpp"
#include "support.hpp"

using namespace cavlab;
using testing::kD1;

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

SpatialProfile fourier_u0(std::uint64_t seed) {
    return preset_profile("fourier", {{"x_min", 0.25}, {"x_max", 2}, {"y_min", 0.25}, {"y_max", 2},
                                      {"seed", static_cast<double>(seed)}});
}

double l2_nodes(const std::vector<double>& v) { return testing::l2(v); }

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("zero data give the zero field") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto f = solve(rasterize(kD1, g), EllipticOperator::laplacian(), {}, {0.5, 20, Scheme::CrankNicolson, 5, 0});
    CHECK(f.size() == 5);
    CHECK(f.times.back() == doctest::Approx(0.5));
    for (const auto& s : f.snapshots) CHECK(testing::max_abs(s) == 0.0);
}

TEST_CASE("Crank-Nicolson reproduces a separable exact solution") {
    const Grid g = Grid::make(0, 1, 0, 1, 1.0 / 32);
    const auto cls = rasterize_empty(g);
    const auto u0 = initial_field(preset_profile("sinsin", {{"kx", 0.5}, {"ky", 0.5}}), cls);
    ForwardInputs in;
    in.u0 = u0;
    const double T = 0.1;
    const int nt = 100;
    const auto f = solve(cls, EllipticOperator::laplacian(), in, {T, nt, Scheme::CrankNicolson, 1, 0});

    // discrete eigenpair: lambda_h = (8/h^2) sin^2(pi h / 2)
    const double s = std::sin(testing::pi * g.h / 2);
    const double lh = 8.0 / (g.h * g.h) * s * s;
    const double dt = T / nt;
    const double amp = std::pow((1 - 0.5 * lh * dt) / (1 + 0.5 * lh * dt), nt);
    const double cont = std::exp(-2 * testing::pi * testing::pi * T);
    double disc_err = 0.0, cont_err = 0.0;
    for (std::size_t k = 0; k < u0.size(); ++k) {
        disc_err = std::max(disc_err, std::abs(f.snapshots.back()[k] - amp * u0[k]));
        cont_err = std::max(cont_err, std::abs(f.snapshots.back()[k] - cont * u0[k]));
    }
    CHECK(disc_err < 1e-10);
    // O(h^2 + dt^2) against the continuous solution
    CHECK(cont_err < 2 * (g.h * g.h + dt * dt) * cont * 2 * testing::pi * testing::pi);
}

TEST_CASE("a short burst grows like t f0") {
    const Grid g = testing::squares_grid(1.0 / 32);
    const auto cls = rasterize(kD1, g);
    auto src = SourceSpec::bang_bang(bump(1.5, 1.75, 0.2), 0.0, 0.00025, 0.0005);
    src.a2 = 1.0;
    src.claims_jump = false;
    validate_source(src);
    ForwardInputs in;
    in.source = &src;
    const double T = 0.0005;
    const auto f = solve(cls, EllipticOperator::laplacian(), in, {T, 10, Scheme::CrankNicolson, 1, 0});
    const auto f0 = src.f0.sample(g);
    // u = t f0 - t^2/2 A f0 + O(t^3)
    double lap = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            auto at = [&](int a, int b) { return f0[static_cast<std::size_t>(g.index(a, b))]; };
            lap = std::max(lap, std::abs(at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4 * at(i, j)) /
                                    (g.h * g.h));
        }
    double worst = 0.0;
    for (std::size_t k = 0; k < f0.size(); ++k) worst = std::max(worst, std::abs(f.snapshots.back()[k] - T * f0[k]));
    CHECK(worst > 0.0);
    CHECK(worst <= 0.5 * T * T * lap * 1.05);
}

TEST_CASE("Neumann closure: zero flux keeps zero, steady state is reached") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto cls = rasterize(kD1, g);
    const auto op = EllipticOperator::laplacian(1.0);
    const auto zero = neumann_source_solve(cls, op, NeumannInput::uniform(SpatialProfile::zero()), {},
                                           {1.0, 10, Scheme::CrankNicolson, 5, 0});
    for (const auto& s : zero.snapshots) CHECK(testing::max_abs(s) == 0.0);

    const auto flux = NeumannInput::uniform(SpatialProfile::constant(1.0));
    const auto f = neumann_source_solve(cls, op, flux, {}, {20.0, 200, Scheme::ImplicitEuler, 200, 0});
    ForwardInputs st;
    st.modes.outer = OuterBc::Neumann;
    st.neumann = &flux;
    const auto steady = steady_solve(cls, op, st, 20.0);
    CHECK(testing::max_abs(steady) > 0.1);
    CHECK(testing::max_abs_diff(f.snapshots.back(), steady) < 1e-6);
}

TEST_CASE("Neumann manufactured solution converges at second order") {
    // u = exp(-t) cos(pi x): outward flux pi sin(pi/4) exp(-t) on the left edge, zero elsewhere
    const double pi = testing::pi, T = 0.25;
    auto f0 = SpatialProfile::closed("mms", [pi](double x, double) { return (pi * pi - 1) * std::cos(pi * x); });
    const TimeProfile decay(TimeProfile::Exponential{1.0, -1.0});
    auto src = SourceSpec::separable(f0, decay);
    validate_source(src);
    NeumannInput flux;
    flux.flux[static_cast<std::size_t>(Edge::Left)] = SpatialProfile::constant(pi * std::sin(pi / 4));
    flux.mu = decay;
    const auto exact = SpatialProfile::closed("u", [pi](double x, double) { return std::cos(pi * x); });

    std::vector<double> err;
    for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const Grid g = testing::squares_grid(h);
        const auto cls = rasterize_empty(g);
        ForwardInputs in;
        in.source = &src;
        in.u0 = exact.sample(g);
        const int nt = static_cast<int>(std::lround(4 * T / h));
        const auto f = neumann_source_solve(cls, EllipticOperator::laplacian(), flux, in,
                                            {T, nt, Scheme::CrankNicolson, nt, 0});
        const auto ref = exact.sample(g);
        double e = 0.0;
        for (std::size_t k = 0; k < ref.size(); ++k)
            e = std::max(e, std::abs(f.snapshots.back()[k] - std::exp(-T) * ref[k]));
        err.push_back(e);
    }
    MESSAGE("Neumann MMS errors " << err[0] << " " << err[1] << " " << err[2]);
    CHECK(testing::order(err[0], err[1]) >= 1.8);
    CHECK(testing::order(err[1], err[2]) >= 1.8);
}

TEST_CASE("implicit Euler dissipates energy at rate c0") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto cls = rasterize(kD1, g);
    auto op = EllipticOperator::constant(1, 0.2, 1.5, 0.5, -0.3, 2.0);
    op.c0 = 2.0;
    ForwardInputs in;
    in.u0 = initial_field(fourier_u0(4), cls);
    const double T = 0.5;
    const int nt = 50;
    const auto f = solve(cls, op, in, {T, nt, Scheme::ImplicitEuler, 1, 0});
    const double dt = T / nt;
    const double e0 = l2_nodes(f.snapshots.front());
    for (std::size_t n = 1; n < f.size(); ++n) {
        CHECK(l2_nodes(f.snapshots[n]) <= l2_nodes(f.snapshots[n - 1]) * (1 + 1e-12));
        CHECK(l2_nodes(f.snapshots[n]) <= e0 * std::pow(1 + op.c0 * dt, -static_cast<double>(n)) * (1 + 1e-12));
    }
}

TEST_CASE("solves are bitwise deterministic") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto cls = rasterize(kD1, g);
    auto src = SourceSpec::bang_bang(bump(1.75, 1.75, 0.2), 0.05, 0.5, 1.0);
    validate_source(src);
    ForwardInputs in;
    in.source = &src;
    in.u0 = initial_field(fourier_u0(1), cls);
    const TimeGrid tg{1.0, 40, Scheme::CrankNicolson, 4, 0};
    const auto a = solve(cls, EllipticOperator::laplacian(), in, tg);
    const auto b = solve(cls, EllipticOperator::laplacian(), in, tg);
    CHECK(a.snapshots == b.snapshots);
}

TEST_CASE("a source switch at t1 shows up as a kink in u") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto cls = rasterize(kD1, g);
    auto src = SourceSpec::bang_bang(bump(1.75, 1.75, 0.3), 0.0, 0.5, 1.0);
    validate_source(src);
    ForwardInputs in;
    in.source = &src;
    const double T = 1.0;
    const int nt = 400;
    const auto f = solve(cls, EllipticOperator::laplacian(), in, {T, nt, Scheme::CrankNicolson, 1, 0});
    const auto node = static_cast<std::size_t>(*g.node_at(1.75, 1.75));
    const std::size_t n1 = 200;
    const double dt = T / nt;
    const double before = (f.snapshots[n1][node] - f.snapshots[n1 - 1][node]) / dt;
    const double after = (f.snapshots[n1 + 1][node] - f.snapshots[n1][node]) / dt;
    CHECK(before - after == doctest::Approx(src.f0(1.75, 1.75)).epsilon(0.1));
}

TEST_CASE("breakpoints off the time grid are rejected") {
    const Grid g = testing::squares_grid(1.0 / 16);
    auto src = SourceSpec::bang_bang(bump(1.75, 1.75, 0.3), 0.0, 0.5, 1.0);
    validate_source(src);
    ForwardInputs in;
    in.source = &src;
    CHECK(code_of([&] { solve(rasterize(kD1, g), EllipticOperator::laplacian(), in, {1.0, 3, Scheme::ImplicitEuler, 1, 0}); }) ==
          ErrorCode::BreakpointMisaligned);
}

TEST_CASE("boundary data are imposed exactly") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto cls = rasterize(kD1, g);
    BoundaryInput b{preset_profile("sinsin", {}), TimeProfile(TimeProfile::Exponential{1.0, -3.0}), 0.0};
    ForwardInputs in;
    in.dirichlet = &b;
    const auto f = solve(cls, EllipticOperator::laplacian(), in, {0.5, 20, Scheme::CrankNicolson, 2, 0});
    for (std::size_t n = 0; n < f.size(); ++n)
        for (int k = 0; k < g.size(); ++k) {
            if (cls.label(k) == NodeLabel::OuterBoundary) {
                const double want = b.g0(g.x(g.i_of(k)), g.y(g.j_of(k))) * b.mu.value(f.times[n]);
                CHECK(std::abs(f.snapshots[n][static_cast<std::size_t>(k)] - want) <= 1e-13);
            }
            if (cls.is_cavity(k)) CHECK(f.snapshots[n][static_cast<std::size_t>(k)] == 0.0);
        }
}

TEST_CASE("Robin cavity with m = 0 preserves a constant state") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto cls = rasterize(kD1, g);
    BoundaryInput b{SpatialProfile::constant(1.0), TimeProfile::constant(1.0), 0.0};
    ForwardInputs in;
    in.dirichlet = &b;
    in.modes.cavity = CavityBc::Robin;
    in.modes.robin_m = SpatialProfile::zero();
    in.u0 = std::vector<double>(static_cast<std::size_t>(g.size()), 1.0);
    const auto f = solve(cls, EllipticOperator::laplacian(), in, {1.0, 20, Scheme::CrankNicolson, 20, 0});
    for (int k : cls.fluid_nodes) CHECK(f.snapshots.back()[static_cast<std::size_t>(k)] == doctest::Approx(1.0).epsilon(1e-12));

    // with m > 0 the cavity absorbs and the interior drops below the boundary value
    in.modes.robin_m = SpatialProfile::constant(1.0);
    const auto r = solve(cls, EllipticOperator::laplacian(), in, {1.0, 20, Scheme::ImplicitEuler, 20, 0});
    const double near = r.snapshots.back()[static_cast<std::size_t>(*g.node_at(1.0625, 0.75))];
    CHECK(near < 1.0);
    CHECK(near > 0.0);
}

}  // TEST_SUITE
