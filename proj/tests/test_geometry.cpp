#include "doctest.h"

#include <queue>
#include <set>

#include "cavlab/error.hpp"
#include "cavlab/geometry.hpp"
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

std::set<int> interior_set(const NodeClassification& cls) {
    const auto v = cls.nodes_with(NodeLabel::CavityInterior);
    return {v.begin(), v.end()};
}

bool fluid_connected(const NodeClassification& cls) {
    const Grid& g = cls.grid;
    std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
    std::queue<int> q;
    q.push(cls.fluid_nodes.front());
    seen[static_cast<std::size_t>(cls.fluid_nodes.front())] = 1;
    std::size_t reached = 0;
    while (!q.empty()) {
        const int n = q.front();
        q.pop();
        ++reached;
        const int i = g.i_of(n), j = g.j_of(n);
        for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            if (!g.in_range(i + di, j + dj)) continue;
            const int m = g.index(i + di, j + dj);
            if (seen[static_cast<std::size_t>(m)] || cls.label(m) != NodeLabel::Fluid) continue;
            seen[static_cast<std::size_t>(m)] = 1;
            q.push(m);
        }
    }
    return reached == cls.fluid_nodes.size();
}

StarShape random_star(testing::Draw& d, int modes) {
    StarShape s{d.uniform(0.9, 1.3), d.uniform(0.9, 1.3), d.uniform(0.2, 0.4), {}, {}};
    for (int k = 0; k < modes; ++k) {
        s.a.push_back(d.uniform(-0.04, 0.04));
        s.b.push_back(d.uniform(-0.04, 0.04));
    }
    return s;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("grid sizes follow the spacing") {
    const Grid g = testing::squares_grid(1.0 / 16);
    CHECK(g.nx == 29);
    CHECK(g.ny == 29);
    CHECK(g.x(28) == doctest::Approx(2.0));
    CHECK(code_of([] { Grid::make(0, 1, 0, 1, 0.3); }) == ErrorCode::BadGrid);
    CHECK(code_of([] { Grid::make(0, 1, 0, 1, -0.1); }) == ErrorCode::BadGrid);
}

TEST_CASE("unit square cavity has a 7x7 interior lattice at h = 1/16") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto cls = rasterize(kD1, g);
    CHECK(cls.count(NodeLabel::CavityInterior) == 49);
    // the 9x9 closed lattice minus its interior
    CHECK(cls.count(NodeLabel::CavityBoundary) == 32);
    CHECK(cls.count(NodeLabel::OuterBoundary) == 4 * 28);
}

TEST_CASE("degenerate star is an empty cavity") {
    const Grid g = testing::squares_grid(1.0 / 16);
    CHECK(code_of([&] { rasterize(StarShape{1.1, 1.1, 0.0, {}, {}}, g); }) == ErrorCode::EmptyCavity);
    CHECK(code_of([&] { rasterize(StarShape{1.1, 1.1, 0.1, {0.2}, {0.0}}, g); }) == ErrorCode::NegativeRadius);
}

TEST_CASE("nested squares give nested interiors") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto a = interior_set(rasterize(kD1, g));
    const auto b = interior_set(rasterize(kD2, g));
    CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    CHECK(b.size() > a.size());
}

TEST_CASE("clearance of two cells is enforced") {
    const Grid g = testing::squares_grid(1.0 / 16);
    CHECK(code_of([&] { rasterize(AxisRectangle{0.3, 0.5, 1.0, 1.0}, g); }) == ErrorCode::ClearanceViolation);
    CHECK_NOTHROW(rasterize(AxisRectangle{0.375, 0.5, 1.0, 1.0}, g));
    CHECK(code_of([&] { rasterize(StarShape{1.8, 1.1, 0.15, {}, {}}, g); }) == ErrorCode::ClearanceViolation);
}

TEST_CASE("labels are consistent for random star shapes") {
    testing::Draw d(11);
    const Grid g = Grid::make(0, 2, 0, 2, 1.0 / 32);
    for (int trial = 0; trial < 25; ++trial) {
        const auto s = random_star(d, trial % 4);
        const auto cls = rasterize(s, g);
        CHECK(fluid_connected(cls));
        for (int n = 0; n < g.size(); ++n) {
            const int i = g.i_of(n), j = g.j_of(n);
            CHECK((cls.label(n) == NodeLabel::OuterBoundary) == g.on_edge(i, j));
            if (cls.label(n) != NodeLabel::CavityBoundary) continue;
            const bool has_fluid = cls.label(i + 1, j) == NodeLabel::Fluid || cls.label(i - 1, j) == NodeLabel::Fluid ||
                                   cls.label(i, j + 1) == NodeLabel::Fluid || cls.label(i, j - 1) == NodeLabel::Fluid;
            CHECK(has_fluid);
        }
    }
}

TEST_CASE("rasterisation is monotone under inclusion") {
    testing::Draw d(12);
    const Grid g = Grid::make(0, 2, 0, 2, 1.0 / 32);
    for (int trial = 0; trial < 25; ++trial) {
        const double cx = d.uniform(0.9, 1.1), cy = d.uniform(0.9, 1.1);
        const double r = d.uniform(0.15, 0.3), grow = d.uniform(0.0, 0.2);
        // a circle inside a larger concentric circle, and a square inside its circumcircle
        const StarShape inner{cx, cy, r, {}, {}}, outer{cx, cy, r + grow, {}, {}};
        const AxisRectangle sq{cx - r / std::sqrt(2.0), cy - r / std::sqrt(2.0), cx + r / std::sqrt(2.0),
                               cy + r / std::sqrt(2.0)};
        const auto a = interior_set(rasterize(inner, g));
        const auto b = interior_set(rasterize(outer, g));
        const auto c = interior_set(rasterize(sq, g));
        CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        CHECK(std::includes(a.begin(), a.end(), c.begin(), c.end()));
    }
}

TEST_CASE("refinement keeps strictly interior node centres inside") {
    testing::Draw d(13);
    const Grid g = Grid::make(0, 2, 0, 2, 1.0 / 16);
    const Grid f = Grid::make(0, 2, 0, 2, 1.0 / 32);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = random_star(d, 2);
        const auto coarse = rasterize(s, g);
        const auto fine = rasterize(s, f);
        for (int n : coarse.nodes_with(NodeLabel::CavityInterior)) {
            const auto m = f.node_at(g.x(g.i_of(n)), g.y(g.j_of(n)));
            REQUIRE(m.has_value());
            CHECK(fine.is_cavity(*m));
            CHECK(contains_strict(s, g.x(g.i_of(n)), g.y(g.j_of(n))));
        }
    }
}

TEST_CASE("star parameters map to radii") {
    const auto meta = ShapeParameterization::unbounded(0);
    const std::vector<double> circle{1.1, 1.1, 0.3};
    const auto c = shape_from_params(circle, meta);
    CHECK_FALSE(c.clamped);
    CHECK(c.shape.radius(0.7) == doctest::Approx(0.3));
    CHECK(c.shape.modes() == 0);

    const std::vector<double> one{1.1, 1.1, 0.3, 0.05, 0.0};
    const auto s = shape_from_params(one, ShapeParameterization::unbounded(1));
    CHECK(s.shape.radius(0.0) == doctest::Approx(0.35));
    CHECK(s.shape.radius(testing::pi) == doctest::Approx(0.25));

    const std::vector<double> negative{1.1, 1.1, -0.1};
    const auto n = shape_from_params(negative, meta);
    CHECK(n.clamped);
    CHECK(n.shape.rho0 == doctest::Approx(meta.min_radius));

    CHECK(code_of([&] { shape_from_params(one, meta); }) == ErrorCode::BadArity);
    CHECK(params_from_shape(s.shape) == one);
}

TEST_CASE("regions select boundary and interior nodes") {
    const Grid g = testing::squares_grid(1.0 / 16);
    const auto left = gamma_nodes(Region::subboundary("left", {{Edge::Left}}), g);
    CHECK(left.size() == 27);  // corners excluded
    for (std::size_t k = 1; k < left.size(); ++k) CHECK(left[k - 1].node < left[k].node);
    const auto part = gamma_nodes(Region::subboundary("part", {{Edge::Bottom, 1.0, 1.5}}), g);
    CHECK(part.size() == 9);
    CHECK(gamma_nodes(Region::full_boundary("all"), g).size() == 4 * 27);
    CHECK(code_of([&] { gamma_nodes(Region::subboundary("none", {{Edge::Top, 5.0, 6.0}}), g); }) ==
          ErrorCode::EmptyGamma);

    const auto cls = rasterize(kD1, g);
    const auto omega = Region::interior("omega", RectPatch{1.5, 1.5, 1.75, 1.75});
    CHECK(patch_nodes(omega, cls).size() == 25);
    CHECK(disjoint(omega, kD1, g));
    CHECK_FALSE(disjoint(omega, kD2, g));  // shares the corner (1.5, 1.5)
    CHECK(disjoint(Region::interior("o", RectPatch{1.6, 1.6, 1.85, 1.85}), kD2, g));
    CHECK_FALSE(disjoint(Region::interior("o", DiscPatch{1.0, 1.0, 0.2}), kD1, g));
    CHECK(inside_zone(Region::zone("z", RectPatch{0.4, 0.4, 1.6, 1.6}), kD2));
    CHECK_FALSE(inside_zone(Region::zone("z", RectPatch{0.4, 0.4, 1.2, 1.2}), kD2));
}

TEST_CASE("Hausdorff distance of concentric circles is the radius gap") {
    const StarShape a{1, 1, 0.3, {}, {}}, b{1, 1, 0.35, {}, {}};
    CHECK(hausdorff_distance(a, b) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(hausdorff_distance(a, a) == 0.0);
    CHECK(perimeter(a) == doctest::Approx(2 * testing::pi * 0.3).epsilon(1e-4));
    CHECK(perimeter(kD1) == doctest::Approx(2.0));
}

}  // TEST_SUITE
