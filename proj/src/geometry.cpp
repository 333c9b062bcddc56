#include "cavlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <fmt/format.h>

#include "cavlab/error.hpp"

namespace cavlab {

namespace {

constexpr double kMembershipTol = 1e-12;
constexpr int kRadiusSamples = 1024;

int checked_count(double length, double h, const char* axis) {
    const double cells = length / h;
    const double rounded = std::round(cells);
    if (rounded < 1.0 || std::abs(cells - rounded) > 1e-12 * std::max(1.0, cells)) {
        throw Error(ErrorCode::BadGrid,
                    fmt::format("{} length {} is not an integer multiple of h={}", axis, length, h));
    }
    return static_cast<int>(rounded) + 1;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Grid Grid::make(double x_min, double x_max, double y_min, double y_max, double h) {
    if (!(h > 0.0)) throw Error(ErrorCode::BadGrid, "grid spacing must be positive");
    if (!(x_max > x_min) || !(y_max > y_min)) throw Error(ErrorCode::BadGrid, "empty domain");
    Grid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.y_min = y_min;
    g.y_max = y_max;
    g.h = h;
    g.nx = checked_count(x_max - x_min, h, "x");
    g.ny = checked_count(y_max - y_min, h, "y");
    return g;
}

std::optional<int> Grid::node_at(double px, double py) const {
    const double fi = (px - x_min) / h;
    const double fj = (py - y_min) / h;
    const double ri = std::round(fi);
    const double rj = std::round(fj);
    if (std::abs(fi - ri) > 1e-9 || std::abs(fj - rj) > 1e-9) return std::nullopt;
    const int i = static_cast<int>(ri);
    const int j = static_cast<int>(rj);
    if (!in_range(i, j)) return std::nullopt;
    return index(i, j);
}

double StarShape::radius(double theta) const {
    double r = rho0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double kt = static_cast<double>(k + 1) * theta;
        r += a[k] * std::cos(kt) + (k < b.size() ? b[k] : 0.0) * std::sin(kt);
    }
    return r;
}

double StarShape::radius_derivative(double theta) const {
    double dr = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double kk = static_cast<double>(k + 1);
        dr += kk * (-a[k] * std::sin(kk * theta) + (k < b.size() ? b[k] : 0.0) * std::cos(kk * theta));
    }
    return dr;
}

bool contains_strict(const CavityShape& shape, double x, double y) {
    return std::visit(
        overloaded{
            [&](const AxisRectangle& r) {
                return x > r.x0 + kMembershipTol && x < r.x1 - kMembershipTol &&
                       y > r.y0 + kMembershipTol && y < r.y1 - kMembershipTol;
            },
            [&](const StarShape& s) {
                const double dx = x - s.cx;
                const double dy = y - s.cy;
                const double r = std::hypot(dx, dy);
                return r < s.radius(std::atan2(dy, dx)) - kMembershipTol;
            },
        },
        shape);
}

bool contains_closed(const CavityShape& shape, double x, double y) {
    return std::visit(
        overloaded{
            [&](const AxisRectangle& r) {
                return x >= r.x0 - kMembershipTol && x <= r.x1 + kMembershipTol &&
                       y >= r.y0 - kMembershipTol && y <= r.y1 + kMembershipTol;
            },
            [&](const StarShape& s) {
                const double dx = x - s.cx;
                const double dy = y - s.cy;
                const double r = std::hypot(dx, dy);
                return r <= s.radius(std::atan2(dy, dx)) + kMembershipTol;
            },
        },
        shape);
}

std::vector<Point> boundary_samples(const CavityShape& shape, int count) {
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(count));
    std::visit(overloaded{
                   [&](const AxisRectangle& r) {
                       const double w = r.x1 - r.x0;
                       const double hgt = r.y1 - r.y0;
                       const double per = 2.0 * (w + hgt);
                       for (int k = 0; k < count; ++k) {
                           double s = per * k / count;
                           if (s < w) {
                               pts.push_back({r.x0 + s, r.y0});
                           } else if ((s -= w) < hgt) {
                               pts.push_back({r.x1, r.y0 + s});
                           } else if ((s -= hgt) < w) {
                               pts.push_back({r.x1 - s, r.y1});
                           } else {
                               s -= w;
                               pts.push_back({r.x0, r.y1 - s});
                           }
                       }
                   },
                   [&](const StarShape& s) {
                       for (int k = 0; k < count; ++k) {
                           const double t = 2.0 * std::numbers::pi * k / count;
                           const double r = s.radius(t);
                           pts.push_back({s.cx + r * std::cos(t), s.cy + r * std::sin(t)});
                       }
                   },
               },
               shape);
    return pts;
}

double perimeter(const CavityShape& shape) {
    return std::visit(overloaded{
                          [](const AxisRectangle& r) { return 2.0 * ((r.x1 - r.x0) + (r.y1 - r.y0)); },
                          [](const StarShape& s) {
                              // Trapezoid rule is spectrally accurate for periodic integrands.
                              constexpr int n = 2048;
                              double sum = 0.0;
                              for (int k = 0; k < n; ++k) {
                                  const double t = 2.0 * std::numbers::pi * k / n;
                                  sum += std::hypot(s.radius(t), s.radius_derivative(t));
                              }
                              return sum * 2.0 * std::numbers::pi / n;
                          },
                      },
                      shape);
}

double hausdorff_distance(const CavityShape& a, const CavityShape& b, int samples) {
    const auto pa = boundary_samples(a, samples);
    const auto pb = boundary_samples(b, samples);
    auto directed = [](const std::vector<Point>& from, const std::vector<Point>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(pa, pb), directed(pb, pa));
}

std::string describe(const CavityShape& shape) {
    return std::visit(overloaded{
                          [](const AxisRectangle& r) {
                              return fmt::format("rectangle({},{})x({},{})", r.x0, r.x1, r.y0, r.y1);
                          },
                          [](const StarShape& s) {
                              std::string out = fmt::format("star(c=({},{}),rho0={}", s.cx, s.cy, s.rho0);
                              for (std::size_t k = 0; k < s.a.size(); ++k)
                                  out += fmt::format(",a{}={},b{}={}", k + 1, s.a[k], k + 1, s.b[k]);
                              return out + ")";
                          },
                      },
                      shape);
}

int NodeClassification::count(NodeLabel l) const {
    return static_cast<int>(std::count(labels.begin(), labels.end(), l));
}

std::vector<int> NodeClassification::nodes_with(NodeLabel l) const {
    std::vector<int> out;
    for (int n = 0; n < grid.size(); ++n)
        if (labels[static_cast<std::size_t>(n)] == l) out.push_back(n);
    return out;
}

void check_clearance(const CavityShape& shape, const Grid& grid) {
    const double margin = 2.0 * grid.h - 1e-12;
    auto violates = [&](double x, double y) {
        return x - grid.x_min < margin || grid.x_max - x < margin || y - grid.y_min < margin ||
               grid.y_max - y < margin;
    };
    if (const auto* r = std::get_if<AxisRectangle>(&shape)) {
        if (violates(r->x0, r->y0) || violates(r->x1, r->y1))
            throw Error(ErrorCode::ClearanceViolation, describe(shape) + " is closer than 2h to the outer boundary");
        return;
    }
    for (const auto& p : boundary_samples(shape, kRadiusSamples)) {
        if (violates(p.x, p.y))
            throw Error(ErrorCode::ClearanceViolation, describe(shape) + " is closer than 2h to the outer boundary");
    }
}

namespace {

void finish_classification(NodeClassification& cls) {
    const Grid& g = cls.grid;
    cls.fluid_index.assign(static_cast<std::size_t>(g.size()), -1);
    cls.fluid_nodes.clear();
    for (int n = 0; n < g.size(); ++n) {
        if (cls.labels[static_cast<std::size_t>(n)] == NodeLabel::Fluid) {
            cls.fluid_index[static_cast<std::size_t>(n)] = static_cast<int>(cls.fluid_nodes.size());
            cls.fluid_nodes.push_back(n);
        }
    }
}

bool fluid_connected(const NodeClassification& cls) {
    if (cls.fluid_nodes.empty()) return true;
    const Grid& g = cls.grid;
    std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
    std::queue<int> q;
    q.push(cls.fluid_nodes.front());
    seen[static_cast<std::size_t>(cls.fluid_nodes.front())] = 1;
    std::size_t reached = 0;
    constexpr std::array<std::array<int, 2>, 4> offs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    while (!q.empty()) {
        const int n = q.front();
        q.pop();
        ++reached;
        for (const auto& o : offs) {
            const int i = g.i_of(n) + o[0];
            const int j = g.j_of(n) + o[1];
            if (!g.in_range(i, j)) continue;
            const int m = g.index(i, j);
            if (seen[static_cast<std::size_t>(m)] || cls.label(m) != NodeLabel::Fluid) continue;
            seen[static_cast<std::size_t>(m)] = 1;
            q.push(m);
        }
    }
    return reached == cls.fluid_nodes.size();
}

}  // namespace

NodeClassification rasterize_empty(const Grid& grid) {
    NodeClassification cls;
    cls.grid = grid;
    cls.labels.assign(static_cast<std::size_t>(grid.size()), NodeLabel::Fluid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            if (grid.on_edge(i, j)) cls.labels[static_cast<std::size_t>(grid.index(i, j))] = NodeLabel::OuterBoundary;
    finish_classification(cls);
    return cls;
}

NodeClassification rasterize(const CavityShape& shape, const Grid& grid) {
    if (const auto* s = std::get_if<StarShape>(&shape)) {
        for (int k = 0; k < kRadiusSamples; ++k) {
            const double t = 2.0 * std::numbers::pi * k / kRadiusSamples;
            if (s->radius(t) < 0.0)
                throw Error(ErrorCode::NegativeRadius, describe(shape) + " has negative radius");
        }
    }
    check_clearance(shape, grid);

    NodeClassification cls = rasterize_empty(grid);
    std::vector<char> cavity(static_cast<std::size_t>(grid.size()), 0);
    bool any_strict = false;
    for (int j = 1; j < grid.ny - 1; ++j) {
        for (int i = 1; i < grid.nx - 1; ++i) {
            const double x = grid.x(i);
            const double y = grid.y(j);
            if (contains_closed(shape, x, y)) cavity[static_cast<std::size_t>(grid.index(i, j))] = 1;
            if (contains_strict(shape, x, y)) any_strict = true;
        }
    }
    if (!any_strict) throw Error(ErrorCode::EmptyCavity, describe(shape) + " contains no grid node");

    for (int j = 1; j < grid.ny - 1; ++j) {
        for (int i = 1; i < grid.nx - 1; ++i) {
            const int n = grid.index(i, j);
            if (!cavity[static_cast<std::size_t>(n)]) continue;
            const bool touches_fluid = !cavity[static_cast<std::size_t>(grid.index(i + 1, j))] ||
                                       !cavity[static_cast<std::size_t>(grid.index(i - 1, j))] ||
                                       !cavity[static_cast<std::size_t>(grid.index(i, j + 1))] ||
                                       !cavity[static_cast<std::size_t>(grid.index(i, j - 1))];
            cls.labels[static_cast<std::size_t>(n)] =
                touches_fluid ? NodeLabel::CavityBoundary : NodeLabel::CavityInterior;
        }
    }
    finish_classification(cls);
    if (!fluid_connected(cls))
        throw Error(ErrorCode::FluidDisconnected, describe(shape) + " splits the fluid region");
    return cls;
}

ShapeParameterization ShapeParameterization::unbounded(int modes, double min_radius) {
    ShapeParameterization p;
    p.modes = modes;
    p.lower.assign(p.arity(), -std::numeric_limits<double>::infinity());
    p.upper.assign(p.arity(), std::numeric_limits<double>::infinity());
    p.min_radius = min_radius;
    return p;
}

ParamShape shape_from_params(std::span<const double> params, const ShapeParameterization& meta) {
    if (params.size() != meta.arity())
        throw Error(ErrorCode::BadArity,
                    fmt::format("expected {} parameters for K={}, got {}", meta.arity(), meta.modes, params.size()));
    ParamShape out;
    std::vector<double> p(params.begin(), params.end());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double lo = k < meta.lower.size() ? meta.lower[k] : -std::numeric_limits<double>::infinity();
        const double hi = k < meta.upper.size() ? meta.upper[k] : std::numeric_limits<double>::infinity();
        const double c = std::clamp(p[k], lo, hi);
        if (c != p[k]) out.clamped = true;
        p[k] = c;
    }
    if (p[2] < meta.min_radius) {
        p[2] = meta.min_radius;
        out.clamped = true;
    }
    out.shape.cx = p[0];
    out.shape.cy = p[1];
    out.shape.rho0 = p[2];
    for (int k = 0; k < meta.modes; ++k) {
        out.shape.a.push_back(p[3 + 2 * static_cast<std::size_t>(k)]);
        out.shape.b.push_back(p[4 + 2 * static_cast<std::size_t>(k)]);
    }
    return out;
}

std::vector<double> params_from_shape(const StarShape& shape) {
    std::vector<double> p{shape.cx, shape.cy, shape.rho0};
    for (std::size_t k = 0; k < shape.a.size(); ++k) {
        p.push_back(shape.a[k]);
        p.push_back(k < shape.b.size() ? shape.b[k] : 0.0);
    }
    return p;
}

std::string to_string(Edge e) {
    switch (e) {
        case Edge::Left: return "left";
        case Edge::Right: return "right";
        case Edge::Bottom: return "bottom";
        case Edge::Top: return "top";
    }
    return "?";
}

std::optional<Edge> edge_from_string(const std::string& s) {
    if (s == "left") return Edge::Left;
    if (s == "right") return Edge::Right;
    if (s == "bottom") return Edge::Bottom;
    if (s == "top") return Edge::Top;
    return std::nullopt;
}

Point outward_normal(Edge e) {
    switch (e) {
        case Edge::Left: return {-1.0, 0.0};
        case Edge::Right: return {1.0, 0.0};
        case Edge::Bottom: return {0.0, -1.0};
        case Edge::Top: return {0.0, 1.0};
    }
    return {};
}

Region Region::subboundary(std::string name, std::vector<EdgeSegment> segs) {
    Region r;
    r.name = std::move(name);
    r.kind = RegionKind::Subboundary;
    r.segments = std::move(segs);
    return r;
}

Region Region::full_boundary(std::string name) {
    return subboundary(std::move(name), {{Edge::Left}, {Edge::Right}, {Edge::Bottom}, {Edge::Top}});
}

Region Region::interior(std::string name, Patch p) {
    Region r;
    r.name = std::move(name);
    r.kind = RegionKind::InteriorPatch;
    r.patch = p;
    return r;
}

Region Region::zone(std::string name, Patch p) {
    Region r;
    r.name = std::move(name);
    r.kind = RegionKind::ActivationZone;
    r.patch = p;
    return r;
}

bool patch_contains(const Patch& p, double x, double y) {
    return std::visit(overloaded{
                          [&](const RectPatch& r) {
                              return x >= r.x0 - kMembershipTol && x <= r.x1 + kMembershipTol &&
                                     y >= r.y0 - kMembershipTol && y <= r.y1 + kMembershipTol;
                          },
                          [&](const DiscPatch& d) { return std::hypot(x - d.cx, y - d.cy) <= d.r + kMembershipTol; },
                      },
                      p);
}

std::vector<BoundaryNode> gamma_nodes(const Region& gamma, const Grid& grid) {
    if (gamma.kind != RegionKind::Subboundary)
        throw Error(ErrorCode::RegionKindMismatch, "region '" + gamma.name + "' is not a subboundary");
    std::vector<BoundaryNode> out;
    for (const auto& seg : gamma.segments) {
        const bool vertical = seg.edge == Edge::Left || seg.edge == Edge::Right;
        const int count = vertical ? grid.ny : grid.nx;
        for (int k = 1; k < count - 1; ++k) {
            const double s = vertical ? grid.y(k) : grid.x(k);
            if (s < seg.from - kMembershipTol || s > seg.to + kMembershipTol) continue;
            int i = 0;
            int j = 0;
            switch (seg.edge) {
                case Edge::Left: i = 0, j = k; break;
                case Edge::Right: i = grid.nx - 1, j = k; break;
                case Edge::Bottom: i = k, j = 0; break;
                case Edge::Top: i = k, j = grid.ny - 1; break;
            }
            out.push_back({grid.index(i, j), seg.edge});
        }
    }
    std::sort(out.begin(), out.end(), [](const BoundaryNode& a, const BoundaryNode& b) { return a.node < b.node; });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const BoundaryNode& a, const BoundaryNode& b) { return a.node == b.node; }),
              out.end());
    if (out.empty()) throw Error(ErrorCode::EmptyGamma, "region '" + gamma.name + "' selects no boundary node");
    return out;
}

std::vector<int> patch_nodes(const Region& region, const NodeClassification& cls) {
    if (region.kind == RegionKind::Subboundary)
        throw Error(ErrorCode::RegionKindMismatch, "region '" + region.name + "' is a subboundary");
    std::vector<int> out;
    const Grid& g = cls.grid;
    for (int n = 0; n < g.size(); ++n) {
        if (cls.label(n) != NodeLabel::Fluid) continue;
        if (patch_contains(region.patch, g.x(g.i_of(n)), g.y(g.j_of(n)))) out.push_back(n);
    }
    return out;
}

bool disjoint(const Region& region, const CavityShape& shape, const Grid& grid) {
    if (region.kind == RegionKind::Subboundary) return true;
    for (const auto& p : boundary_samples(shape, kRadiusSamples))
        if (patch_contains(region.patch, p.x, p.y)) return false;
    for (int n = 0; n < grid.size(); ++n) {
        const double x = grid.x(grid.i_of(n));
        const double y = grid.y(grid.j_of(n));
        if (patch_contains(region.patch, x, y) && contains_closed(shape, x, y)) return false;
    }
    // A patch swallowed by the shape has no boundary sample inside it.
    return std::visit(overloaded{
                          [&](const RectPatch& r) { return !contains_closed(shape, 0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)); },
                          [&](const DiscPatch& d) { return !contains_closed(shape, d.cx, d.cy); },
                      },
                      region.patch);
}

bool inside_zone(const Region& zone, const CavityShape& shape) {
    for (const auto& p : boundary_samples(shape, kRadiusSamples))
        if (!patch_contains(zone.patch, p.x, p.y)) return false;
    return true;
}

}  // namespace cavlab
