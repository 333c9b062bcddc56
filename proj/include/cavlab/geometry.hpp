#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cavlab {

/// Uniform node grid over the rectangle [x_min, x_max] x [y_min, y_max].
/// Node (i, j) sits at (x_min + i h, y_min + j h); linear index is j * nx + i.
struct Grid {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;
    double h = 0.1;
    int nx = 11;
    int ny = 11;

    /// Validates that h divides both side lengths (1e-12 relative) and fills nx, ny.
    static Grid make(double x_min, double x_max, double y_min, double y_max, double h);

    double x(int i) const { return x_min + i * h; }
    double y(int j) const { return y_min + j * h; }
    int index(int i, int j) const { return j * nx + i; }
    int i_of(int node) const { return node % nx; }
    int j_of(int node) const { return node / nx; }
    int size() const { return nx * ny; }
    bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
    bool on_edge(int i, int j) const { return i == 0 || j == 0 || i == nx - 1 || j == ny - 1; }

    /// Node whose coordinates coincide with (x, y) up to 1e-9 h, if any.
    std::optional<int> node_at(double x, double y) const;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct AxisRectangle {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
};

/// rho(theta) = rho0 + sum_k (a_k cos k theta + b_k sin k theta) around (cx, cy).
struct StarShape {
    double cx = 0.0;
    double cy = 0.0;
    double rho0 = 0.0;
    std::vector<double> a;
    std::vector<double> b;

    double radius(double theta) const;
    double radius_derivative(double theta) const;
    int modes() const { return static_cast<int>(a.size()); }
};

using CavityShape = std::variant<AxisRectangle, StarShape>;

/// Point strictly inside the open shape.
bool contains_strict(const CavityShape& shape, double x, double y);
/// Point inside or on the boundary of the shape.
bool contains_closed(const CavityShape& shape, double x, double y);
/// Points along the boundary, roughly uniform in arc length for rectangles and in
/// angle for star shapes.
std::vector<Point> boundary_samples(const CavityShape& shape, int count);
double perimeter(const CavityShape& shape);
/// Symmetric Hausdorff distance between the two boundaries (sampled).
double hausdorff_distance(const CavityShape& a, const CavityShape& b, int samples = 1024);
std::string describe(const CavityShape& shape);

enum class NodeLabel : std::uint8_t { Fluid, CavityInterior, CavityBoundary, OuterBoundary };

struct NodeClassification {
    Grid grid;
    std::vector<NodeLabel> labels;
    /// FLUID node -> contiguous unknown index, -1 elsewhere.
    std::vector<int> fluid_index;
    /// Unknown index -> node, in increasing node order.
    std::vector<int> fluid_nodes;

    NodeLabel label(int i, int j) const { return labels[static_cast<std::size_t>(grid.index(i, j))]; }
    NodeLabel label(int node) const { return labels[static_cast<std::size_t>(node)]; }
    bool is_cavity(int node) const {
        const auto l = label(node);
        return l == NodeLabel::CavityInterior || l == NodeLabel::CavityBoundary;
    }
    int count(NodeLabel l) const;
    std::vector<int> nodes_with(NodeLabel l) const;
};

/// Labels every node of the grid for the domain Omega minus the closed shape.
/// Cavity nodes (centre inside or on the shape) with a FLUID 4-neighbour are
/// CAVITY_BOUNDARY, the remaining cavity nodes CAVITY_INTERIOR.
NodeClassification rasterize(const CavityShape& shape, const Grid& grid);
/// Cavity-free classification.
NodeClassification rasterize_empty(const Grid& grid);
/// Clearance of the closed shape from the outer boundary; throws
/// CLEARANCE_VIOLATION when below 2h.
void check_clearance(const CavityShape& shape, const Grid& grid);

/// Finite-dimensional admissible class: star shapes with K Fourier modes,
/// parameter vector (cx, cy, rho0, a_1, b_1, ..., a_K, b_K) confined to a box.
struct ShapeParameterization {
    int modes = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    double min_radius = 1e-3;

    std::size_t arity() const { return 3 + 2 * static_cast<std::size_t>(modes); }
    /// Unbounded box (only the radius floor applies).
    static ShapeParameterization unbounded(int modes, double min_radius = 1e-3);
};

struct ParamShape {
    StarShape shape;
    bool clamped = false;
};

ParamShape shape_from_params(std::span<const double> params, const ShapeParameterization& meta);
std::vector<double> params_from_shape(const StarShape& shape);

enum class Edge : std::uint8_t { Left, Right, Bottom, Top };
std::string to_string(Edge e);
std::optional<Edge> edge_from_string(const std::string& s);
/// Outward unit normal of the outer rectangle on the given edge.
Point outward_normal(Edge e);

struct EdgeSegment {
    Edge edge = Edge::Left;
    /// Range of the tangential coordinate (y for left/right, x for bottom/top).
    double from = -1e300;
    double to = 1e300;
};

struct RectPatch {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
};

struct DiscPatch {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
};

using Patch = std::variant<RectPatch, DiscPatch>;

enum class RegionKind : std::uint8_t { Subboundary, InteriorPatch, ActivationZone };

struct Region {
    std::string name;
    RegionKind kind = RegionKind::Subboundary;
    std::vector<EdgeSegment> segments;  // Subboundary
    Patch patch;                        // InteriorPatch, ActivationZone

    static Region subboundary(std::string name, std::vector<EdgeSegment> segs);
    static Region full_boundary(std::string name);
    static Region interior(std::string name, Patch p);
    static Region zone(std::string name, Patch p);
};

bool patch_contains(const Patch& p, double x, double y);

struct BoundaryNode {
    int node = 0;
    Edge edge = Edge::Left;
};

/// Outer-boundary nodes of a subboundary region, corners excluded, ordered by
/// node index. Throws EMPTY_GAMMA when nothing is selected.
std::vector<BoundaryNode> gamma_nodes(const Region& gamma, const Grid& grid);
/// FLUID nodes inside a patch region, ordered by node index.
std::vector<int> patch_nodes(const Region& region, const NodeClassification& cls);
/// True when the shape and the patch do not overlap (sampled boundary plus
/// grid-node membership test).
bool disjoint(const Region& region, const CavityShape& shape, const Grid& grid);
/// True when the closed shape lies inside the patch of an activation zone.
bool inside_zone(const Region& zone, const CavityShape& shape);

}  // namespace cavlab
