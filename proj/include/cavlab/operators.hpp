#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "cavlab/fields.hpp"
#include "cavlab/geometry.hpp"

namespace cavlab {

/// A v = -div(a grad v) + b . grad v + c v with symmetric a = [[a11, a12], [a12, a22]].
/// alpha and c0 are the claimed ellipticity and reaction floors.
struct EllipticOperator {
    std::string name = "A";
    SpatialProfile a11 = SpatialProfile::constant(1.0);
    SpatialProfile a12 = SpatialProfile::zero();
    SpatialProfile a22 = SpatialProfile::constant(1.0);
    SpatialProfile b1 = SpatialProfile::zero();
    SpatialProfile b2 = SpatialProfile::zero();
    SpatialProfile c = SpatialProfile::zero();
    double alpha = 1.0;
    double c0 = 0.0;

    /// -Delta + c with claimed floors alpha = 1 and c0 = c.
    static EllipticOperator laplacian(double c = 0.0);
    static EllipticOperator constant(double a11, double a12, double a22, double b1, double b2, double c);

    bool has_cross_terms() const { return !a12.is_identically_zero(); }
    bool is_constant_coefficient() const;
};

struct OperatorReport {
    double min_ellipticity_ratio = 0.0;  // min over nodes/directions of xi.a.xi / |xi|^2
    double min_reaction = 0.0;
    double cell_peclet = 0.0;            // h max|b| / (2 alpha)
    bool ellipticity_ok = false;
    bool coercivity_ok = false;
    bool strict_coercivity = false;      // c0 > 0, as opposed to the c0 = 0 relaxation
    bool peclet_ok = false;

    bool ok() const { return ellipticity_ok && coercivity_ok && peclet_ok; }
    std::string text(const std::string& name) const;
};

/// Samples ellipticity on the directions (1,0), (0,1), (1,1)/sqrt2, (1,-1)/sqrt2 and
/// c >= c0 >= 0 at every node of the grid.
OperatorReport check_operator(const EllipticOperator& op, const Grid& grid);

enum class OuterBc : std::uint8_t { Dirichlet, Neumann };
enum class CavityBc : std::uint8_t { Dirichlet, Robin };

struct BoundaryModes {
    OuterBc outer = OuterBc::Dirichlet;
    CavityBc cavity = CavityBc::Dirichlet;
    /// Robin coefficient m(x) >= 0 sampled at cavity-boundary nodes.
    SpatialProfile robin_m = SpatialProfile::zero();
};

enum class NodeRole : std::uint8_t { Unknown, Data, Ghost };

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Discrete operator restricted to the unknown nodes. For node values u,
///   (A_h u)|unknowns = matrix * u_unknowns + coupling * data
/// where data holds one slot per grid node (Dirichlet values) followed by one
/// slot per outward Neumann flux (see flux_slots).
struct DiscreteOperator {
    NodeClassification cls;
    BoundaryModes modes;
    std::vector<NodeRole> roles;
    std::vector<int> unknown_of_node;
    std::vector<int> unknown_nodes;
    std::vector<BoundaryNode> flux_slots;
    SparseRows matrix;
    SparseRows coupling;

    int unknowns() const { return static_cast<int>(unknown_nodes.size()); }
    int data_size() const { return cls.grid.size() + static_cast<int>(flux_slots.size()); }

    std::vector<double> gather(std::span<const double> node_values) const;
    void scatter(std::span<const double> unknown_values, std::span<double> node_values) const;
    /// matrix * u + coupling * data.
    Eigen::VectorXd apply(const Eigen::VectorXd& u, const Eigen::VectorXd& data) const;
    /// A_h applied to a full node vector, Dirichlet data taken from the same vector
    /// and zero fluxes; returns values at the unknown nodes.
    Eigen::VectorXd apply_nodes(std::span<const double> node_values) const;
};

/// Flux-form divergence term with arithmetic midpoint averaging of a, centred
/// differences for b . grad, c on the diagonal; Dirichlet nodes eliminated into
/// the coupling map, Neumann and Robin boundaries closed with ghost nodes.
/// Throws HYPOTHESIS_VIOLATION when check_operator fails.
DiscreteOperator assemble(const EllipticOperator& op, const NodeClassification& cls,
                          const BoundaryModes& modes = {});

struct Invertibility {
    bool invertible = false;
    double min_abs_eigenvalue = 0.0;  // inverse-iteration estimate; 0 when singular or below 1e-10 of the row-sum norm
};

/// Factors the matrix and estimates its eigenvalue of smallest modulus.
Invertibility check_invertibility(const DiscreteOperator& d);

/// Conormal derivative sum_ij a_ij d_i u nu_j at the gamma nodes: one-sided
/// second-order normal difference, centred tangential difference.
std::vector<double> conormal_trace(std::span<const double> node_values, const EllipticOperator& op,
                                   std::span<const BoundaryNode> gamma, const Grid& grid);
std::vector<double> conormal_trace(std::span<const double> node_values, const EllipticOperator& op,
                                   const Region& gamma, const Grid& grid);

/// Integer-valued bump functions supported at least 3h away from the outer
/// boundary and from every excluded shape.
std::vector<std::vector<double>> make_test_bank(const Grid& grid, std::span<const CavityShape> exclude, int count,
                                                std::uint64_t seed);

/// max over the bank of ||(A1 A2 - A2 A1) v|| / ||v|| with both operators assembled
/// on the cavity-free grid; products accumulated in extended precision.
double commutator_norm(const EllipticOperator& op1, const EllipticOperator& op2, const Grid& grid,
                       std::span<const std::vector<double>> bank);

}  // namespace cavlab
