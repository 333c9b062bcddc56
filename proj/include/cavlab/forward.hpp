#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavlab/fields.hpp"
#include "cavlab/geometry.hpp"
#include "cavlab/operators.hpp"
#include "cavlab/sources.hpp"

namespace cavlab {

enum class Scheme { ImplicitEuler, CrankNicolson };
std::string to_string(Scheme s);
std::optional<Scheme> scheme_from_string(const std::string& s);

/// Uniform steps t_n = n T / nt. The first startup_steps steps of a
/// Crank-Nicolson run are taken with implicit Euler to damp rough initial data.
struct TimeGrid {
    double T = 1.0;
    int nt = 100;
    Scheme scheme = Scheme::CrankNicolson;
    int stride = 1;
    int startup_steps = 0;

    double dt() const { return T / nt; }
    double time(int n) const { return T * n / nt; }
    /// Step index of t, if t lies on the grid (1e-9 dt tolerance).
    std::optional<int> step_of(double t) const;
};

/// Outward conormal flux on the outer boundary: flux[edge](x, y) * mu(t).
struct NeumannInput {
    std::array<SpatialProfile, 4> flux;
    TimeProfile mu = TimeProfile::constant(1.0);

    static NeumannInput uniform(SpatialProfile f, TimeProfile mu = TimeProfile::constant(1.0));
};

struct ForwardInputs {
    const SourceSpec* source = nullptr;
    const BoundaryInput* dirichlet = nullptr;
    const NeumannInput* neumann = nullptr;
    /// Initial values on the full node vector; empty means zero.
    std::vector<double> u0;
    BoundaryModes modes;
};

/// Stored snapshots on every grid node: unknowns from the solve, boundary data
/// where prescribed, zero on cavity nodes that carry no value.
struct SpaceTimeField {
    NodeClassification cls;
    BoundaryModes modes;
    Scheme scheme = Scheme::CrankNicolson;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> snapshots;

    std::size_t size() const { return times.size(); }
};

/// theta-scheme (I/dt + theta A) u^{n+1} = (I/dt - (1 - theta) A) u^n + load with
/// theta = 1 (implicit Euler) or 1/2 (Crank-Nicolson). The load averages the
/// source one-sidedly, theta f(t_{n+1}^-) + (1 - theta) f(t_n^+), so a jump that
/// sits on a grid point is never smeared across a step. Sparse LU solves, each
/// checked to relative residual 1e-10 (SOLVER_DIVERGED otherwise). Throws
/// BREAKPOINT_MISALIGNED when a source breakpoint in (0, T] is off the grid.
SpaceTimeField solve(const NodeClassification& cls, const EllipticOperator& op, const ForwardInputs& in,
                     const TimeGrid& tg);

/// As solve with ghost-node Neumann closure on the outer boundary (the cavity
/// stays Dirichlet unless in.modes says Robin).
SpaceTimeField neumann_source_solve(const NodeClassification& cls, const EllipticOperator& op,
                                    const NeumannInput& flux, ForwardInputs in, const TimeGrid& tg);

/// Steady problem A u = f(t) with boundary data frozen at time t.
std::vector<double> steady_solve(const NodeClassification& cls, const EllipticOperator& op, const ForwardInputs& in,
                                 double t);

/// Samples a profile on all nodes and zeroes the cavity nodes.
std::vector<double> initial_field(const SpatialProfile& u0, const NodeClassification& cls);

}  // namespace cavlab
