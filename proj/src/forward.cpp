#include "cavlab/forward.hpp"

#include <cmath>
#include <map>

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "cavlab/error.hpp"

namespace cavlab {

std::string to_string(Scheme s) { return s == Scheme::ImplicitEuler ? "implicit-euler" : "crank-nicolson"; }

std::optional<Scheme> scheme_from_string(const std::string& s) {
    if (s == "implicit-euler") return Scheme::ImplicitEuler;
    if (s == "crank-nicolson") return Scheme::CrankNicolson;
    return std::nullopt;
}

std::optional<int> TimeGrid::step_of(double t) const {
    const double k = std::round(t / dt());
    if (std::abs(k * dt() - t) > 1e-9 * dt()) return std::nullopt;
    return static_cast<int>(k);
}

NeumannInput NeumannInput::uniform(SpatialProfile f, TimeProfile mu) {
    NeumannInput n;
    n.flux = {f, f, f, f};
    n.mu = std::move(mu);
    return n;
}

std::vector<double> initial_field(const SpatialProfile& u0, const NodeClassification& cls) {
    auto v = u0.sample(cls.grid);
    for (int n = 0; n < cls.grid.size(); ++n)
        if (cls.is_cavity(n)) v[static_cast<std::size_t>(n)] = 0.0;
    return v;
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using Solver = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;

/// Time-independent pieces of the boundary data, sampled once.
struct DataModel {
    const DiscreteOperator* d = nullptr;
    const ForwardInputs* in = nullptr;
    std::vector<int> dirichlet_nodes;
    std::vector<double> g0;
    std::vector<double> flux;  // per flux slot

    DataModel(const DiscreteOperator& dop, const ForwardInputs& inputs) : d(&dop), in(&inputs) {
        const Grid& g = dop.cls.grid;
        if (inputs.dirichlet != nullptr && dop.modes.outer == OuterBc::Dirichlet) {
            for (int n = 0; n < g.size(); ++n) {
                if (dop.cls.label(n) != NodeLabel::OuterBoundary) continue;
                dirichlet_nodes.push_back(n);
                g0.push_back(inputs.dirichlet->g0(g.x(g.i_of(n)), g.y(g.j_of(n))));
            }
        }
        if (inputs.neumann != nullptr) {
            for (const auto& s : dop.flux_slots)
                flux.push_back(inputs.neumann->flux[static_cast<std::size_t>(s.edge)](g.x(g.i_of(s.node)),
                                                                                       g.y(g.j_of(s.node))));
        }
    }

    Eigen::VectorXd at(double t, Side side) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(d->data_size());
        if (!dirichlet_nodes.empty()) {
            const double mu = in->dirichlet->mu.value(t, side);
            for (std::size_t k = 0; k < dirichlet_nodes.size(); ++k) v[dirichlet_nodes[k]] = g0[k] * mu;
        }
        if (!flux.empty()) {
            const double mu = in->neumann->mu.value(t, side);
            const int base = d->cls.grid.size();
            for (std::size_t k = 0; k < flux.size(); ++k) v[base + static_cast<int>(k)] = flux[k] * mu;
        }
        return v;
    }
};

std::vector<double> snapshot(const DiscreteOperator& d, const Eigen::VectorXd& u, const Eigen::VectorXd& data) {
    std::vector<double> out(static_cast<std::size_t>(d.cls.grid.size()), 0.0);
    for (int n = 0; n < d.cls.grid.size(); ++n)
        if (d.roles[static_cast<std::size_t>(n)] == NodeRole::Data) out[static_cast<std::size_t>(n)] = data[n];
    for (int k = 0; k < d.unknowns(); ++k) out[static_cast<std::size_t>(d.unknown_nodes[static_cast<std::size_t>(k)])] = u[k];
    return out;
}

void factor(Solver& s, const ColMatrix& m) {
    s.analyzePattern(m);
    s.factorize(m);
    if (s.info() != Eigen::Success) throw Error(ErrorCode::SolverDiverged, "sparse LU factorisation failed: " + s.lastErrorMessage());
}

Eigen::VectorXd checked_solve(const Solver& s, const ColMatrix& m, const Eigen::VectorXd& rhs) {
    Eigen::VectorXd x = s.solve(rhs);
    if (s.info() != Eigen::Success) throw Error(ErrorCode::SolverDiverged, "sparse LU solve failed");
    const double rn = rhs.norm();
    const double res = (m * x - rhs).norm();
    if (!std::isfinite(res) || res > 1e-10 * rn)
        throw Error(ErrorCode::SolverDiverged, fmt::format("relative residual {:.3e} above 1e-10", rn > 0 ? res / rn : res));
    return x;
}

std::vector<double> step_times(const TimeGrid& tg, const SourceSpec* src) {
    if (tg.nt <= 0 || !(tg.T > 0.0)) throw Error(ErrorCode::InvalidSpec, "time grid needs T > 0 and nt > 0");
    std::vector<double> t(static_cast<std::size_t>(tg.nt) + 1);
    for (int n = 0; n <= tg.nt; ++n) t[static_cast<std::size_t>(n)] = tg.time(n);
    if (src != nullptr) {
        for (double b : src->breakpoints()) {
            if (!(b > 0.0) || b > tg.T * (1.0 + 1e-12)) continue;
            const auto k = tg.step_of(b);
            if (!k)
                throw Error(ErrorCode::BreakpointMisaligned,
                            fmt::format("source breakpoint t = {} falls between steps of dt = {}", b, tg.dt()));
            t[static_cast<std::size_t>(*k)] = b;  // exact hit for the one-sided evaluation
        }
    }
    return t;
}

}  // namespace

SpaceTimeField solve(const NodeClassification& cls, const EllipticOperator& op, const ForwardInputs& in,
                     const TimeGrid& tg) {
    if (in.source != nullptr && !in.source->validated())
        throw Error(ErrorCode::UnvalidatedSpec, "source spec used before validate_source");
    const auto times = step_times(tg, in.source);
    const DiscreteOperator d = assemble(op, cls, in.modes);
    const Grid& grid = cls.grid;
    const int n = d.unknowns();
    const double dt = tg.dt();

    const DataModel data(d, in);
    std::optional<SampledSource> src;
    if (in.source != nullptr) src = sample_source(*in.source, grid);
    Eigen::VectorXd fa(n), fb(n);
    auto source_at = [&](double t, Side side, Eigen::VectorXd& out) {
        if (src) src->field(t, side, d.unknown_nodes, std::span<double>(out.data(), static_cast<std::size_t>(n)));
        else out.setZero();
    };

    ColMatrix a = d.matrix;
    ColMatrix id(n, n);
    id.setIdentity();
    std::map<double, std::pair<ColMatrix, Solver>> systems;
    auto system_for = [&](double theta) -> std::pair<ColMatrix, Solver>& {
        auto it = systems.find(theta);
        if (it != systems.end()) return it->second;
        auto& entry = systems[theta];
        entry.first = ColMatrix(id / dt + theta * a);
        entry.first.makeCompressed();
        factor(entry.second, entry.first);
        return entry;
    };

    Eigen::VectorXd u(n);
    for (int k = 0; k < n; ++k)
        u[k] = in.u0.empty() ? 0.0 : in.u0[static_cast<std::size_t>(d.unknown_nodes[static_cast<std::size_t>(k)])];

    SpaceTimeField field;
    field.cls = cls;
    field.modes = in.modes;
    field.scheme = tg.scheme;
    field.dt = dt;
    Eigen::VectorXd d_old = data.at(times[0], Side::Right);
    field.times.push_back(times[0]);
    field.snapshots.push_back(snapshot(d, u, d_old));

    const int stride = std::max(1, tg.stride);
    for (int s = 0; s < tg.nt; ++s) {
        const double t_old = times[static_cast<std::size_t>(s)];
        const double t_new = times[static_cast<std::size_t>(s) + 1];
        const bool startup = s < tg.startup_steps;
        const double theta = tg.scheme == Scheme::ImplicitEuler || startup ? 1.0 : 0.5;
        auto& [m, solver] = system_for(theta);

        const Eigen::VectorXd d_new = data.at(t_new, Side::Left);
        source_at(t_new, Side::Left, fb);
        Eigen::VectorXd rhs = u / dt + theta * fb - d.coupling * (theta * d_new);
        if (theta < 1.0) {
            source_at(t_old, Side::Right, fa);
            rhs += (1.0 - theta) * fa - (1.0 - theta) * (a * u) - d.coupling * ((1.0 - theta) * d_old);
        }
        u = checked_solve(solver, m, rhs);
        d_old = data.at(t_new, Side::Right);
        if ((s + 1) % stride == 0 || s + 1 == tg.nt) {
            field.times.push_back(t_new);
            field.snapshots.push_back(snapshot(d, u, d_new));
        }
    }
    return field;
}

SpaceTimeField neumann_source_solve(const NodeClassification& cls, const EllipticOperator& op,
                                    const NeumannInput& flux, ForwardInputs in, const TimeGrid& tg) {
    in.modes.outer = OuterBc::Neumann;
    in.neumann = &flux;
    in.dirichlet = nullptr;
    return solve(cls, op, in, tg);
}

std::vector<double> steady_solve(const NodeClassification& cls, const EllipticOperator& op, const ForwardInputs& in,
                                 double t) {
    if (in.source != nullptr && !in.source->validated())
        throw Error(ErrorCode::UnvalidatedSpec, "source spec used before validate_source");
    const DiscreteOperator d = assemble(op, cls, in.modes);
    const int n = d.unknowns();
    const DataModel data(d, in);
    const Eigen::VectorXd dv = data.at(t, Side::Right);
    Eigen::VectorXd rhs = -(d.coupling * dv);
    if (in.source != nullptr) {
        Eigen::VectorXd f(n);
        sample_source(*in.source, cls.grid)
            .field(t, Side::Right, d.unknown_nodes, std::span<double>(f.data(), static_cast<std::size_t>(n)));
        rhs += f;
    }
    ColMatrix m = d.matrix;
    m.makeCompressed();
    Solver s;
    factor(s, m);
    return snapshot(d, checked_solve(s, m, rhs), dv);
}

}  // namespace cavlab
