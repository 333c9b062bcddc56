#include "cavlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "cavlab/error.hpp"

namespace cavlab {

EllipticOperator EllipticOperator::laplacian(double c) {
    EllipticOperator op;
    op.name = c == 0.0 ? "laplacian" : fmt::format("laplacian+{}", c);
    op.c = SpatialProfile::constant(c);
    op.c0 = c;
    return op;
}

EllipticOperator EllipticOperator::constant(double a11, double a12, double a22, double b1, double b2, double c) {
    EllipticOperator op;
    op.name = "constant";
    op.a11 = SpatialProfile::constant(a11);
    op.a12 = SpatialProfile::constant(a12);
    op.a22 = SpatialProfile::constant(a22);
    op.b1 = SpatialProfile::constant(b1);
    op.b2 = SpatialProfile::constant(b2);
    op.c = SpatialProfile::constant(c);
    // smallest eigenvalue of the constant diffusion tensor
    const double mean = 0.5 * (a11 + a22);
    const double rad = std::hypot(0.5 * (a11 - a22), a12);
    op.alpha = mean - rad;
    op.c0 = c;
    return op;
}

bool EllipticOperator::is_constant_coefficient() const {
    return a11.is_constant() && a12.is_constant() && a22.is_constant() && b1.is_constant() && b2.is_constant() &&
           c.is_constant();
}

std::string OperatorReport::text(const std::string& name) const {
    return fmt::format(
        "operator {}: ellipticity {} (min ratio {:.6g}); coercivity {} (min c {:.6g}{}); cell Peclet {} ({:.3g})",
        name, ellipticity_ok ? "pass" : "FAIL", min_ellipticity_ratio, coercivity_ok ? "pass" : "FAIL", min_reaction,
        strict_coercivity ? "" : ", c0 = 0 relaxation", peclet_ok ? "pass" : "FAIL", cell_peclet);
}

OperatorReport check_operator(const EllipticOperator& op, const Grid& grid) {
    OperatorReport r;
    r.min_ellipticity_ratio = std::numeric_limits<double>::infinity();
    r.min_reaction = std::numeric_limits<double>::infinity();
    double max_b = 0.0;
    const double s = 1.0 / std::numbers::sqrt2;
    const std::array<std::array<double, 2>, 4> dirs{{{1.0, 0.0}, {0.0, 1.0}, {s, s}, {s, -s}}};
    for (int n = 0; n < grid.size(); ++n) {
        const double x = grid.x(grid.i_of(n));
        const double y = grid.y(grid.j_of(n));
        const double a11 = op.a11(x, y), a12 = op.a12(x, y), a22 = op.a22(x, y);
        for (const auto& d : dirs) {
            const double q = a11 * d[0] * d[0] + 2.0 * a12 * d[0] * d[1] + a22 * d[1] * d[1];
            r.min_ellipticity_ratio = std::min(r.min_ellipticity_ratio, q);
        }
        r.min_reaction = std::min(r.min_reaction, op.c(x, y));
        max_b = std::max({max_b, std::abs(op.b1(x, y)), std::abs(op.b2(x, y))});
    }
    r.ellipticity_ok = op.alpha > 0.0 && r.min_ellipticity_ratio >= op.alpha * (1.0 - 1e-12);
    r.coercivity_ok = op.c0 >= 0.0 && r.min_reaction >= op.c0 - 1e-12 * std::max(1.0, op.c0);
    r.strict_coercivity = op.c0 > 0.0;
    r.cell_peclet = op.alpha > 0.0 ? grid.h * max_b / (2.0 * op.alpha) : std::numeric_limits<double>::infinity();
    r.peclet_ok = r.cell_peclet < 1.0;
    return r;
}

std::vector<double> DiscreteOperator::gather(std::span<const double> node_values) const {
    std::vector<double> u(unknown_nodes.size());
    for (std::size_t k = 0; k < unknown_nodes.size(); ++k) u[k] = node_values[static_cast<std::size_t>(unknown_nodes[k])];
    return u;
}

void DiscreteOperator::scatter(std::span<const double> unknown_values, std::span<double> node_values) const {
    for (std::size_t k = 0; k < unknown_nodes.size(); ++k)
        node_values[static_cast<std::size_t>(unknown_nodes[k])] = unknown_values[k];
}

Eigen::VectorXd DiscreteOperator::apply(const Eigen::VectorXd& u, const Eigen::VectorXd& data) const {
    return matrix * u + coupling * data;
}

Eigen::VectorXd DiscreteOperator::apply_nodes(std::span<const double> node_values) const {
    Eigen::VectorXd u(unknowns());
    for (int k = 0; k < unknowns(); ++k) u[k] = node_values[static_cast<std::size_t>(unknown_nodes[static_cast<std::size_t>(k)])];
    Eigen::VectorXd data = Eigen::VectorXd::Zero(data_size());
    for (int n = 0; n < cls.grid.size(); ++n)
        if (roles[static_cast<std::size_t>(n)] == NodeRole::Data) data[n] = node_values[static_cast<std::size_t>(n)];
    return apply(u, data);
}

namespace {

struct StencilEntry {
    int di;
    int dj;
    double w;
};

std::vector<StencilEntry> stencil_at(const EllipticOperator& op, const Grid& g, int i, int j) {
    const double h = g.h;
    const double h2 = h * h;
    const double x = g.x(i);
    const double y = g.y(j);
    std::vector<StencilEntry> st;
    st.reserve(9);

    const double a11p = op.a11(x, y);
    const double a22p = op.a22(x, y);
    const double aE = 0.5 * (a11p + op.a11(x + h, y));
    const double aW = 0.5 * (a11p + op.a11(x - h, y));
    const double aN = 0.5 * (a22p + op.a22(x, y + h));
    const double aS = 0.5 * (a22p + op.a22(x, y - h));
    const double b1 = op.b1(x, y);
    const double b2 = op.b2(x, y);

    st.push_back({0, 0, (aE + aW + aN + aS) / h2 + op.c(x, y)});
    st.push_back({1, 0, -aE / h2 + b1 / (2.0 * h)});
    st.push_back({-1, 0, -aW / h2 - b1 / (2.0 * h)});
    st.push_back({0, 1, -aN / h2 + b2 / (2.0 * h)});
    st.push_back({0, -1, -aS / h2 - b2 / (2.0 * h)});

    if (op.has_cross_terms()) {
        // -d_x(a12 d_y u) - d_y(a12 d_x u), centred differences of centred differences
        const double q = 4.0 * h2;
        const double cE = op.a12(x + h, y), cW = op.a12(x - h, y);
        const double cN = op.a12(x, y + h), cS = op.a12(x, y - h);
        st.push_back({1, 1, -(cE + cN) / q});
        st.push_back({-1, -1, -(cW + cS) / q});
        st.push_back({-1, 1, (cW + cN) / q});
        st.push_back({1, -1, (cE + cS) / q});
    }
    return st;
}

Edge edge_of_offset(int di, int dj) {
    if (di < 0) return Edge::Left;
    if (di > 0) return Edge::Right;
    if (dj < 0) return Edge::Bottom;
    return Edge::Top;
}

}  // namespace

DiscreteOperator assemble(const EllipticOperator& op, const NodeClassification& cls, const BoundaryModes& modes) {
    const Grid& g = cls.grid;
    const OperatorReport report = check_operator(op, g);
    if (!report.ok()) throw Error(ErrorCode::HypothesisViolation, report.text(op.name));

    DiscreteOperator d;
    d.cls = cls;
    d.modes = modes;
    d.roles.resize(static_cast<std::size_t>(g.size()));
    d.unknown_of_node.assign(static_cast<std::size_t>(g.size()), -1);
    for (int n = 0; n < g.size(); ++n) {
        NodeRole role = NodeRole::Data;
        switch (cls.label(n)) {
            case NodeLabel::Fluid: role = NodeRole::Unknown; break;
            case NodeLabel::OuterBoundary:
                role = modes.outer == OuterBc::Neumann ? NodeRole::Unknown : NodeRole::Data;
                break;
            case NodeLabel::CavityBoundary:
                role = modes.cavity == CavityBc::Robin ? NodeRole::Unknown : NodeRole::Data;
                break;
            case NodeLabel::CavityInterior:
                role = modes.cavity == CavityBc::Robin ? NodeRole::Ghost : NodeRole::Data;
                break;
        }
        d.roles[static_cast<std::size_t>(n)] = role;
        if (role == NodeRole::Unknown) {
            d.unknown_of_node[static_cast<std::size_t>(n)] = static_cast<int>(d.unknown_nodes.size());
            d.unknown_nodes.push_back(n);
        }
    }

    std::map<std::pair<int, int>, int> slot_of;
    if (modes.outer == OuterBc::Neumann) {
        for (int n = 0; n < g.size(); ++n) {
            const int i = g.i_of(n), j = g.j_of(n);
            if (!g.on_edge(i, j)) continue;
            for (Edge e : {Edge::Left, Edge::Right, Edge::Bottom, Edge::Top}) {
                const bool on = (e == Edge::Left && i == 0) || (e == Edge::Right && i == g.nx - 1) ||
                                (e == Edge::Bottom && j == 0) || (e == Edge::Top && j == g.ny - 1);
                if (!on) continue;
                slot_of[{n, static_cast<int>(e)}] = g.size() + static_cast<int>(d.flux_slots.size());
                d.flux_slots.push_back({n, e});
            }
        }
    }

    std::vector<Eigen::Triplet<double>> a_trip;
    std::vector<Eigen::Triplet<double>> c_trip;
    const double h = g.h;

    for (int row = 0; row < d.unknowns(); ++row) {
        const int p = d.unknown_nodes[static_cast<std::size_t>(row)];
        const int pi = g.i_of(p), pj = g.j_of(p);
        const double px = g.x(pi), py = g.y(pj);

        auto add_known_or_unknown = [&](int qi, int qj, double w) -> bool {
            if (!g.in_range(qi, qj)) return false;
            const int q = g.index(qi, qj);
            switch (d.roles[static_cast<std::size_t>(q)]) {
                case NodeRole::Unknown:
                    a_trip.emplace_back(row, d.unknown_of_node[static_cast<std::size_t>(q)], w);
                    return true;
                case NodeRole::Data: c_trip.emplace_back(row, q, w); return true;
                case NodeRole::Ghost: return false;
            }
            return false;
        };

        for (const auto& e : stencil_at(op, g, pi, pj)) {
            if (e.w == 0.0) continue;
            const int qi = pi + e.di, qj = pj + e.dj;
            if (add_known_or_unknown(qi, qj, e.w)) continue;

            if (std::abs(e.di) + std::abs(e.dj) != 1)
                throw Error(ErrorCode::Unsupported,
                            "cross-derivative coefficient a12 needs Dirichlet conditions on all boundaries");
            const double a_ee = e.di != 0 ? op.a11(px, py) : op.a22(px, py);
            const int mi = pi - e.di, mj = pj - e.dj;

            if (!g.in_range(qi, qj)) {
                // outer Neumann ghost: a_ee (u_Q - u_M) / (2h) = flux
                const int slot = slot_of.at({p, static_cast<int>(edge_of_offset(e.di, e.dj))});
                if (!add_known_or_unknown(mi, mj, e.w))
                    throw Error(ErrorCode::Unsupported, "Neumann ghost mirror falls outside the grid");
                c_trip.emplace_back(row, slot, e.w * 2.0 * h / a_ee);
                continue;
            }
            // Robin ghost inside the cavity: a_ee (u_Q - u_M) / (2h) + m u_P = 0
            const double m = modes.robin_m(px, py);
            if (add_known_or_unknown(mi, mj, e.w)) {
                a_trip.emplace_back(row, row, -e.w * 2.0 * h * m / a_ee);
            } else {
                // thin cavity wall: first-order one-sided closure
                a_trip.emplace_back(row, row, e.w * (1.0 - h * m / a_ee));
            }
        }
    }

    d.matrix.resize(d.unknowns(), d.unknowns());
    d.matrix.setFromTriplets(a_trip.begin(), a_trip.end());
    d.matrix.makeCompressed();
    d.coupling.resize(d.unknowns(), d.data_size());
    d.coupling.setFromTriplets(c_trip.begin(), c_trip.end());
    d.coupling.makeCompressed();
    return d;
}

std::vector<double> conormal_trace(std::span<const double> u, const EllipticOperator& op,
                                   std::span<const BoundaryNode> gamma, const Grid& g) {
    if (gamma.empty()) throw Error(ErrorCode::EmptyGamma, "no observation nodes");
    std::vector<double> out;
    out.reserve(gamma.size());
    const double h = g.h;
    auto val = [&](int i, int j) { return u[static_cast<std::size_t>(g.index(i, j))]; };
    for (const auto& bn : gamma) {
        const int i = g.i_of(bn.node), j = g.j_of(bn.node);
        const Point nu = outward_normal(bn.edge);
        const int di = -static_cast<int>(nu.x), dj = -static_cast<int>(nu.y);  // inward
        const double d_in = (-3.0 * val(i, j) + 4.0 * val(i + di, j + dj) - val(i + 2 * di, j + 2 * dj)) / (2.0 * h);
        const double d_nu = -d_in;
        const int ti = dj != 0 ? 1 : 0, tj = di != 0 ? 1 : 0;  // tangent along the edge
        const double d_t = (val(i + ti, j + tj) - val(i - ti, j - tj)) / (2.0 * h);
        const double gx = d_nu * nu.x + d_t * ti;
        const double gy = d_nu * nu.y + d_t * tj;
        const double x = g.x(i), y = g.y(j);
        const double a11 = op.a11(x, y), a12 = op.a12(x, y), a22 = op.a22(x, y);
        out.push_back((a11 * gx + a12 * gy) * nu.x + (a12 * gx + a22 * gy) * nu.y);
    }
    return out;
}

std::vector<double> conormal_trace(std::span<const double> u, const EllipticOperator& op, const Region& gamma,
                                   const Grid& grid) {
    const auto nodes = gamma_nodes(gamma, grid);
    return conormal_trace(u, op, nodes, grid);
}

std::vector<std::vector<double>> make_test_bank(const Grid& g, std::span<const CavityShape> exclude, int count,
                                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(g.x_min, g.x_max), uy(g.y_min, g.y_max);
    const double side = std::min(g.x_max - g.x_min, g.y_max - g.y_min);
    std::uniform_real_distribution<double> ur(4.0 * g.h, std::max(5.0 * g.h, 0.25 * side));
    std::vector<std::vector<double>> bank;
    const double margin = 3.0 * g.h;
    for (int attempt = 0; attempt < 10000 && static_cast<int>(bank.size()) < count; ++attempt) {
        const double cx = ux(rng), cy = uy(rng), r = ur(rng);
        if (cx - r - margin < g.x_min || cx + r + margin > g.x_max || cy - r - margin < g.y_min ||
            cy + r + margin > g.y_max)
            continue;
        bool clear = true;
        for (const auto& s : exclude) {
            if (contains_closed(s, cx, cy)) clear = false;
            for (const auto& p : boundary_samples(s, 256))
                if (std::hypot(p.x - cx, p.y - cy) < r + margin) clear = false;
        }
        if (!clear) continue;
        std::vector<double> v(static_cast<std::size_t>(g.size()), 0.0);
        for (int n = 0; n < g.size(); ++n) {
            const double q = (std::pow(g.x(g.i_of(n)) - cx, 2) + std::pow(g.y(g.j_of(n)) - cy, 2)) / (r * r);
            if (q < 1.0) v[static_cast<std::size_t>(n)] = std::round(1024.0 * std::exp(1.0 - 1.0 / (1.0 - q)));
        }
        bank.push_back(std::move(v));
    }
    return bank;
}

namespace {

std::vector<long double> matvec_ld(const SparseRows& a, const std::vector<long double>& x) {
    std::vector<long double> y(static_cast<std::size_t>(a.rows()), 0.0L);
    for (int r = 0; r < a.outerSize(); ++r) {
        long double s = 0.0L;
        for (SparseRows::InnerIterator it(a, r); it; ++it)
            s += static_cast<long double>(it.value()) * x[static_cast<std::size_t>(it.col())];
        y[static_cast<std::size_t>(r)] = s;
    }
    return y;
}

}  // namespace

double commutator_norm(const EllipticOperator& op1, const EllipticOperator& op2, const Grid& grid,
                       std::span<const std::vector<double>> bank) {
    const auto cls = rasterize_empty(grid);
    const auto d1 = assemble(op1, cls);
    const auto d2 = assemble(op2, cls);
    double worst = 0.0;
    for (const auto& v_nodes : bank) {
        const auto v = d1.gather(v_nodes);
        std::vector<long double> x(v.begin(), v.end());
        const auto a12v = matvec_ld(d1.matrix, matvec_ld(d2.matrix, x));
        const auto a21v = matvec_ld(d2.matrix, matvec_ld(d1.matrix, x));
        long double num = 0.0L, den = 0.0L;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const long double diff = a12v[k] - a21v[k];
            num += diff * diff;
            den += x[k] * x[k];
        }
        if (den > 0.0L) worst = std::max(worst, static_cast<double>(std::sqrt(num / den)));
    }
    return worst;
}

Invertibility check_invertibility(const DiscreteOperator& d) {
    Invertibility r;
    if (d.unknowns() == 0) return r;
    const Eigen::SparseMatrix<double> m = d.matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu(m);
    if (lu.info() != Eigen::Success) return r;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(d.unknowns()).normalized();
    double est = 0.0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd w = lu.solve(v);
        const double norm = w.norm();
        if (!std::isfinite(norm) || norm == 0.0) return r;
        const double next = 1.0 / norm;
        v = w / norm;
        const bool settled = it > 0 && std::abs(next - est) <= 1e-12 * next;
        est = next;
        if (settled) break;
    }
    // a zero pivot survives as roundoff, so judge singularity against the matrix scale
    double scale = 0.0;
    for (int k = 0; k < d.matrix.outerSize(); ++k) {
        double row = 0.0;
        for (SparseRows::InnerIterator e(d.matrix, k); e; ++e) row += std::abs(e.value());
        scale = std::max(scale, row);
    }
    if (est <= 1e-10 * scale) return r;
    r.invertible = true;
    r.min_abs_eigenvalue = est;
    return r;
}

}  // namespace cavlab
