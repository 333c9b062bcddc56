#include "cavlab/observe.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cavlab/error.hpp"

namespace cavlab {

std::string to_string(ObservationKind k) {
    return k == ObservationKind::ConormalOnGamma ? "CONORMAL_ON_GAMMA" : "INTERIOR_ON_OMEGA";
}

double Observation::max_abs() const {
    double m = 0.0;
    for (const auto& row : values)
        for (double v : row) m = std::max(m, std::abs(v));
    return m;
}

Observation extract(const SpaceTimeField& field, const Region& region, const EllipticOperator& op,
                    ObservationKind kind) {
    const Grid& g = field.cls.grid;
    Observation obs;
    obs.kind = kind;
    obs.region = region.name;
    obs.stamps = field.times;
    obs.spacing = g.h;

    if (kind == ObservationKind::ConormalOnGamma) {
        if (region.kind != RegionKind::Subboundary)
            throw Error(ErrorCode::RegionKindMismatch, fmt::format("region '{}' is not a subboundary", region.name));
        const auto nodes = gamma_nodes(region, g);
        for (const auto& bn : nodes) obs.locations.push_back({bn.node, g.x(g.i_of(bn.node)), g.y(g.j_of(bn.node))});
        obs.values.assign(nodes.size(), std::vector<double>(field.size()));
        for (std::size_t t = 0; t < field.size(); ++t) {
            const auto tr = conormal_trace(field.snapshots[t], op, nodes, g);
            for (std::size_t l = 0; l < nodes.size(); ++l) obs.values[l][t] = tr[l];
        }
        return obs;
    }

    if (region.kind != RegionKind::InteriorPatch)
        throw Error(ErrorCode::RegionKindMismatch, fmt::format("region '{}' is not an interior patch", region.name));
    const auto nodes = patch_nodes(region, field.cls);
    if (nodes.empty())
        throw Error(ErrorCode::RegionKindMismatch, fmt::format("region '{}' contains no FLUID node", region.name));
    for (int n : nodes) obs.locations.push_back({n, g.x(g.i_of(n)), g.y(g.j_of(n))});
    obs.values.assign(nodes.size(), std::vector<double>(field.size()));
    for (std::size_t t = 0; t < field.size(); ++t)
        for (std::size_t l = 0; l < nodes.size(); ++l)
            obs.values[l][t] = field.snapshots[t][static_cast<std::size_t>(nodes[l])];
    return obs;
}

Observation crop(const Observation& obs, double delta) {
    Observation out = obs;
    out.stamps.clear();
    std::vector<std::size_t> keep;
    for (std::size_t t = 0; t < obs.stamps.size(); ++t) {
        if (obs.stamps[t] >= delta - 1e-12 * std::max(1.0, std::abs(delta))) {
            keep.push_back(t);
            out.stamps.push_back(obs.stamps[t]);
        }
    }
    for (std::size_t l = 0; l < obs.values.size(); ++l) {
        out.values[l].clear();
        for (auto t : keep) out.values[l].push_back(obs.values[l][t]);
    }
    return out;
}

Observation restrict_to(const Observation& fine, const Observation& coarse) {
    if (fine.kind != coarse.kind) throw Error(ErrorCode::ShapeMismatch, "observation kinds differ");
    const double tol = 1e-9;
    std::vector<std::size_t> loc_map;
    for (const auto& c : coarse.locations) {
        auto it = std::find_if(fine.locations.begin(), fine.locations.end(), [&](const ObservationLocation& f) {
            return std::abs(f.x - c.x) < tol && std::abs(f.y - c.y) < tol;
        });
        if (it == fine.locations.end())
            throw Error(ErrorCode::ShapeMismatch, fmt::format("fine observation lacks location ({}, {})", c.x, c.y));
        loc_map.push_back(static_cast<std::size_t>(it - fine.locations.begin()));
    }
    std::vector<std::size_t> time_map;
    for (double s : coarse.stamps) {
        auto it = std::find_if(fine.stamps.begin(), fine.stamps.end(), [&](double f) {
            return std::abs(f - s) <= tol * std::max(1.0, std::abs(s));
        });
        if (it == fine.stamps.end())
            throw Error(ErrorCode::ShapeMismatch, fmt::format("fine observation lacks time {}", s));
        time_map.push_back(static_cast<std::size_t>(it - fine.stamps.begin()));
    }
    Observation out = coarse;
    out.noise = fine.noise;
    for (std::size_t l = 0; l < loc_map.size(); ++l)
        for (std::size_t t = 0; t < time_map.size(); ++t) out.values[l][t] = fine.values[loc_map[l]][time_map[t]];
    return out;
}

Observation add_noise(const Observation& obs, double level, std::uint64_t seed) {
    if (level < 0.0) throw Error(ErrorCode::InvalidSpec, "noise level must be nonnegative");
    Observation out = obs;
    out.noise = NoiseDescriptor{level, seed};
    if (level == 0.0) return out;
    double ss = 0.0;
    for (const auto& row : obs.values)
        for (double v : row) ss += v * v;
    const double rms = obs.samples() > 0 ? std::sqrt(ss / static_cast<double>(obs.samples())) : 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, level * rms);
    for (auto& row : out.values)
        for (double& v : row) v += normal(rng);
    return out;
}

namespace {

std::vector<double> time_weights(const std::vector<double>& s, Quadrature q) {
    std::vector<double> w(s.size(), 1.0);
    if (q == Quadrature::Unit || s.size() < 2) return w;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double left = k > 0 ? s[k] - s[k - 1] : 0.0;
        const double right = k + 1 < s.size() ? s[k + 1] - s[k] : 0.0;
        w[k] = 0.5 * (left + right);
    }
    return w;
}

double space_weight(const Observation& o, Quadrature q) {
    if (q == Quadrature::Unit) return 1.0;
    return o.kind == ObservationKind::ConormalOnGamma ? o.spacing : o.spacing * o.spacing;
}

}  // namespace

double misfit(const Observation& a, const Observation& b, Quadrature q) {
    if (a.kind != b.kind) throw Error(ErrorCode::ShapeMismatch, "observation kinds differ");
    if (a.locations.size() != b.locations.size() || a.stamps.size() != b.stamps.size())
        throw Error(ErrorCode::ShapeMismatch,
                    fmt::format("observation shapes {}x{} and {}x{} differ", a.locations.size(), a.stamps.size(),
                                b.locations.size(), b.stamps.size()));
    for (std::size_t l = 0; l < a.locations.size(); ++l)
        if (std::abs(a.locations[l].x - b.locations[l].x) > 1e-9 || std::abs(a.locations[l].y - b.locations[l].y) > 1e-9)
            throw Error(ErrorCode::ShapeMismatch, fmt::format("location {} differs", l));
    for (std::size_t t = 0; t < a.stamps.size(); ++t)
        if (std::abs(a.stamps[t] - b.stamps[t]) > 1e-9 * std::max(1.0, std::abs(a.stamps[t])))
            throw Error(ErrorCode::ShapeMismatch, fmt::format("time stamp {} differs", t));

    const auto wt = time_weights(a.stamps, q);
    const double ws = space_weight(a, q);
    double sum = 0.0;
    for (std::size_t l = 0; l < a.values.size(); ++l) {
        double row = 0.0;
        for (std::size_t t = 0; t < wt.size(); ++t) {
            const double d = a.values[l][t] - b.values[l][t];
            row += wt[t] * d * d;
        }
        sum += row;
    }
    return 0.5 * ws * sum;
}

std::vector<double> sample_weights(const Observation& obs, Quadrature q) {
    const auto wt = time_weights(obs.stamps, q);
    const double ws = space_weight(obs, q);
    std::vector<double> w;
    w.reserve(obs.samples());
    for (std::size_t l = 0; l < obs.locations.size(); ++l)
        for (double t : wt) w.push_back(ws * t);
    return w;
}

double total_weight(const Observation& obs, Quadrature q) {
    const auto wt = time_weights(obs.stamps, q);
    double s = 0.0;
    for (double w : wt) s += w;
    return s * space_weight(obs, q) * static_cast<double>(obs.locations.size());
}

}  // namespace cavlab
