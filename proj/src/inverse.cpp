#include "cavlab/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "cavlab/error.hpp"

namespace cavlab {

std::string to_string(U0Policy p) { return p == U0Policy::Windowed ? "WINDOWED" : "JOINT"; }

Grid refine(const Grid& g) { return Grid::make(g.x_min, g.x_max, g.y_min, g.y_max, 0.5 * g.h); }

namespace {

Observation observe_cavity(const NodeClassification& cls, const EllipticOperator& op, const SourceSpec* src,
                           const BoundaryInput* boundary, std::vector<double> u0, const TimeGrid& tg,
                           const BoundaryModes& modes, const Region& region, ObservationKind kind, double window) {
    ForwardInputs in;
    in.source = src;
    in.dirichlet = boundary;
    in.u0 = std::move(u0);
    in.modes = modes;
    const auto field = solve(cls, op, in, tg);
    return crop(extract(field, region, op, kind), window);
}

std::vector<double> flatten(const Observation& o) {
    std::vector<double> v;
    v.reserve(o.samples());
    for (const auto& row : o.values) v.insert(v.end(), row.begin(), row.end());
    return v;
}

}  // namespace

ObjectiveEvaluator::ObjectiveEvaluator(const InverseProblemSpec& spec, const ForwardScenario& scenario)
    : spec_(spec), scenario_(scenario) {
    if (spec.lambda < 0.0) throw Error(ErrorCode::InvalidSpec, "regularisation weight must be nonnegative");
    if (spec.policy == U0Policy::Joint && spec.joint_basis < 2)
        throw Error(ErrorCode::InvalidSpec, "JOINT basis needs at least 2 nodes per axis");
    data_ = crop(spec.data, spec.window);
    if (data_.stamps.empty())
        throw Error(ErrorCode::InvalidSpec, fmt::format("window start {} leaves no observation times", spec.window));
    if (scenario.source && !scenario.source->validated())
        throw Error(ErrorCode::UnvalidatedSpec, "scenario source used before validate_source");
}

double ObjectiveEvaluator::misfit_for(const NodeClassification& cls) {
    ++solves_;
    const auto& sc = scenario_;
    const SourceSpec* src = sc.source ? &*sc.source : nullptr;
    const BoundaryInput* bnd = sc.boundary ? &*sc.boundary : nullptr;
    const auto obs = observe_cavity(cls, sc.op, src, bnd, {}, sc.time, sc.modes, sc.region, sc.kind, spec_.window);
    if (spec_.policy == U0Policy::Windowed) return misfit(obs, data_, spec_.quadrature);

    // JOINT: the observation is affine in u0, so fit the basis coefficients by
    // weighted linear least squares against the residual data.
    const Grid& g = cls.grid;
    const int nb = spec_.joint_basis;
    const double dx = (g.x_max - g.x_min) / (nb - 1), dy = (g.y_max - g.y_min) / (nb - 1);
    const auto w = sample_weights(obs, spec_.quadrature);
    const auto base = flatten(obs);
    const auto target = flatten(data_);
    if (base.size() != target.size()) throw Error(ErrorCode::ShapeMismatch, "model and data observation sizes differ");
    const auto m = static_cast<Eigen::Index>(base.size());
    Eigen::MatrixXd phi(m, nb * nb);
    Eigen::VectorXd r(m);
    for (Eigen::Index k = 0; k < m; ++k) r[k] = std::sqrt(w[static_cast<std::size_t>(k)]) * (target[static_cast<std::size_t>(k)] - base[static_cast<std::size_t>(k)]);
    for (int b = 0; b < nb; ++b) {
        for (int a = 0; a < nb; ++a) {
            const double xa = g.x_min + a * dx, yb = g.y_min + b * dy;
            const auto hat = SpatialProfile::closed("hat", [=](double x, double y) {
                return std::max(0.0, 1.0 - std::abs(x - xa) / dx) * std::max(0.0, 1.0 - std::abs(y - yb) / dy);
            });
            ++solves_;
            const auto ob = observe_cavity(cls, sc.op, nullptr, nullptr, initial_field(hat, cls), sc.time, sc.modes,
                                           sc.region, sc.kind, spec_.window);
            const auto v = flatten(ob);
            for (Eigen::Index k = 0; k < m; ++k) phi(k, b * nb + a) = std::sqrt(w[static_cast<std::size_t>(k)]) * v[static_cast<std::size_t>(k)];
        }
    }
    const Eigen::VectorXd c = phi.colPivHouseholderQr().solve(r);
    return 0.5 * (r - phi * c).squaredNorm();
}

ObjectiveValue ObjectiveEvaluator::operator()(std::span<const double> params) {
    ++evaluations_;
    ObjectiveValue out;
    const auto ps = shape_from_params(params, spec_.param);
    out.clamped = ps.clamped;
    out.penalty = spec_.lambda * perimeter(ps.shape);
    NodeClassification cls;
    try {
        cls = rasterize(ps.shape, scenario_.grid);
    } catch (const Error& e) {
        out.diagnostic = e.what();
        return out;
    }
    auto it = cache_.find(cls.labels);
    if (it == cache_.end()) {
        double mf = std::numeric_limits<double>::infinity();
        try {
            mf = misfit_for(cls);
        } catch (const Error& e) {
            out.diagnostic = e.what();
        }
        it = cache_.emplace(cls.labels, mf).first;
    }
    out.misfit = it->second;
    out.feasible = std::isfinite(out.misfit);
    out.value = out.feasible ? out.misfit + out.penalty : std::numeric_limits<double>::infinity();
    return out;
}

ObjectiveValue objective(std::span<const double> params, const InverseProblemSpec& spec,
                         const ForwardScenario& scenario) {
    ObjectiveEvaluator ev(spec, scenario);
    return ev(params);
}

namespace {

using Vec = std::vector<double>;

class Search {
public:
    Search(const InverseProblemSpec& spec, ObjectiveEvaluator& ev, ReconstructionResult& res)
        : spec_(spec), ev_(ev), res_(res) {
        const auto d = spec.param.arity();
        if (spec.param.lower.size() != d || spec.param.upper.size() != d)
            throw Error(ErrorCode::BadArity, "parameter box does not match the parameterisation");
        for (std::size_t k = 0; k < d; ++k)
            if (!(spec.param.upper[k] > spec.param.lower[k]))
                throw Error(ErrorCode::InvalidSpec, "parameter box must have upper > lower in every coordinate");
    }

    Vec to_params(const Vec& z) const {
        Vec p(z.size());
        for (std::size_t k = 0; k < z.size(); ++k)
            p[k] = spec_.param.lower[k] + z[k] * (spec_.param.upper[k] - spec_.param.lower[k]);
        return p;
    }

    StartSummary run(int start, Vec z0, int budget) {
        StartSummary s;
        s.start = start;
        s.initial = to_params(z0);
        start_ = start;
        budget_ = budget;
        used_ = 0;
        const std::size_t d = z0.size();
        const double step = spec_.optimizer.initial_step;

        std::vector<Vec> x(d + 1, z0);
        for (std::size_t i = 0; i < d; ++i) x[i + 1][i] += x[i + 1][i] + step <= 1.0 ? step : -step;
        std::vector<double> f(d + 1);
        for (std::size_t i = 0; i <= d; ++i) {
            if (!eval(x[i], f[i])) return finish(s, x, f, false);
        }

        while (true) {
            std::vector<std::size_t> order(d + 1);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] < f[b]; });
            std::vector<Vec> xs;
            std::vector<double> fs;
            for (auto k : order) {
                xs.push_back(x[k]);
                fs.push_back(f[k]);
            }
            x = std::move(xs);
            f = std::move(fs);

            double diam = 0.0;
            for (std::size_t i = 1; i <= d; ++i)
                for (std::size_t k = 0; k < d; ++k) diam = std::max(diam, std::abs(x[i][k] - x[0][k]));
            if (diam < spec_.optimizer.simplex_tol) return finish(s, x, f, true);

            Vec c(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t k = 0; k < d; ++k) c[k] += x[i][k] / static_cast<double>(d);
            auto along = [&](double t) {
                Vec p(d);
                for (std::size_t k = 0; k < d; ++k) p[k] = std::clamp(c[k] + t * (x[d][k] - c[k]), 0.0, 1.0);
                return p;
            };

            Vec xr = along(-1.0);
            double fr;
            if (!eval(xr, fr)) return finish(s, x, f, false);
            if (fr < f[0]) {
                Vec xe = along(-2.0);
                double fe;
                if (!eval(xe, fe)) return finish(s, x, f, false);
                if (fe < fr) {
                    x[d] = xe;
                    f[d] = fe;
                } else {
                    x[d] = xr;
                    f[d] = fr;
                }
                continue;
            }
            if (fr < f[d - 1]) {
                x[d] = xr;
                f[d] = fr;
                continue;
            }
            const bool outside = fr < f[d];
            Vec xc = along(outside ? -0.5 : 0.5);
            double fc;
            if (!eval(xc, fc)) return finish(s, x, f, false);
            if (outside ? fc <= fr : fc < f[d]) {
                x[d] = xc;
                f[d] = fc;
                continue;
            }
            for (std::size_t i = 1; i <= d; ++i) {
                for (std::size_t k = 0; k < d; ++k) x[i][k] = x[0][k] + 0.5 * (x[i][k] - x[0][k]);
                if (!eval(x[i], f[i])) return finish(s, x, f, false);
            }
        }
    }

private:
    bool eval(const Vec& z, double& fz) {
        if (used_ >= budget_) return false;
        ++used_;
        const Vec p = to_params(z);
        const auto v = ev_(p);
        fz = v.value;
        TraceRow row;
        row.iteration = static_cast<int>(res_.trace.size());
        row.start = start_;
        row.params = shape_params(p);
        row.objective = v.value;
        const double prev = res_.trace.empty() ? std::numeric_limits<double>::infinity() : res_.trace.back().best_so_far;
        row.best_so_far = std::min(prev, v.value);
        res_.trace.push_back(row);
        if (v.value < res_.objective) {
            res_.objective = v.value;
            res_.misfit = v.misfit;
            res_.best_params = row.params;
        }
        return true;
    }

    Vec shape_params(const Vec& p) const { return params_from_shape(shape_from_params(p, spec_.param).shape); }

    StartSummary finish(StartSummary& s, const std::vector<Vec>& x, const std::vector<double>& f, bool converged) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < f.size(); ++i)
            if (f[i] < f[best]) best = i;
        s.evaluations = used_;
        s.converged = converged;
        if (!x.empty() && best < x.size() && best < f.size() && std::isfinite(f[best])) {
            s.best = shape_params(to_params(x[best]));
            s.best_objective = f[best];
        }
        return s;
    }

    const InverseProblemSpec& spec_;
    ObjectiveEvaluator& ev_;
    ReconstructionResult& res_;
    int start_ = 0;
    int budget_ = 0;
    int used_ = 0;
};

}  // namespace

ReconstructionResult reconstruct(const InverseProblemSpec& spec, const ForwardScenario& scenario) {
    const auto& opt = spec.optimizer;
    if (opt.starts < 1 || opt.max_evaluations < 1)
        throw Error(ErrorCode::InvalidSpec, "optimizer needs at least one start and one evaluation");
    ObjectiveEvaluator ev(spec, scenario);
    ReconstructionResult res;
    Search search(spec, ev, res);
    const std::size_t d = spec.param.arity();
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int per_start = opt.max_evaluations / opt.starts;
    for (int s = 0; s < opt.starts; ++s) {
        std::vector<double> z0(d, 0.5);
        if (s > 0)
            for (auto& z : z0) z = unit(rng);
        const int budget = s + 1 == opt.starts ? opt.max_evaluations - per_start * (opt.starts - 1) : per_start;
        auto summary = search.run(s, std::move(z0), budget);
        if (!summary.converged) res.budget_exhausted = true;
        res.starts.push_back(std::move(summary));
    }
    res.evaluations = ev.evaluations();
    res.solves = ev.solves();
    if (!res.best_params.empty()) res.best_shape = shape_from_params(res.best_params, spec.param).shape;
    return res;
}

std::string verdict_for(double ratio) {
    if (ratio <= 3.0) return "INDISTINGUISHABLE";
    if (ratio > 10.0) return "DISTINGUISHABLE";
    return "INCONCLUSIVE";
}

std::string DistinguishReport::text() const {
    std::string out;
    out += fmt::format("gap={:.17g}\n", gap);
    out += fmt::format("floor={:.17g}\n", floor);
    out += fmt::format("measured_floor={:.17g}\n", measured_floor);
    out += fmt::format("algebraic_floor={:.17g}\n", algebraic_floor);
    out += fmt::format("ratio={:.17g}\n", ratio);
    out += fmt::format("samples={}\n", samples);
    out += fmt::format("classification={}\n", verdict);
    for (const auto& it : hypotheses.items) out += fmt::format("hypothesis_{}={}\n", it.clause, it.pass ? "pass" : "fail");
    if (commutator) {
        out += fmt::format("commutator_norm={:.17g}\n", *commutator);
        out += fmt::format("commutator_hypothesis={}\n", commutator_ok ? "met" : "unmet");
    } else if (!commutator_ok) {
        out += "commutator_norm=unavailable\n";
        out += "commutator_hypothesis=unmet\n";
    }
    return out;
}

namespace {

DistinguishReport compare(const CavityShape& d1, const CavityShape& d2, const EllipticOperator& op1,
                          const EllipticOperator& op2, const Design& ds, const Grid& grid) {
    auto run = [&](const CavityShape& shape, const EllipticOperator& op, const SpatialProfile& u0, const Grid& g) {
        const auto cls = rasterize(shape, g);
        std::optional<SourceSpec> src;
        if (ds.source) src = ds.source(g);
        return observe_cavity(cls, op, src ? &*src : nullptr, ds.boundary ? &*ds.boundary : nullptr,
                              initial_field(u0, cls), ds.time, ds.modes, ds.region, ds.kind, ds.window);
    };

    DistinguishReport r;
    r.first = run(d1, op1, ds.u0_first, grid);
    r.second = run(d2, op2, ds.u0_second, grid);
    r.gap = misfit(r.first, r.second, ds.quadrature);
    const auto fine = run(d1, op1, ds.u0_first, refine(grid));
    r.measured_floor = misfit(r.first, restrict_to(fine, r.first), ds.quadrature);
    const double eps = 1e-10 * std::max(r.first.max_abs(), r.second.max_abs());
    r.algebraic_floor = 0.5 * eps * eps * total_weight(r.first, ds.quadrature);
    r.floor = std::max(r.measured_floor, r.algebraic_floor);
    r.ratio = r.floor > 0.0 ? r.gap / r.floor : (r.gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.verdict = verdict_for(r.ratio);
    r.samples = r.first.samples();

    std::optional<SourceSpec> src;
    if (ds.source) src = ds.source(grid);
    const std::vector<CavityShape> cavities{d1, d2};
    const Region* omega = ds.kind == ObservationKind::InteriorOnOmega ? &ds.region : nullptr;
    if (src) {
        r.hypotheses = validate_hypotheses(*src, grid, cavities, ds.exclusion_zones, omega, ds.time.T);
    } else {
        r.hypotheses.items.push_back({"7b", false, "no source: f = 0"});
    }
    return r;
}

}  // namespace

DistinguishReport distinguishability(const CavityShape& d1, const CavityShape& d2, const EllipticOperator& op,
                                     const Design& design, const Grid& grid) {
    return compare(d1, d2, op, op, design, grid);
}

DistinguishReport q2_distinguishability(const CavityShape& d1, const CavityShape& d2, const EllipticOperator& op1,
                                        const EllipticOperator& op2, const Design& design, const Grid& grid) {
    auto r = compare(d1, d2, op1, op2, design, grid);
    const std::vector<CavityShape> cavities{d1, d2};
    const auto bank = make_test_bank(grid, cavities, 16, 7);
    // an empty bank proves nothing either way
    r.commutator_ok = false;
    if (bank.empty()) return r;
    r.commutator = commutator_norm(op1, op2, grid, bank);
    r.commutator_ok = *r.commutator < 1e-10;
    return r;
}

}  // namespace cavlab
