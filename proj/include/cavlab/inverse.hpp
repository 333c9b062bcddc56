#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavlab/forward.hpp"
#include "cavlab/observe.hpp"
#include "cavlab/sources.hpp"

namespace cavlab {

enum class U0Policy {
    /// Solve with u0 = 0 and compare only stamps t >= window.
    Windowed,
    /// Fit u0 on a coarse bilinear basis by linear least squares per candidate shape.
    Joint,
};
std::string to_string(U0Policy p);

struct OptimizerSettings {
    int starts = 4;
    int max_evaluations = 2000;
    /// Simplex diameter in normalised box coordinates at which a start stops.
    double simplex_tol = 1e-3;
    /// Edge length of the initial simplex in normalised box coordinates.
    double initial_step = 0.25;
    std::uint64_t seed = 1;
};

/// Forward inputs shared by every candidate cavity.
struct ForwardScenario {
    Grid grid;
    EllipticOperator op;
    std::optional<SourceSpec> source;
    std::optional<BoundaryInput> boundary;
    TimeGrid time;
    BoundaryModes modes;
    Region region;
    ObservationKind kind = ObservationKind::ConormalOnGamma;
};

struct InverseProblemSpec {
    Observation data;
    ShapeParameterization param;
    U0Policy policy = U0Policy::Windowed;
    double window = 0.0;
    double lambda = 0.0;
    Quadrature quadrature = Quadrature::Trapezoid;
    OptimizerSettings optimizer;
    /// Nodes per axis of the bilinear u0 basis in JOINT mode.
    int joint_basis = 4;
};

struct ObjectiveValue {
    double value = std::numeric_limits<double>::infinity();
    double misfit = std::numeric_limits<double>::infinity();
    double penalty = 0.0;
    bool feasible = false;
    bool clamped = false;
    std::string diagnostic;
};

/// Misfit plus lambda * perimeter for one parameter vector, with a cache keyed
/// by the rasterised node labels (shapes with equal rasters share one solve).
class ObjectiveEvaluator {
public:
    ObjectiveEvaluator(const InverseProblemSpec& spec, const ForwardScenario& scenario);

    ObjectiveValue operator()(std::span<const double> params);
    int evaluations() const { return evaluations_; }
    int solves() const { return solves_; }

private:
    double misfit_for(const NodeClassification& cls);

    const InverseProblemSpec& spec_;
    const ForwardScenario& scenario_;
    Observation data_;
    std::map<std::vector<NodeLabel>, double> cache_;
    int evaluations_ = 0;
    int solves_ = 0;
};

/// Single evaluation without caching.
ObjectiveValue objective(std::span<const double> params, const InverseProblemSpec& spec,
                         const ForwardScenario& scenario);

struct TraceRow {
    int iteration = 0;
    int start = 0;
    std::vector<double> params;
    double objective = 0.0;
    double best_so_far = 0.0;
};

struct StartSummary {
    int start = 0;
    std::vector<double> initial;
    std::vector<double> best;
    double best_objective = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    bool converged = false;
};

struct ReconstructionResult {
    std::vector<double> best_params;
    StarShape best_shape;
    double misfit = std::numeric_limits<double>::infinity();
    double objective = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    int solves = 0;
    std::vector<TraceRow> trace;
    std::vector<StartSummary> starts;
    /// Some start ran out of evaluations before its simplex collapsed.
    bool budget_exhausted = false;
};

/// Multi-start Nelder-Mead in normalised box coordinates. Start 0 is the box
/// centre, the others are seeded uniform draws; the evaluation budget is split
/// evenly across starts. Deterministic for a given seed.
ReconstructionResult reconstruct(const InverseProblemSpec& spec, const ForwardScenario& scenario);

/// Everything about an experiment except the cavity and the operator.
struct Design {
    /// Source built on a given grid (sources with sampled parts depend on it).
    std::function<std::optional<SourceSpec>(const Grid&)> source;
    std::optional<BoundaryInput> boundary;
    /// Initial data for the first and second cavity.
    SpatialProfile u0_first;
    SpatialProfile u0_second;
    TimeGrid time;
    BoundaryModes modes;
    Region region;
    ObservationKind kind = ObservationKind::ConormalOnGamma;
    double window = 0.0;
    Quadrature quadrature = Quadrature::Trapezoid;
    std::vector<Region> exclusion_zones;
};

struct DistinguishReport {
    double gap = 0.0;
    double floor = 0.0;           // max of the two below
    double measured_floor = 0.0;  // first cavity at h against h/2
    double algebraic_floor = 0.0; // 1e-10 relative offset on every sample
    double ratio = 0.0;
    std::string verdict;
    std::size_t samples = 0;
    HypothesisReport hypotheses;
    std::optional<double> commutator;
    bool commutator_ok = true;
    Observation first;
    Observation second;

    std::string text() const;
};

/// Verdict for a gap/floor ratio: INDISTINGUISHABLE (<= 3), DISTINGUISHABLE (> 10)
/// or INCONCLUSIVE.
std::string verdict_for(double ratio);

/// Solves for both cavities with one operator, measures the observation gap and
/// the same-cavity discretisation floor (h against h/2, same time grid).
DistinguishReport distinguishability(const CavityShape& d1, const CavityShape& d2, const EllipticOperator& op,
                                     const Design& design, const Grid& grid);

/// As distinguishability with a different operator per cavity; also reports the
/// commutator norm on a bank of bumps clear of both cavities.
DistinguishReport q2_distinguishability(const CavityShape& d1, const CavityShape& d2, const EllipticOperator& op1,
                                        const EllipticOperator& op2, const Design& design, const Grid& grid);

/// Grid with the same box and half the spacing.
Grid refine(const Grid& g);

}  // namespace cavlab
