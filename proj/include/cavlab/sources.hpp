#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavlab/fields.hpp"
#include "cavlab/geometry.hpp"
#include "cavlab/operators.hpp"

namespace cavlab {

enum class SourceForm {
    /// d^m f / dt^m = a1 f0 + r1 on (t0, t1], a2 f0 + r2 on (t1, t2], zero afterwards.
    Jump,
    /// f = f0(x) mu(t).
    Separable,
};

/// External source f(x, t). The Jump form integrates the declared m-th time
/// derivative m times from f = 0 at t0, so f and its first m - 1 derivatives
/// stay continuous across t1 and t2. Remainders are r_k(x, t) = R_k(t) S_k(x)
/// with R_k a polynomial in absolute time (ascending coefficients, degree <= 6).
class SourceSpec {
public:
    SourceForm form = SourceForm::Jump;
    int m = 0;
    double t0 = 0.0;
    double t1 = 0.5;
    double t2 = 1.0;
    double a1 = 1.0;
    double a2 = 0.0;
    SpatialProfile f0;
    std::vector<double> r1_time;
    SpatialProfile r1_space;
    std::vector<double> r2_time;
    SpatialProfile r2_space;
    TimeProfile mu;
    /// m = 0 only: replace the switch at t1 by a C-infinity ramp of this width
    /// centred at t1. A ramped source no longer has a jump.
    double ramp_width = 0.0;
    /// Whether the spec asserts a jump of d^m f / dt^m at t1.
    bool claims_jump = true;
    /// Free-form marker carried into reports, e.g. NON_UNIQUENESS_DEMO.
    std::string tag;

    static SourceSpec bang_bang(SpatialProfile f0, double t0, double t1, double t2);
    static SourceSpec separable(SpatialProfile f0, TimeProfile mu);

    bool validated() const { return validated_; }
    /// Time-grid points the solver must hit exactly.
    std::vector<double> breakpoints() const;

private:
    friend void validate_source(SourceSpec& spec);
    friend double source_amplitude(const SourceSpec& spec, int term, double t, Side side, int order);

    bool validated_ = false;
    PiecewisePolynomial amp_f0_;
    PiecewisePolynomial amp_r1_;
    PiecewisePolynomial amp_r2_;
};

/// Structural checks; on success builds the integrated time factors and marks
/// the spec as validated. Throws INVALID_SPEC.
void validate_source(SourceSpec& spec);

/// Time factor of term 0 (f0), 1 (r1) or 2 (r2), differentiated `order` times.
double source_amplitude(const SourceSpec& spec, int term, double t, Side side = Side::Right, int order = 0);

/// f(x, t), one-sided at breakpoints. Throws UNVALIDATED_SPEC.
double eval_source(const SourceSpec& spec, double x, double y, double t, Side side = Side::Right);
/// d^order f / dt^order at (x, t).
double eval_source_derivative(const SourceSpec& spec, double x, double y, double t, int order,
                              Side side = Side::Right);

/// Spatial parts of a source sampled once on a grid, for the time stepper.
struct SampledSource {
    const SourceSpec* spec = nullptr;
    std::vector<double> f0;
    std::vector<double> r1;
    std::vector<double> r2;

    /// Writes f(., t) at the given nodes into out (indexed like nodes).
    void field(double t, Side side, std::span<const int> nodes, std::span<double> out) const;
};
SampledSource sample_source(const SourceSpec& spec, const Grid& grid);

struct HypothesisItem {
    std::string clause;
    bool pass = false;
    std::string detail;
};

struct HypothesisReport {
    std::vector<HypothesisItem> items;

    bool all_pass() const;
    /// Pass state of a clause; nullopt when the clause was not evaluated.
    std::optional<bool> passed(const std::string& clause) const;
    std::string text() const;
};

/// Itemised report for (7a), (7b), (7c) and, when omega is given, (7d).
/// Vanishing is checked exactly on every grid node of the closed cavities, of
/// the exclusion zones and of omega.
HypothesisReport validate_hypotheses(const SourceSpec& spec, const Grid& grid, std::span<const CavityShape> cavities,
                                     std::span<const Region> exclusion_zones, const Region* omega, double T);

/// Dirichlet data g(x, t) = g0(x) mu(t) on the outer boundary.
struct BoundaryInput {
    SpatialProfile g0;
    TimeProfile mu = TimeProfile::constant(1.0);
    /// Width of the collar that carries the lift.
    double collar_width = 0.0;
};

/// Lift g~ = g0(nearest boundary point) * cubic_cutoff(d / w), d the distance to
/// the outer boundary. Throws INVALID_SPEC when w < 2h and
/// COLLAR_OVERLAPS_CAVITY when the collar reaches a cavity.
SpatialProfile build_lift(const BoundaryInput& g, const Grid& grid, std::span<const CavityShape> cavities);

/// Homogenised source for v = u - mu g~ when mu is piecewise linear with a
/// single kink t1 in (0, T): f = -mu' g~ - mu A_h g~ in Jump form (m = 0).
/// The discrete operator is applied to the lift, so the lifted and direct
/// discrete problems agree exactly. Throws UNSUPPORTED for other mu.
SourceSpec lifted_source(const BoundaryInput& g, const SpatialProfile& lift, const EllipticOperator& op,
                         const Grid& grid, double T);

/// f = f0 + t A_h f0 with A_h the discrete operator, in Jump form with
/// a1 = a2 = 1, t0 = 0, t1 = T / 2, t2 = T, tagged NON_UNIQUENESS_DEMO.
/// Throws SUPPORT_TOO_CLOSE unless supp f0 stays two nodes away from the outer
/// boundary and from every cavity.
SourceSpec counterexample_source(const SpatialProfile& f0, const EllipticOperator& op, const Grid& grid,
                                 std::span<const CavityShape> cavities, double T);

}  // namespace cavlab
