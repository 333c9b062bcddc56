#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cavlab/forward.hpp"
#include "cavlab/inverse.hpp"
#include "cavlab/observe.hpp"
#include "cavlab/sources.hpp"

namespace cavlab {

inline constexpr int kScenarioSchema = 1;

struct SourceConfig {
    enum class Form { Jump, Separable, Counterexample };
    Form form = Form::Jump;
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
    bool claims_jump = true;
    double ramp_width = 0.0;
    TimeProfile mu;
    std::vector<std::string> exclusion;
    /// Operator applied to f0 by the counterexample form.
    std::string op;
};

struct ExperimentConfig {
    std::string first;
    std::string second;
    std::string op;
    std::string second_op;
    std::string region;
    ObservationKind kind = ObservationKind::ConormalOnGamma;
    double window = 0.0;
    Quadrature quadrature = Quadrature::Trapezoid;
    /// "distinguishable", "indistinguishable" or empty for the command default.
    std::string expect;
    double noise_level = 0.0;
};

struct InverseConfig {
    std::string truth;
    ShapeParameterization param;
    U0Policy policy = U0Policy::Windowed;
    double window = 0.0;
    double lambda = 0.0;
    OptimizerSettings optimizer;
    double noise = 0.0;
    SpatialProfile data_initial;
    int joint_basis = 4;
};

struct SweepConfig {
    std::string axis;
    std::vector<double> values;
};

/// A fully resolved experiment description. Every name referenced by the
/// experiment, source and inverse sections exists.
struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    Grid grid;
    std::map<std::string, CavityShape> shapes;
    std::map<std::string, EllipticOperator> operators;
    std::map<std::string, Region> regions;
    std::optional<SourceConfig> source;
    std::optional<BoundaryInput> boundary;
    std::optional<NeumannInput> neumann;
    SpatialProfile u0_first;
    SpatialProfile u0_second;
    bool u0_first_zero = true;
    bool u0_second_zero = true;
    TimeGrid time;
    BoundaryModes modes;
    ExperimentConfig experiment;
    std::optional<InverseConfig> inverse;
    std::optional<SweepConfig> sweep;
    nlohmann::json raw;

    const CavityShape& shape(const std::string& name) const;
    const EllipticOperator& op(const std::string& name) const;
    const Region& region(const std::string& name) const;
    std::vector<Region> exclusion_zones() const;
    /// Candidate cavities of the experiment (first, second, inverse truth).
    std::vector<CavityShape> candidates() const;
    /// Validated source on the given grid, if the scenario has one.
    std::optional<SourceSpec> build_source(const Grid& g) const;
};

/// Throws CONFIG_PARSE (with the offending key path) or MISSING_REFERENCE.
Scenario parse_scenario(const nlohmann::json& j);
/// Parses text; JSON syntax errors are reported with line and column.
nlohmann::json read_json(const std::string& text, const std::string& origin);
Scenario load_scenario_file(const std::filesystem::path& path);

std::vector<std::string> preset_cases();
/// JSON text of a built-in case; aliases such as "bang-bang" resolve to the
/// canonical name. Throws MISSING_REFERENCE for unknown names.
std::string preset_case_text(const std::string& name);
std::string canonical_case_name(const std::string& name);

/// Reads or writes a numeric value at a dotted path such as
/// "source.breakpoints.1"; throws BAD_AXIS when the path does not name a number.
double json_number_at(const nlohmann::json& j, const std::string& path);
void set_json_number_at(nlohmann::json& j, const std::string& path, double value);

}  // namespace cavlab
