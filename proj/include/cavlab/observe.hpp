#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cavlab/forward.hpp"
#include "cavlab/geometry.hpp"
#include "cavlab/operators.hpp"

namespace cavlab {

enum class ObservationKind { ConormalOnGamma, InteriorOnOmega };
std::string to_string(ObservationKind k);

struct ObservationLocation {
    int node = 0;
    double x = 0.0;
    double y = 0.0;
};

struct NoiseDescriptor {
    double level = 0.0;
    std::uint64_t seed = 0;
};

/// Time series at ordered locations; values[loc][time].
struct Observation {
    ObservationKind kind = ObservationKind::ConormalOnGamma;
    std::string region;
    std::vector<ObservationLocation> locations;
    std::vector<double> stamps;
    std::vector<std::vector<double>> values;
    /// Grid spacing of the producing field, used for the spatial quadrature weight.
    double spacing = 1.0;
    std::optional<NoiseDescriptor> noise;

    std::size_t samples() const { return locations.size() * stamps.size(); }
    double max_abs() const;
};

/// Conormal traces on gamma (per stored time) or values at the FLUID nodes of omega.
/// Throws REGION_KIND_MISMATCH when the region does not fit the kind.
Observation extract(const SpaceTimeField& field, const Region& region, const EllipticOperator& op,
                    ObservationKind kind);

/// Keeps the stamps t >= delta (up to 1e-12 relative).
Observation crop(const Observation& obs, double delta);

/// Samples a finer observation at the locations and stamps of a coarser one,
/// matching coordinates to 1e-9. Throws SHAPE_MISMATCH if a point is missing.
Observation restrict_to(const Observation& fine, const Observation& coarse);

/// Adds i.i.d. N(0, (level * rms)^2) noise drawn from a seeded mt19937_64.
Observation add_noise(const Observation& obs, double level, std::uint64_t seed);

enum class Quadrature {
    /// Trapezoid in time times h (conormal) or h^2 (interior) in space.
    Trapezoid,
    /// All weights 1.
    Unit,
};

/// 1/2 sum w_loc w_t (a - b)^2. Throws SHAPE_MISMATCH unless kinds, locations and
/// stamps agree.
double misfit(const Observation& a, const Observation& b, Quadrature q = Quadrature::Trapezoid);

/// Per-sample weights w_loc w_t, flattened location-major like values.
std::vector<double> sample_weights(const Observation& obs, Quadrature q = Quadrature::Trapezoid);

/// Sum of all quadrature weights; 1/2 eps^2 total_weight is the misfit of a
/// uniform offset eps.
double total_weight(const Observation& obs, Quadrature q = Quadrature::Trapezoid);

}  // namespace cavlab
