#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cavlab/geometry.hpp"

namespace cavlab {

/// Which one-sided limit to take at a breakpoint.
enum class Side { Left, Right };

/// Piecewise polynomial in absolute time. Piece k lives on (breaks[k], breaks[k+1])
/// with the last piece unbounded to the right; the function is zero before
/// breaks[0]. Coefficients are in ascending powers of t.
class PiecewisePolynomial {
public:
    PiecewisePolynomial() = default;
    PiecewisePolynomial(std::vector<double> breaks, std::vector<std::vector<double>> pieces);

    static PiecewisePolynomial constant(double value, double start = 0.0);

    double operator()(double t, Side side = Side::Right) const;
    PiecewisePolynomial derivative() const;
    /// Antiderivative vanishing at breaks[0], continuous at every breakpoint.
    PiecewisePolynomial integral() const;
    /// Jump of the order-th derivative across breaks[k] (right minus left limit).
    double jump(int order, std::size_t k) const;
    /// Lowest derivative order that jumps at breaks[k], up to max_order; nullopt if none.
    std::optional<int> discontinuity_order(std::size_t k, int max_order = 8) const;
    int degree() const;

    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<std::vector<double>>& pieces() const { return pieces_; }

private:
    static double eval_poly(const std::vector<double>& c, double t);
    std::optional<std::size_t> piece_at(double t, Side side) const;

    std::vector<double> breaks_;
    std::vector<std::vector<double>> pieces_;
};

/// Scalar time profile mu(t): piecewise polynomial or amplitude * exp(rate t).
class TimeProfile {
public:
    struct Exponential {
        double amplitude = 1.0;
        double rate = 0.0;
    };

    TimeProfile() : repr_(PiecewisePolynomial::constant(1.0, -1e300)) {}
    explicit TimeProfile(PiecewisePolynomial p) : repr_(std::move(p)) {}
    explicit TimeProfile(Exponential e) : repr_(e) {}

    static TimeProfile constant(double value) { return TimeProfile(PiecewisePolynomial::constant(value, -1e300)); }

    double value(double t, Side side = Side::Right) const;
    double derivative(double t, Side side = Side::Right) const;
    bool is_piecewise_polynomial() const { return std::holds_alternative<PiecewisePolynomial>(repr_); }
    const PiecewisePolynomial* polynomial() const { return std::get_if<PiecewisePolynomial>(&repr_); }
    /// Breakpoints that a time grid must resolve.
    std::vector<double> breakpoints() const;

private:
    std::variant<PiecewisePolynomial, Exponential> repr_;
};

/// Spatial field given either in closed form or sampled on the nodes of a grid.
class SpatialProfile {
public:
    using Fn = std::function<double(double, double)>;

    SpatialProfile() : SpatialProfile(zero()) {}

    static SpatialProfile closed(std::string name, Fn fn);
    static SpatialProfile sampled(std::string name, const Grid& grid, std::vector<double> values);
    static SpatialProfile zero();
    static SpatialProfile constant(double value);

    double operator()(double x, double y) const;
    const std::string& name() const { return name_; }
    bool is_identically_zero() const { return zero_; }
    bool is_constant() const { return constant_.has_value(); }
    std::optional<double> constant_value() const { return constant_; }
    bool is_sampled() const { return sampled_ != nullptr; }

    /// Values at every node of the grid.
    std::vector<double> sample(const Grid& grid) const;

private:
    struct Raw {};
    explicit SpatialProfile(Raw) {}

    struct Samples {
        Grid grid;
        std::vector<double> values;
    };

    std::string name_;
    Fn fn_;
    std::shared_ptr<const Samples> sampled_;
    bool zero_ = false;
    std::optional<double> constant_;
};

/// Named closed-form presets. Parameters not listed fall back to defaults;
/// unknown parameter names are rejected by the scenario loader, not here.
///
///   zero                          0
///   constant      value           value
///   one_plus_x    scale=1         1 + scale * x
///   one_plus_y    scale=1         1 + scale * y
///   sinsin        amplitude=1,kx=1,ky=1   amplitude sin(2 pi kx x) sin(2 pi ky y)
///   bump          cx,cy,radius,amplitude=1   amplitude exp(1 - 1/(1 - r^2/R^2)) for r < R
///   indicator     x0,y0,x1,y1,value=1   value on the closed rectangle, 0 elsewhere
///   collar        x0,y0,x1,y1,width,value=1   value * smoothstep(d / width), d = distance
///                                 outside the rectangle (0 inside it)
///   fourier       x_min,x_max,y_min,y_max,modes=3,amplitude=1,seed=1
///                 sum_{k,l<=modes} c_kl sin(k pi X) sin(l pi Y) with seeded c_kl in
///                 [-1,1]/(k l), X, Y the coordinates scaled to [0,1]
SpatialProfile preset_profile(std::string_view name, const std::map<std::string, double>& params);
std::vector<std::string> preset_names();
std::vector<std::string> preset_parameters(std::string_view name);

/// C^1 cubic cutoff 1 - 3 s^2 + 2 s^3 on [0,1], 1 below and 0 above.
double cubic_cutoff(double s);
/// C-infinity step from 0 (s <= 0) to 1 (s >= 1).
double smooth_step(double s);

}  // namespace cavlab
