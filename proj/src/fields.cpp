#include "cavlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "cavlab/error.hpp"

namespace cavlab {

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> breaks, std::vector<std::vector<double>> pieces)
    : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
    if (breaks_.size() != pieces_.size() || breaks_.empty())
        throw Error(ErrorCode::InvalidSpec, "piecewise polynomial needs one breakpoint per piece");
    for (std::size_t k = 1; k < breaks_.size(); ++k)
        if (!(breaks_[k] > breaks_[k - 1]))
            throw Error(ErrorCode::InvalidSpec, "piecewise polynomial breakpoints must increase");
}

PiecewisePolynomial PiecewisePolynomial::constant(double value, double start) {
    return PiecewisePolynomial({start}, {{value}});
}

double PiecewisePolynomial::eval_poly(const std::vector<double>& c, double t) {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
    return v;
}

std::optional<std::size_t> PiecewisePolynomial::piece_at(double t, Side side) const {
    if (breaks_.empty()) return std::nullopt;
    if (t < breaks_.front() || (t == breaks_.front() && side == Side::Left)) return std::nullopt;
    std::size_t k = 0;
    while (k + 1 < breaks_.size()) {
        const double b = breaks_[k + 1];
        if (t < b || (t == b && side == Side::Left)) break;
        ++k;
    }
    return k;
}

double PiecewisePolynomial::operator()(double t, Side side) const {
    const auto k = piece_at(t, side);
    return k ? eval_poly(pieces_[*k], t) : 0.0;
}

PiecewisePolynomial PiecewisePolynomial::derivative() const {
    auto pieces = pieces_;
    for (auto& c : pieces) {
        if (c.size() <= 1) {
            c.assign(1, 0.0);
            continue;
        }
        for (std::size_t j = 1; j < c.size(); ++j) c[j - 1] = static_cast<double>(j) * c[j];
        c.pop_back();
    }
    return {breaks_, std::move(pieces)};
}

PiecewisePolynomial PiecewisePolynomial::integral() const {
    std::vector<std::vector<double>> pieces;
    pieces.reserve(pieces_.size());
    double carry = 0.0;  // value of the antiderivative at the left end of the piece
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        std::vector<double> c(pieces_[k].size() + 1, 0.0);
        for (std::size_t j = 0; j < pieces_[k].size(); ++j) c[j + 1] = pieces_[k][j] / static_cast<double>(j + 1);
        c[0] = carry - eval_poly(c, breaks_[k]);
        if (k + 1 < breaks_.size()) carry = eval_poly(c, breaks_[k + 1]);
        pieces.push_back(std::move(c));
    }
    return {breaks_, std::move(pieces)};
}

double PiecewisePolynomial::jump(int order, std::size_t k) const {
    PiecewisePolynomial d = *this;
    for (int o = 0; o < order; ++o) d = d.derivative();
    const double t = breaks_.at(k);
    return d(t, Side::Right) - d(t, Side::Left);
}

std::optional<int> PiecewisePolynomial::discontinuity_order(std::size_t k, int max_order) const {
    PiecewisePolynomial d = *this;
    const double t = breaks_.at(k);
    for (int o = 0; o <= max_order; ++o) {
        const double right = d(t, Side::Right);
        const double left = d(t, Side::Left);
        const double scale = std::max({1.0, std::abs(right), std::abs(left)});
        if (std::abs(right - left) > 1e-12 * scale) return o;
        d = d.derivative();
    }
    return std::nullopt;
}

int PiecewisePolynomial::degree() const {
    int deg = 0;
    for (const auto& c : pieces_) {
        for (int j = static_cast<int>(c.size()) - 1; j > deg; --j) {
            if (c[static_cast<std::size_t>(j)] != 0.0) {
                deg = j;
                break;
            }
        }
    }
    return deg;
}

double TimeProfile::value(double t, Side side) const {
    if (const auto* p = std::get_if<PiecewisePolynomial>(&repr_)) return (*p)(t, side);
    const auto& e = std::get<Exponential>(repr_);
    return e.amplitude * std::exp(e.rate * t);
}

double TimeProfile::derivative(double t, Side side) const {
    if (const auto* p = std::get_if<PiecewisePolynomial>(&repr_)) return p->derivative()(t, side);
    const auto& e = std::get<Exponential>(repr_);
    return e.amplitude * e.rate * std::exp(e.rate * t);
}

std::vector<double> TimeProfile::breakpoints() const {
    std::vector<double> out;
    if (const auto* p = std::get_if<PiecewisePolynomial>(&repr_))
        for (double b : p->breaks())
            if (b > -1e299) out.push_back(b);
    return out;
}

SpatialProfile SpatialProfile::closed(std::string name, Fn fn) {
    SpatialProfile p = zero();
    p.name_ = std::move(name);
    p.fn_ = std::move(fn);
    p.zero_ = false;
    p.constant_.reset();
    return p;
}

SpatialProfile SpatialProfile::sampled(std::string name, const Grid& grid, std::vector<double> values) {
    if (values.size() != static_cast<std::size_t>(grid.size()))
        throw Error(ErrorCode::ShapeMismatch, "sampled profile size does not match the grid");
    SpatialProfile p = zero();
    p.name_ = std::move(name);
    p.zero_ = std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
    p.constant_.reset();
    p.sampled_ = std::make_shared<const Samples>(Samples{grid, std::move(values)});
    p.fn_ = nullptr;
    return p;
}

SpatialProfile SpatialProfile::zero() {
    SpatialProfile p = constant(0.0);
    p.name_ = "zero";
    p.zero_ = true;
    return p;
}

SpatialProfile SpatialProfile::constant(double value) {
    SpatialProfile p{Raw{}};
    p.name_ = fmt::format("constant({})", value);
    p.fn_ = [value](double, double) { return value; };
    p.zero_ = value == 0.0;
    p.constant_ = value;
    return p;
}

double SpatialProfile::operator()(double x, double y) const {
    if (sampled_) {
        const auto node = sampled_->grid.node_at(x, y);
        if (!node)
            throw Error(ErrorCode::Unsupported,
                        fmt::format("sampled profile '{}' evaluated off its grid at ({}, {})", name_, x, y));
        return sampled_->values[static_cast<std::size_t>(*node)];
    }
    return fn_(x, y);
}

std::vector<double> SpatialProfile::sample(const Grid& grid) const {
    std::vector<double> out(static_cast<std::size_t>(grid.size()));
    for (int n = 0; n < grid.size(); ++n) out[static_cast<std::size_t>(n)] = (*this)(grid.x(grid.i_of(n)), grid.y(grid.j_of(n)));
    return out;
}

double cubic_cutoff(double s) {
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
}

double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

namespace {

struct PresetInfo {
    std::vector<std::string> params;
};

const std::map<std::string, PresetInfo, std::less<>>& registry() {
    static const std::map<std::string, PresetInfo, std::less<>> r{
        {"zero", {{}}},
        {"constant", {{"value"}}},
        {"one_plus_x", {{"scale"}}},
        {"one_plus_y", {{"scale"}}},
        {"sinsin", {{"amplitude", "kx", "ky"}}},
        {"bump", {{"cx", "cy", "radius", "amplitude"}}},
        {"indicator", {{"x0", "y0", "x1", "y1", "value"}}},
        {"collar", {{"x0", "y0", "x1", "y1", "width", "value"}}},
        {"fourier", {{"x_min", "x_max", "y_min", "y_max", "modes", "amplitude", "seed"}}},
    };
    return r;
}

double get(const std::map<std::string, double>& p, const std::string& key, std::optional<double> fallback,
           std::string_view preset) {
    if (auto it = p.find(key); it != p.end()) return it->second;
    if (fallback) return *fallback;
    throw Error(ErrorCode::ConfigParse, fmt::format("preset '{}' requires parameter '{}'", preset, key));
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : registry()) out.push_back(k);
    return out;
}

std::vector<std::string> preset_parameters(std::string_view name) {
    const auto it = registry().find(name);
    if (it == registry().end()) throw Error(ErrorCode::ConfigParse, fmt::format("unknown profile preset '{}'", name));
    return it->second.params;
}

SpatialProfile preset_profile(std::string_view name, const std::map<std::string, double>& p) {
    using std::numbers::pi;
    preset_parameters(name);  // rejects unknown names
    if (name == "zero") return SpatialProfile::zero();
    if (name == "constant") return SpatialProfile::constant(get(p, "value", std::nullopt, name));
    if (name == "one_plus_x") {
        const double s = get(p, "scale", 1.0, name);
        return SpatialProfile::closed(fmt::format("one_plus_x(scale={})", s), [s](double x, double) { return 1.0 + s * x; });
    }
    if (name == "one_plus_y") {
        const double s = get(p, "scale", 1.0, name);
        return SpatialProfile::closed(fmt::format("one_plus_y(scale={})", s), [s](double, double y) { return 1.0 + s * y; });
    }
    if (name == "sinsin") {
        const double amp = get(p, "amplitude", 1.0, name);
        const double kx = get(p, "kx", 1.0, name);
        const double ky = get(p, "ky", 1.0, name);
        return SpatialProfile::closed(fmt::format("sinsin(amplitude={},kx={},ky={})", amp, kx, ky),
                                      [=](double x, double y) {
                                          return amp * std::sin(2.0 * pi * kx * x) * std::sin(2.0 * pi * ky * y);
                                      });
    }
    if (name == "bump") {
        const double cx = get(p, "cx", std::nullopt, name);
        const double cy = get(p, "cy", std::nullopt, name);
        const double r = get(p, "radius", std::nullopt, name);
        const double amp = get(p, "amplitude", 1.0, name);
        if (!(r > 0.0)) throw Error(ErrorCode::InvalidSpec, "bump radius must be positive");
        return SpatialProfile::closed(fmt::format("bump(cx={},cy={},radius={},amplitude={})", cx, cy, r, amp),
                                      [=](double x, double y) {
                                          const double q = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (r * r);
                                          return q < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
                                      });
    }
    if (name == "indicator") {
        const double x0 = get(p, "x0", std::nullopt, name), y0 = get(p, "y0", std::nullopt, name);
        const double x1 = get(p, "x1", std::nullopt, name), y1 = get(p, "y1", std::nullopt, name);
        const double v = get(p, "value", 1.0, name);
        return SpatialProfile::closed(fmt::format("indicator({},{})x({},{})", x0, x1, y0, y1),
                                      [=](double x, double y) {
                                          return (x >= x0 && x <= x1 && y >= y0 && y <= y1) ? v : 0.0;
                                      });
    }
    if (name == "collar") {
        const double x0 = get(p, "x0", std::nullopt, name), y0 = get(p, "y0", std::nullopt, name);
        const double x1 = get(p, "x1", std::nullopt, name), y1 = get(p, "y1", std::nullopt, name);
        const double w = get(p, "width", std::nullopt, name);
        const double v = get(p, "value", 1.0, name);
        if (!(w > 0.0)) throw Error(ErrorCode::InvalidSpec, "collar width must be positive");
        return SpatialProfile::closed(fmt::format("collar(({},{})x({},{}),width={})", x0, x1, y0, y1, w),
                                      [=](double x, double y) {
                                          const double dx = std::max({x0 - x, 0.0, x - x1});
                                          const double dy = std::max({y0 - y, 0.0, y - y1});
                                          const double d = std::hypot(dx, dy);
                                          return d > 0.0 ? v * (1.0 - cubic_cutoff(d / w)) : 0.0;
                                      });
    }
    // fourier
    const double xa = get(p, "x_min", std::nullopt, name), xb = get(p, "x_max", std::nullopt, name);
    const double ya = get(p, "y_min", std::nullopt, name), yb = get(p, "y_max", std::nullopt, name);
    const int modes = static_cast<int>(get(p, "modes", 3.0, name));
    const double amp = get(p, "amplitude", 1.0, name);
    const auto seed = static_cast<std::uint64_t>(get(p, "seed", 1.0, name));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> c(static_cast<std::size_t>(modes * modes));
    for (int k = 1; k <= modes; ++k)
        for (int l = 1; l <= modes; ++l) c[static_cast<std::size_t>((k - 1) * modes + l - 1)] = amp * unif(rng) / (k * l);
    return SpatialProfile::closed(fmt::format("fourier(modes={},amplitude={},seed={})", modes, amp, seed),
                                  [=](double x, double y) {
                                      const double X = (x - xa) / (xb - xa);
                                      const double Y = (y - ya) / (yb - ya);
                                      double v = 0.0;
                                      for (int k = 1; k <= modes; ++k)
                                          for (int l = 1; l <= modes; ++l)
                                              v += c[static_cast<std::size_t>((k - 1) * modes + l - 1)] *
                                                   std::sin(k * pi * X) * std::sin(l * pi * Y);
                                      return v;
                                  });
}

}  // namespace cavlab
