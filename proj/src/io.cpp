#include "cavlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "cavlab/error.hpp"

namespace cavlab {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

void Summary::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }
void Summary::add(const std::string& key, double value) { add(key, format_double(value)); }
void Summary::add(const std::string& key, int value) { add(key, std::to_string(value)); }
void Summary::add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
void Summary::add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }

void Summary::add_lines(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        add(prefix + line.substr(0, eq), line.substr(eq + 1));
    }
}

std::string Summary::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return {};
}

std::string Summary::text() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw Error(ErrorCode::InvalidSpec, fmt::format("cannot write {}", path.string()));
    return f;
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto f = open_out(path);
    f << text;
}

void write_field_csv(const std::filesystem::path& path, const NodeClassification& cls, std::span<const double> u) {
    auto f = open_out(path);
    f << "x,y,u\n";
    const Grid& g = cls.grid;
    for (int n = 0; n < g.size(); ++n) {
        if (cls.is_cavity(n)) continue;
        f << format_double(g.x(g.i_of(n))) << ',' << format_double(g.y(g.j_of(n))) << ','
          << format_double(u[static_cast<std::size_t>(n)]) << '\n';
    }
}

void write_pgm(const std::filesystem::path& path, const NodeClassification& cls, std::span<const double> u) {
    const Grid& g = cls.grid;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int n = 0; n < g.size(); ++n) {
        if (cls.is_cavity(n)) continue;
        lo = std::min(lo, u[static_cast<std::size_t>(n)]);
        hi = std::max(hi, u[static_cast<std::size_t>(n)]);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    auto f = open_out(path, true);
    f << "P5\n" << g.nx << ' ' << g.ny << "\n255\n";
    for (int j = g.ny - 1; j >= 0; --j) {
        for (int i = 0; i < g.nx; ++i) {
            const int n = g.index(i, j);
            unsigned char px = 0;
            if (!cls.is_cavity(n))
                px = static_cast<unsigned char>(1 + std::lround(254.0 * (u[static_cast<std::size_t>(n)] - lo) / span));
            f.put(static_cast<char>(px));
        }
    }
}

void write_observation_csv(const std::filesystem::path& path, const Observation& obs, std::uint64_t seed) {
    auto f = open_out(path);
    f << "# kind=" << to_string(obs.kind) << '\n';
    f << "# region=" << obs.region << '\n';
    f << "# seed=" << seed << '\n';
    if (obs.noise) f << "# noise_level=" << format_double(obs.noise->level) << " noise_seed=" << obs.noise->seed << '\n';
    f << "loc_index,x,y,t,value\n";
    for (std::size_t l = 0; l < obs.locations.size(); ++l) {
        const auto& loc = obs.locations[l];
        for (std::size_t t = 0; t < obs.stamps.size(); ++t)
            f << l << ',' << format_double(loc.x) << ',' << format_double(loc.y) << ',' << format_double(obs.stamps[t])
              << ',' << format_double(obs.values[l][t]) << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const ReconstructionResult& result) {
    auto f = open_out(path);
    const std::size_t d = result.trace.empty() ? 0 : result.trace.front().params.size();
    f << "iteration,start";
    for (std::size_t k = 0; k < d; ++k) f << ",p" << k;
    f << ",objective,best_so_far\n";
    for (const auto& row : result.trace) {
        f << row.iteration << ',' << row.start;
        for (double p : row.params) f << ',' << format_double(p);
        f << ',' << format_double(row.objective) << ',' << format_double(row.best_so_far) << '\n';
    }
}

}  // namespace cavlab
