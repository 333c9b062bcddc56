#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cavlab/geometry.hpp"
#include "cavlab/inverse.hpp"
#include "cavlab/observe.hpp"

namespace cavlab {

/// Ordered key=value lines. Doubles are written with 17 significant digits so
/// equal runs produce equal bytes.
class Summary {
public:
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, const char* value) { add(key, std::string(value)); }
    void add(const std::string& key, double value);
    void add(const std::string& key, int value);
    void add(const std::string& key, std::size_t value);
    void add(const std::string& key, bool value);
    /// Appends key=value lines from text such as DistinguishReport::text(), with a key prefix.
    void add_lines(const std::string& text, const std::string& prefix = "");

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    std::string get(const std::string& key) const;
    std::string text() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Columns x, y, u for every node that carries a value (cavity nodes skipped).
void write_field_csv(const std::filesystem::path& path, const NodeClassification& cls, std::span<const double> u);

/// Binary PGM (P5), row 0 at the top (largest y). Values scaled linearly from
/// [min, max] over the non-cavity nodes to 1..255; cavity nodes are 0.
void write_pgm(const std::filesystem::path& path, const NodeClassification& cls, std::span<const double> u);

/// Header comments carry kind, region and seed; columns loc_index, x, y, t, value.
void write_observation_csv(const std::filesystem::path& path, const Observation& obs, std::uint64_t seed);

/// Columns iteration, start, p0..p{d-1}, objective, best_so_far.
void write_trace_csv(const std::filesystem::path& path, const ReconstructionResult& result);

}  // namespace cavlab
