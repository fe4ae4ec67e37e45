#pragma once

// Serialization of metric reports. Private to the library.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "pconv/metrics.hpp"
#include "pconv/trainer.hpp"

namespace pconv::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

json to_json(const PerturbVariant& v);
json to_json(const ModeCoverageReport& r);
json to_json(const MemorizationReport& r);
json to_json(const DeltaYReport& r);
json to_json(const ProbMap& p);

/// Writes through a temporary file and a rename. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// 20 x 20 count grid, one CSV row per y cell from low to high.
std::string probmap_csv(const ProbMap& p);

/// Scatter of n x 2 points over [lo, hi]^2 with optional marker centers.
std::string svg_scatter(const Tensor& points, const std::vector<std::array<double, 2>>& centers, double lo, double hi,
                        const std::string& title);
/// Grey-scale heat map of a probmap (log counts).
std::string svg_heatmap(const ProbMap& p, const std::string& title);

/// Numeric CSV with optional header line; rows of equal length.
Tensor read_csv_matrix(const std::filesystem::path& path);
std::string matrix_csv(const Tensor& m);

}  // namespace pconv::io
