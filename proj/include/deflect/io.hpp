#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "deflect/measurement.hpp"

namespace deflect {

// Writes "x,y,value" (or "p_x,p_y,value") rows, outer loop over x, with 17
// significant digits so doubles round-trip exactly.
void write_csv(const DistributionGrid& dist, const std::string& path);

// Same grid as JSON: axes plus a row-major value matrix.
nlohmann::json distribution_to_json(const DistributionGrid& dist);
void write_json(const nlohmann::json& doc, const std::string& path);

// 8-bit grayscale heatmap, black = 0, white = max value; rows run from
// y_max down to y_min so the image is in the usual plot orientation.
void write_png(const DistributionGrid& dist, const std::string& path);

// FNV-1a 64-bit hash, hex-encoded; used to name output directories for
// configs without a label.
std::string fnv1a64_hex(std::string_view data);

}  // namespace deflect
