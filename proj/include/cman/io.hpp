#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cman/pipeline.hpp"

namespace cman {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);
/// One bit per node, least significant bit first within each byte.
std::string encode_mask(const std::vector<std::uint8_t>& mask);
std::vector<std::uint8_t> decode_mask(const std::string& text, std::size_t count);

json to_json(const GridFunction& g);
GridFunction grid_from_json(const json& j);
json to_json(const Frame& f);
Frame frame_from_json(const json& j);

json to_json(const SampledCurrent& T);
/// Throws Error(input) on a missing or unsupported schema_version.
SampledCurrent current_from_json(const json& j);

json to_json(const LipApprox& A);
json to_json(const Interpolant& I);
json to_json(const BlendedSurface& H);

json to_json(const ConstantsConfig& c);
ConstantsConfig constants_from_json(const json& j);
json to_json(const SurfaceSpec& s);
SurfaceSpec surface_from_json(const json& j);
json to_json(const RunConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const json& j);

json to_json(const CertReport& r);
/// One row per check, preceded by a '#' line documenting the columns.
std::string report_csv(const CertReport& r);
/// One row per lattice node of Q: q1, q2, then per component h and its
/// partials of order 1..4.
std::string blended_csv(const BlendedSurface& H);
/// Rows (kind, r, plane_angles..., value) for excess reports.
std::string excess_csv(const std::vector<ExcessReport>& rows);

std::string read_file(const std::string& path);
/// Throws Error(io) on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace cman
