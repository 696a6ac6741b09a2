#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dvf/field.hpp"
#include "dvf/geometry.hpp"
#include "dvf/mitigation.hpp"
#include "dvf/registration.hpp"
#include "dvf/scene.hpp"
#include "dvf/session.hpp"

namespace dvf::json {

using Json = nlohmann::ordered_json;

/// Decoders throw std::invalid_argument on missing keys, wrong types or
/// values that break the type's invariants.

Json to_json(const Point3& p);
Point3 point_from_json(const Json& j);

/// {"translation": [x,y,z], "rotation": [9 entries, row-major]}; lossless.
Json to_json(const RigidTransform& t);
RigidTransform transform_from_json(const Json& j);

Json to_json(const SphericalGridSpec& grid);
SphericalGridSpec grid_from_json(const Json& j);

Json to_json(const VoxelKey& key);
VoxelKey key_from_json(const Json& j);

/// {"kind": "...", "parameters": {...}}, angles in radians.
Json to_json(const Mitigation& m);
Mitigation mitigation_from_json(const Json& j);

Json to_json(const MitigationReport& r, bool with_indices = true);
MitigationReport report_from_json(const Json& j);

Json to_json(const FieldStats& s);
FieldStats stats_from_json(const Json& j);

/// Full precision; field_from_json(to_json(f)) == f.
Json to_json(const DiscrepancyField& f);
DiscrepancyField field_from_json(const Json& j);

Json to_json(const RegistrationResult& r);
RegistrationResult registration_from_json(const Json& j);

Json to_json(const MarkedRegion& r);
MarkedRegion region_from_json(const Json& j);

Json to_json(const RegionStats& s);

/// Scene file: {"primitives": [{"kind": "box", "center_x": ..., ...}, ...]}.
Json to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

/// Sensor file, angles in degrees: elevation_channels, elevation_min_deg,
/// elevation_max_deg, azimuth_steps, max_range, noise_sigma, noise_seed.
Json to_json(const SensorModel& s);
SensorModel sensor_from_json(const Json& j);

/// `v` rounded to `digits` significant decimal digits.
double round_significant(double v, int digits = 9);

/// Field export for the analyst UI: grid, stats and one record per voxel with
/// every float rounded to 9 significant digits.
Json field_export(const DiscrepancyField& field, std::optional<std::size_t> iteration = {});

/// Pretty-printed with a trailing newline; key order and float formatting are fixed.
std::string dump(const Json& j);

}  // namespace dvf::json
