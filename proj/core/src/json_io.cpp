#include "dvf/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace dvf::json {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing key '") + key + "'");
  return *it;
}

double number(const Json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number()) throw std::invalid_argument(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number(j, key);
}

template <class Int>
Int integer(const Json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number_integer()) {
    throw std::invalid_argument(std::string("'") + key + "' must be an integer");
  }
  if constexpr (std::is_unsigned_v<Int>) {
    if (v.get<long long>() < 0) {
      throw std::invalid_argument(std::string("'") + key + "' must be non-negative");
    }
  }
  return v.get<Int>();
}

std::string string(const Json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw std::invalid_argument(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

Json rounded(const Point3& p) {
  return Json::array({round_significant(p.x()), round_significant(p.y()), round_significant(p.z())});
}

Json indices_to_json(const std::vector<std::size_t>& v) {
  Json out = Json::array();
  for (const auto i : v) out.push_back(i);
  return out;
}

std::vector<std::size_t> indices_from_json(const Json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_array()) throw std::invalid_argument(std::string("'") + key + "' must be an array");
  std::vector<std::size_t> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number_unsigned()) throw std::invalid_argument("index must be non-negative");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

}  // namespace

Json to_json(const Point3& p) { return Json::array({p.x(), p.y(), p.z()}); }

Point3 point_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("point must be [x, y, z]");
  Point3 p;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("point coordinates must be numbers");
    p[i] = j[i].get<double>();
  }
  if (!is_finite(p)) throw std::invalid_argument("point must be finite");
  return p;
}

Json to_json(const RigidTransform& t) {
  Json rotation = Json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rotation.push_back(t.rotation()(r, c));
  }
  return Json{{"translation", to_json(t.translation())}, {"rotation", rotation}};
}

RigidTransform transform_from_json(const Json& j) {
  const Point3 t = point_from_json(require(j, "translation"));
  const auto& rot = require(j, "rotation");
  if (!rot.is_array() || rot.size() != 9) throw std::invalid_argument("rotation must have 9 entries");
  Eigen::Matrix3d r;
  for (int i = 0; i < 9; ++i) {
    if (!rot[i].is_number()) throw std::invalid_argument("rotation entries must be numbers");
    r(i / 3, i % 3) = rot[i].get<double>();
  }
  return RigidTransform::from_matrix(r, t);
}

Json to_json(const SphericalGridSpec& grid) {
  return Json{{"azimuth_bins", grid.azimuth_bins},
              {"elevation_bins", grid.elevation_bins},
              {"elevation_min", grid.elevation_min},
              {"elevation_max", grid.elevation_max},
              {"origin", to_json(grid.origin)}};
}

SphericalGridSpec grid_from_json(const Json& j) {
  SphericalGridSpec g;
  g.azimuth_bins = integer<int>(j, "azimuth_bins");
  g.elevation_bins = integer<int>(j, "elevation_bins");
  g.elevation_min = number(j, "elevation_min");
  g.elevation_max = number(j, "elevation_max");
  g.origin = point_from_json(require(j, "origin"));
  validate_grid(g);
  return g;
}

Json to_json(const VoxelKey& key) {
  return Json{{"azimuth_index", key.azimuth_index}, {"elevation_index", key.elevation_index}};
}

VoxelKey key_from_json(const Json& j) {
  return {integer<int>(j, "azimuth_index"), integer<int>(j, "elevation_index")};
}

Json to_json(const Mitigation& m) {
  Json params = std::visit(
      Overloaded{
          [](const EgoRemoval& e) { return Json{{"radius", e.radius}}; },
          [](const FovFilter& f) {
            return Json{{"elevation_min", f.elevation_min},
                        {"elevation_max", f.elevation_max},
                        {"max_range", f.max_range}};
          },
          [](const ShadowFilter& s) {
            return Json{{"azimuth_resolution", s.azimuth_resolution},
                        {"elevation_resolution", s.elevation_resolution},
                        {"range_margin", s.range_margin},
                        {"elevation_phase", s.elevation_phase}};
          },
      },
      m);
  return Json{{"kind", to_string(kind_of(m))}, {"parameters", std::move(params)}};
}

Mitigation mitigation_from_json(const Json& j) {
  const std::string kind = string(j, "kind");
  const Json& p = require(j, "parameters");
  if (!p.is_object()) throw std::invalid_argument("'parameters' must be an object");
  Mitigation m;
  if (kind == "ego_removal") {
    m = EgoRemoval{number_or(p, "radius", EgoRemoval{}.radius)};
  } else if (kind == "fov_filter") {
    m = FovFilter{number(p, "elevation_min"), number(p, "elevation_max"),
                  number_or(p, "max_range", FovFilter{}.max_range)};
  } else if (kind == "shadow_filter") {
    m = ShadowFilter{number(p, "azimuth_resolution"), number(p, "elevation_resolution"),
                     number_or(p, "range_margin", ShadowFilter{}.range_margin),
                     number_or(p, "elevation_phase", 0.0)};
  } else {
    throw std::invalid_argument("unknown mitigation kind '" + kind + "'");
  }
  validate_mitigation(m);
  return m;
}

Json to_json(const MitigationReport& r, bool with_indices) {
  Json j{{"kind", to_string(r.kind)},
         {"removed_from_cloud1", r.removed_from_cloud1},
         {"removed_from_cloud2", r.removed_from_cloud2}};
  if (with_indices) {
    j["removed_indices1"] = indices_to_json(r.removed_indices1);
    j["removed_indices2"] = indices_to_json(r.removed_indices2);
  }
  return j;
}

MitigationReport report_from_json(const Json& j) {
  MitigationReport r;
  const std::string kind = string(j, "kind");
  if (kind == "ego_removal") {
    r.kind = MitigationKind::kEgoRemoval;
  } else if (kind == "fov_filter") {
    r.kind = MitigationKind::kFovFilter;
  } else if (kind == "shadow_filter") {
    r.kind = MitigationKind::kShadowFilter;
  } else {
    throw std::invalid_argument("unknown report kind '" + kind + "'");
  }
  r.removed_indices1 = indices_from_json(j, "removed_indices1");
  r.removed_indices2 = indices_from_json(j, "removed_indices2");
  r.removed_from_cloud1 = integer<std::size_t>(j, "removed_from_cloud1");
  r.removed_from_cloud2 = integer<std::size_t>(j, "removed_from_cloud2");
  if (r.removed_from_cloud1 != r.removed_indices1.size() ||
      r.removed_from_cloud2 != r.removed_indices2.size()) {
    throw std::invalid_argument("report counts do not match index lists");
  }
  return r;
}

Json to_json(const FieldStats& s) {
  return Json{{"max_magnitude", s.max_magnitude},
              {"mean_magnitude", s.mean_magnitude},
              {"median_magnitude", s.median_magnitude},
              {"populated_voxels", s.populated_voxels}};
}

FieldStats stats_from_json(const Json& j) {
  return {number(j, "max_magnitude"), number(j, "mean_magnitude"), number(j, "median_magnitude"),
          integer<std::size_t>(j, "populated_voxels")};
}

Json to_json(const DiscrepancyField& f) {
  Json voxels = Json::array();
  for (const auto& v : f.voxels) {
    voxels.push_back(Json{{"azimuth_index", v.key.azimuth_index},
                          {"elevation_index", v.key.elevation_index},
                          {"centroid1", to_json(v.centroid1)},
                          {"centroid2", to_json(v.centroid2)},
                          {"vector", to_json(v.vector)},
                          {"count1", v.count1},
                          {"count2", v.count2}});
  }
  return Json{{"grid", to_json(f.grid)},
              {"min_points", f.min_points},
              {"stats", to_json(f.stats)},
              {"voxels", std::move(voxels)}};
}

DiscrepancyField field_from_json(const Json& j) {
  DiscrepancyField f;
  f.grid = grid_from_json(require(j, "grid"));
  f.min_points = integer<std::size_t>(j, "min_points");
  f.stats = stats_from_json(require(j, "stats"));
  const auto& voxels = require(j, "voxels");
  if (!voxels.is_array()) throw std::invalid_argument("'voxels' must be an array");
  for (const auto& e : voxels) {
    VoxelDiscrepancy v;
    v.key = key_from_json(e);
    if (!key_in_grid(v.key, f.grid)) throw std::invalid_argument("voxel key outside grid");
    v.centroid1 = point_from_json(require(e, "centroid1"));
    v.centroid2 = point_from_json(require(e, "centroid2"));
    v.vector = point_from_json(require(e, "vector"));
    v.count1 = integer<std::size_t>(e, "count1");
    v.count2 = integer<std::size_t>(e, "count2");
    f.voxels.push_back(v);
  }
  return f;
}

Json to_json(const RegistrationResult& r) {
  return Json{{"method", to_string(r.method)},
              {"transform", to_json(r.transform)},
              {"iterations", r.iterations},
              {"final_residual", r.final_residual},
              {"converged", r.converged},
              {"residual_trace", r.residual_trace}};
}

RegistrationResult registration_from_json(const Json& j) {
  RegistrationResult r;
  const std::string method = string(j, "method");
  if (method == "truth") {
    r.method = RegistrationMethod::kTruth;
  } else if (method == "icp") {
    r.method = RegistrationMethod::kIcp;
  } else {
    throw std::invalid_argument("unknown registration method '" + method + "'");
  }
  r.transform = transform_from_json(require(j, "transform"));
  r.iterations = integer<int>(j, "iterations");
  r.final_residual = number(j, "final_residual");
  const auto& converged = require(j, "converged");
  if (!converged.is_boolean()) throw std::invalid_argument("'converged' must be a boolean");
  r.converged = converged.get<bool>();
  const auto& trace = require(j, "residual_trace");
  if (!trace.is_array()) throw std::invalid_argument("'residual_trace' must be an array");
  for (const auto& v : trace) {
    if (!v.is_number()) throw std::invalid_argument("residual_trace entries must be numbers");
    r.residual_trace.push_back(v.get<double>());
  }
  return r;
}

Json to_json(const MarkedRegion& r) {
  Json keys = Json::array();
  for (const auto& k : r.voxel_keys) keys.push_back(to_json(k));
  return Json{{"label", r.label},
              {"voxel_keys", std::move(keys)},
              {"created_at_iteration", r.created_at_iteration}};
}

MarkedRegion region_from_json(const Json& j) {
  MarkedRegion r;
  r.label = string(j, "label");
  const auto& keys = require(j, "voxel_keys");
  if (!keys.is_array()) throw std::invalid_argument("'voxel_keys' must be an array");
  for (const auto& k : keys) r.voxel_keys.push_back(key_from_json(k));
  r.created_at_iteration = integer<std::size_t>(j, "created_at_iteration");
  return r;
}

Json to_json(const RegionStats& s) {
  return Json{{"iteration", s.iteration},
              {"populated_voxels", s.populated_voxels},
              {"max_magnitude", round_significant(s.max_magnitude)},
              {"mean_magnitude", round_significant(s.mean_magnitude)}};
}

Json to_json(const Scene& scene) {
  Json primitives = Json::array();
  for (const auto& p : scene.primitives()) {
    primitives.push_back(std::visit(
        Overloaded{
            [](const GroundPlane& g) {
              return Json{{"kind", "ground_plane"}, {"extent_x", g.extent_x}, {"extent_y", g.extent_y}};
            },
            [](const Box& b) {
              return Json{{"kind", "box"},          {"center_x", b.center_x}, {"center_y", b.center_y},
                          {"size_x", b.size_x},     {"size_y", b.size_y},     {"height", b.height}};
            },
            [](const Cylinder& c) {
              return Json{{"kind", "cylinder"},       {"center_x", c.center_x},
                          {"center_y", c.center_y},   {"diameter", c.diameter},
                          {"height", c.height}};
            },
        },
        p));
  }
  return Json{{"primitives", std::move(primitives)}};
}

Scene scene_from_json(const Json& j) {
  const auto& list = require(j, "primitives");
  if (!list.is_array()) throw std::invalid_argument("'primitives' must be an array");
  std::vector<ScenePrimitive> primitives;
  for (const auto& p : list) {
    const std::string kind = string(p, "kind");
    if (kind == "ground_plane") {
      primitives.emplace_back(GroundPlane{number(p, "extent_x"), number(p, "extent_y")});
    } else if (kind == "box") {
      primitives.emplace_back(Box{number(p, "center_x"), number(p, "center_y"), number(p, "size_x"),
                                  number(p, "size_y"), number(p, "height")});
    } else if (kind == "cylinder") {
      primitives.emplace_back(Cylinder{number(p, "center_x"), number(p, "center_y"),
                                       number(p, "diameter"), number(p, "height")});
    } else {
      throw std::invalid_argument("unknown primitive kind '" + kind + "'");
    }
  }
  return Scene(std::move(primitives));
}

Json to_json(const SensorModel& s) {
  return Json{{"elevation_channels", s.elevation_channels},
              {"elevation_min_deg", rad_to_deg(s.elevation_min)},
              {"elevation_max_deg", rad_to_deg(s.elevation_max)},
              {"azimuth_steps", s.azimuth_steps},
              {"max_range", s.max_range},
              {"noise_sigma", s.noise_sigma},
              {"noise_seed", s.noise_seed}};
}

SensorModel sensor_from_json(const Json& j) {
  SensorModel s;
  s.elevation_channels = integer<int>(j, "elevation_channels");
  s.elevation_min = deg_to_rad(number(j, "elevation_min_deg"));
  s.elevation_max = deg_to_rad(number(j, "elevation_max_deg"));
  s.azimuth_steps = integer<int>(j, "azimuth_steps");
  s.max_range = number_or(j, "max_range", s.max_range);
  s.noise_sigma = number_or(j, "noise_sigma", 0.0);
  if (j.contains("noise_seed")) s.noise_seed = integer<std::uint64_t>(j, "noise_seed");
  validate_sensor(s);
  return s;
}

double round_significant(double v, int digits) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return std::strtod(buf, nullptr);
}

Json field_export(const DiscrepancyField& field, std::optional<std::size_t> iteration) {
  Json out;
  if (iteration) out["iteration"] = *iteration;
  out["grid"] = Json{{"azimuth_bins", field.grid.azimuth_bins},
                     {"elevation_bins", field.grid.elevation_bins},
                     {"elevation_min", round_significant(field.grid.elevation_min)},
                     {"elevation_max", round_significant(field.grid.elevation_max)},
                     {"origin", rounded(field.grid.origin)}};
  out["min_points"] = field.min_points;
  out["empty"] = field.is_empty();
  out["stats"] = Json{{"max_magnitude", round_significant(field.stats.max_magnitude)},
                      {"mean_magnitude", round_significant(field.stats.mean_magnitude)},
                      {"median_magnitude", round_significant(field.stats.median_magnitude)},
                      {"populated_voxels", field.stats.populated_voxels}};
  Json voxels = Json::array();
  for (const auto& v : field.voxels) {
    voxels.push_back(Json{{"azimuth_index", v.key.azimuth_index},
                          {"elevation_index", v.key.elevation_index},
                          {"centroid1", rounded(v.centroid1)},
                          {"centroid2", rounded(v.centroid2)},
                          {"vector", rounded(v.vector)},
                          {"magnitude", round_significant(v.magnitude())},
                          {"count1", v.count1},
                          {"count2", v.count2}});
  }
  out["voxels"] = std::move(voxels);
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace dvf::json
