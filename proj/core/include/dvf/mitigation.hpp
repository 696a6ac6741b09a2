#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dvf/geometry.hpp"
#include "dvf/scene.hpp"

namespace dvf {

/// Drop returns within `radius` of the capturing sensor (strict: |p - c| < r).
struct EgoRemoval {
  double radius = 3.0;
  friend bool operator==(const EgoRemoval&, const EgoRemoval&) = default;
};

/// Drop points the other sensor could not have sampled: elevation outside
/// [elevation_min, elevation_max] or range beyond max_range, as seen from the
/// other sensor's origin.
struct FovFilter {
  double elevation_min = 0.0;
  double elevation_max = 0.0;
  double max_range = 120.0;
  friend bool operator==(const FovFilter&, const FovFilter&) = default;
};

/// Drop points hidden from the other sensor behind a nearer return of the
/// other cloud in the same fine angular bin. Elevation bin edges sit at
/// elevation_phase + k * elevation_resolution; azimuth edges at multiples of
/// azimuth_resolution.
struct ShadowFilter {
  double azimuth_resolution = 0.0;
  double elevation_resolution = 0.0;
  double range_margin = 0.5;
  double elevation_phase = 0.0;
  friend bool operator==(const ShadowFilter&, const ShadowFilter&) = default;
};

using Mitigation = std::variant<EgoRemoval, FovFilter, ShadowFilter>;

enum class MitigationKind { kEgoRemoval, kFovFilter, kShadowFilter };

MitigationKind kind_of(const Mitigation& mitigation);
const char* to_string(MitigationKind kind);

/// Throws std::invalid_argument when parameters break the per-kind invariants.
void validate_mitigation(const Mitigation& mitigation);

/// FOV band of `sensor`.
FovFilter default_fov_filter(const SensorModel& sensor);
/// One elevation row per channel, centered on the beam; two azimuth samples
/// per column; 0.5 m margin.
ShadowFilter default_shadow_filter(const SensorModel& sensor);

/// Parses `kind:key=value,...` with angles in degrees:
///   ego:radius=3
///   fov:el_min=-22,el_max=10[,max_range=120]
///   shadow[:margin=0.5,az_res=1,el_res=0.4,el_phase=-22.2]
/// Omitted keys take the defaults for `sensor`. Throws std::invalid_argument.
Mitigation parse_mitigation_spec(std::string_view spec, const SensorModel& sensor);

/// Elevation slack (rad) on both ends of the FOV band.
inline constexpr double kFovAngularTolerance = 1e-9;

struct FilterResult {
  PointCloud cloud;
  /// Indices into the input cloud, ascending.
  std::vector<std::size_t> removed_indices;
};

FilterResult remove_ego(const PointCloud& cloud, const Point3& center, double radius);
FilterResult fov_filter(const PointCloud& cloud, const Point3& other_origin, const FovFilter& fov);
FilterResult shadow_filter(const PointCloud& cloud, const PointCloud& other_cloud,
                           const Point3& other_origin, const ShadowFilter& params);

struct MitigationReport {
  MitigationKind kind = MitigationKind::kEgoRemoval;
  std::size_t removed_from_cloud1 = 0;
  std::size_t removed_from_cloud2 = 0;
  /// Indices into the raw (pre-pipeline) clouds.
  std::vector<std::size_t> removed_indices1;
  std::vector<std::size_t> removed_indices2;

  friend bool operator==(const MitigationReport&, const MitigationReport&) = default;
};

struct PipelineResult {
  PointCloud cloud1;
  PointCloud cloud2;
  std::vector<MitigationReport> reports;
};

/// Applies `mitigations` in order. Ego removal uses each cloud's own origin;
/// the FOV and shadow filters treat the clouds symmetrically, each step
/// filtering both clouds against the other's state before that step.
PipelineResult apply_pipeline(const PointCloud& cloud1, const PointCloud& cloud2,
                              const Point3& origin1, const Point3& origin2,
                              std::span<const Mitigation> mitigations);

}  // namespace dvf
