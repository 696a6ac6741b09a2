#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "dvf/geometry.hpp"

namespace dvf {

/// Flat ground at z = 0, centered on the origin.
struct GroundPlane {
  double extent_x = 0.0;
  double extent_y = 0.0;
};

/// Axis-aligned prism resting on the ground.
struct Box {
  double center_x = 0.0;
  double center_y = 0.0;
  double size_x = 0.0;
  double size_y = 0.0;
  double height = 0.0;
};

/// Vertical cylinder resting on the ground.
struct Cylinder {
  double center_x = 0.0;
  double center_y = 0.0;
  double diameter = 0.0;
  double height = 0.0;
};

using ScenePrimitive = std::variant<GroundPlane, Box, Cylinder>;

class Scene {
 public:
  Scene() = default;
  /// Throws std::invalid_argument on non-positive sizes or a second ground plane.
  explicit Scene(std::vector<ScenePrimitive> primitives);

  void add(const ScenePrimitive& primitive);
  const std::vector<ScenePrimitive>& primitives() const { return primitives_; }
  bool empty() const { return primitives_.empty(); }

 private:
  std::vector<ScenePrimitive> primitives_;
};

void validate_primitive(const ScenePrimitive& primitive);

/// Intersection-scene defaults: 26 x 26 m ground, three 10 m tall prisms with
/// 5x5, 8x5 and 7x5 m footprints and a 5 m diameter, 10 m tall cylinder, one
/// per quadrant. Boxes centered at (8.5, 8.5), (-8.5, 8.5), (8.5, -8.5);
/// cylinder at (-5.5, -8.5).
Scene build_default_scene();

struct SensorModel {
  int elevation_channels = 1;
  /// Channel i sits at elevation_min + i * (elevation_max - elevation_min) / (channels - 1).
  double elevation_min = 0.0;
  double elevation_max = 0.0;
  int azimuth_steps = 1;
  double max_range = 120.0;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;

  double channel_elevation(int channel) const;
  double channel_spacing() const;
  double azimuth_spacing() const;
};

void validate_sensor(const SensorModel& sensor);

/// 80 channels at 0.4 deg spacing starting at -22 deg, 720 azimuth steps, no noise.
SensorModel default_sensor_sim();
/// 16 channels over -15..+15 deg, 0.2 deg azimuth steps, no noise.
SensorModel vlp16_sensor();

struct RayHit {
  Point3 point;
  double range = 0.0;
};

/// Nearest hit along origin + s * direction for s > 0. `direction` must be unit length.
std::optional<RayHit> ray_intersect(const Scene& scene, const Point3& origin,
                                    const Point3& direction);

/// Per-primitive ray hit distance (nearest s > 0), exposed for testing.
std::optional<double> intersect_primitive(const ScenePrimitive& primitive, const Point3& origin,
                                          const Point3& direction);

/// Signed implicit surface distance; zero on the primitive's boundary.
double surface_distance(const ScenePrimitive& primitive, const Point3& p);

/// One ray per (channel, azimuth step), channel-major. Points are returned in
/// the sensor frame; the cloud's capture_pose records `pose`.
PointCloud raycast_cloud(const Scene& scene, const RigidTransform& pose, const SensorModel& sensor);

}  // namespace dvf
