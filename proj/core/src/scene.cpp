#include "dvf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace dvf {
namespace {

constexpr double kMinHitDistance = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void keep_nearest(std::optional<double>& best, double s) {
  if (s > kMinHitDistance && (!best || s < *best)) best = s;
}

std::optional<double> hit_ground(const GroundPlane& g, const Point3& o, const Point3& d) {
  if (d.z() == 0.0) return std::nullopt;
  const double s = -o.z() / d.z();
  if (!(s > kMinHitDistance)) return std::nullopt;
  const double x = o.x() + s * d.x();
  const double y = o.y() + s * d.y();
  if (std::abs(x) > 0.5 * g.extent_x || std::abs(y) > 0.5 * g.extent_y) return std::nullopt;
  return s;
}

// Slab test against [lo, hi] per axis.
std::optional<double> hit_box(const Box& b, const Point3& o, const Point3& d) {
  const Point3 lo(b.center_x - 0.5 * b.size_x, b.center_y - 0.5 * b.size_y, 0.0);
  const Point3 hi(b.center_x + 0.5 * b.size_x, b.center_y + 0.5 * b.size_y, b.height);
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) return std::nullopt;
      continue;
    }
    double t0 = (lo[axis] - o[axis]) / d[axis];
    double t1 = (hi[axis] - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return std::nullopt;
  }
  std::optional<double> best;
  keep_nearest(best, t_enter);
  if (!best) keep_nearest(best, t_exit);
  return best;
}

std::optional<double> hit_cylinder(const Cylinder& c, const Point3& o, const Point3& d) {
  const double radius = 0.5 * c.diameter;
  const double ox = o.x() - c.center_x;
  const double oy = o.y() - c.center_y;
  std::optional<double> best;

  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 0.0) {
    const double half_b = ox * d.x() + oy * d.y();
    const double cc = ox * ox + oy * oy - radius * radius;
    const double disc = half_b * half_b - a * cc;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      // Numerically stable pair of roots.
      const double q = -(half_b + std::copysign(root, half_b));
      const double roots[2] = {q / a, q != 0.0 ? cc / q : q / a};
      for (double s : roots) {
        const double z = o.z() + s * d.z();
        if (z >= 0.0 && z <= c.height) keep_nearest(best, s);
      }
    }
  }
  if (d.z() != 0.0) {
    for (double cap : {0.0, c.height}) {
      const double s = (cap - o.z()) / d.z();
      const double x = ox + s * d.x();
      const double y = oy + s * d.y();
      if (x * x + y * y <= radius * radius) keep_nearest(best, s);
    }
  }
  return best;
}

}  // namespace

void validate_primitive(const ScenePrimitive& primitive) {
  const bool ok = std::visit(
      Overloaded{
          [](const GroundPlane& g) { return positive(g.extent_x) && positive(g.extent_y); },
          [](const Box& b) {
            return std::isfinite(b.center_x) && std::isfinite(b.center_y) && positive(b.size_x) &&
                   positive(b.size_y) && positive(b.height);
          },
          [](const Cylinder& c) {
            return std::isfinite(c.center_x) && std::isfinite(c.center_y) &&
                   positive(c.diameter) && positive(c.height);
          },
      },
      primitive);
  if (!ok) throw std::invalid_argument("scene primitive: sizes must be finite and positive");
}

Scene::Scene(std::vector<ScenePrimitive> primitives) {
  for (const auto& p : primitives) add(p);
}

void Scene::add(const ScenePrimitive& primitive) {
  validate_primitive(primitive);
  if (std::holds_alternative<GroundPlane>(primitive)) {
    const bool has_ground = std::any_of(primitives_.begin(), primitives_.end(), [](const auto& p) {
      return std::holds_alternative<GroundPlane>(p);
    });
    if (has_ground) throw std::invalid_argument("scene: at most one ground plane");
  }
  primitives_.push_back(primitive);
}

Scene build_default_scene() {
  return Scene({
      GroundPlane{26.0, 26.0},
      Box{8.5, 8.5, 5.0, 5.0, 10.0},
      Box{-8.5, 8.5, 8.0, 5.0, 10.0},
      Box{8.5, -8.5, 7.0, 5.0, 10.0},
      Cylinder{-5.5, -8.5, 5.0, 10.0},
  });
}

double SensorModel::channel_elevation(int channel) const {
  if (elevation_channels == 1) return 0.5 * (elevation_min + elevation_max);
  return elevation_min + channel * channel_spacing();
}

double SensorModel::channel_spacing() const {
  if (elevation_channels <= 1) return elevation_max - elevation_min;
  return (elevation_max - elevation_min) / (elevation_channels - 1);
}

double SensorModel::azimuth_spacing() const { return kTwoPi / azimuth_steps; }

void validate_sensor(const SensorModel& s) {
  if (s.elevation_channels < 1 || s.azimuth_steps < 1) {
    throw std::invalid_argument("sensor: channel and azimuth counts must be >= 1");
  }
  if (!(s.elevation_min < s.elevation_max) || s.elevation_min < -kPi / 2 ||
      s.elevation_max > kPi / 2) {
    throw std::invalid_argument("sensor: need -pi/2 <= elevation_min < elevation_max <= pi/2");
  }
  if (!positive(s.max_range)) throw std::invalid_argument("sensor: max_range must be > 0");
  if (!(s.noise_sigma >= 0.0) || !std::isfinite(s.noise_sigma)) {
    throw std::invalid_argument("sensor: noise_sigma must be >= 0");
  }
}

SensorModel default_sensor_sim() {
  SensorModel s;
  s.elevation_channels = 80;
  s.elevation_min = deg_to_rad(-22.0);
  s.elevation_max = deg_to_rad(-22.0 + 79 * 0.4);
  s.azimuth_steps = 720;
  s.max_range = 120.0;
  s.noise_sigma = 0.0;
  return s;
}

SensorModel vlp16_sensor() {
  SensorModel s;
  s.elevation_channels = 16;
  s.elevation_min = deg_to_rad(-15.0);
  s.elevation_max = deg_to_rad(15.0);
  s.azimuth_steps = 1800;
  s.max_range = 100.0;
  s.noise_sigma = 0.0;
  return s;
}

std::optional<double> intersect_primitive(const ScenePrimitive& primitive, const Point3& origin,
                                          const Point3& direction) {
  return std::visit(
      Overloaded{
          [&](const GroundPlane& g) { return hit_ground(g, origin, direction); },
          [&](const Box& b) { return hit_box(b, origin, direction); },
          [&](const Cylinder& c) { return hit_cylinder(c, origin, direction); },
      },
      primitive);
}

std::optional<RayHit> ray_intersect(const Scene& scene, const Point3& origin,
                                    const Point3& direction) {
  std::optional<double> best;
  for (const auto& primitive : scene.primitives()) {
    if (const auto s = intersect_primitive(primitive, origin, direction)) keep_nearest(best, *s);
  }
  if (!best) return std::nullopt;
  return RayHit{origin + *best * direction, *best};
}

double surface_distance(const ScenePrimitive& primitive, const Point3& p) {
  return std::visit(
      Overloaded{
          [&](const GroundPlane&) { return p.z(); },
          [&](const Box& b) {
            const Point3 half(0.5 * b.size_x, 0.5 * b.size_y, 0.5 * b.height);
            const Point3 q =
                (p - Point3(b.center_x, b.center_y, 0.5 * b.height)).cwiseAbs() - half;
            const double outside = q.cwiseMax(0.0).norm();
            const double inside = std::min(q.maxCoeff(), 0.0);
            return outside + inside;
          },
          [&](const Cylinder& c) {
            const double radial =
                std::hypot(p.x() - c.center_x, p.y() - c.center_y) - 0.5 * c.diameter;
            const double axial = std::abs(p.z() - 0.5 * c.height) - 0.5 * c.height;
            const double outside = std::hypot(std::max(radial, 0.0), std::max(axial, 0.0));
            return outside + std::min(std::max(radial, axial), 0.0);
          },
      },
      primitive);
}

PointCloud raycast_cloud(const Scene& scene, const RigidTransform& pose,
                         const SensorModel& sensor) {
  validate_sensor(sensor);
  PointCloud cloud;
  cloud.capture_pose = pose;
  if (scene.empty()) return cloud;

  std::mt19937_64 rng(sensor.noise_seed);
  std::normal_distribution<double> noise(0.0, sensor.noise_sigma > 0.0 ? sensor.noise_sigma : 1.0);

  const Point3 origin = pose.translation();
  cloud.points.reserve(static_cast<std::size_t>(sensor.elevation_channels) * sensor.azimuth_steps);
  for (int channel = 0; channel < sensor.elevation_channels; ++channel) {
    const double el = sensor.channel_elevation(channel);
    const double ce = std::cos(el);
    const double se = std::sin(el);
    for (int step = 0; step < sensor.azimuth_steps; ++step) {
      const double az = step * sensor.azimuth_spacing();
      const Point3 dir_sensor(ce * std::cos(az), ce * std::sin(az), se);
      const Point3 dir_world = pose.rotation() * dir_sensor;
      const auto hit = ray_intersect(scene, origin, dir_world);
      if (!hit || hit->range > sensor.max_range) continue;
      double range = hit->range;
      if (sensor.noise_sigma > 0.0) range = std::max(0.0, range + noise(rng));
      cloud.points.push_back(range * dir_sensor);
    }
  }
  return cloud;
}

}  // namespace dvf
