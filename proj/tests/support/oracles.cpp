#include "oracles.hpp"

#include <cmath>
#include <limits>

#include "dvf/registration.hpp"

namespace oracle {
namespace {

constexpr double kMinS = 1e-9;
constexpr double kEdge = 1e-12;

void take(std::optional<double>& best, double s) {
  if (s > kMinS && (!best || s < *best)) best = s;
}

// Ray against the axis-aligned rectangle {x_axis = value, lo <= others <= hi}.
void face(std::optional<double>& best, const Point3& o, const Point3& d, int axis, double value,
          const Point3& lo, const Point3& hi) {
  if (d[axis] == 0.0) return;
  const double s = (value - o[axis]) / d[axis];
  const Point3 q = o + s * d;
  for (int k = 0; k < 3; ++k) {
    if (k == axis) continue;
    if (q[k] < lo[k] - kEdge || q[k] > hi[k] + kEdge) return;
  }
  take(best, s);
}

}  // namespace

std::optional<double> primitive_hit(const dvf::ScenePrimitive& p, const Point3& o, const Point3& d) {
  std::optional<double> best;
  if (const auto* g = std::get_if<dvf::GroundPlane>(&p)) {
    const Point3 lo(-g->extent_x / 2, -g->extent_y / 2, 0.0);
    const Point3 hi(g->extent_x / 2, g->extent_y / 2, 0.0);
    face(best, o, d, 2, 0.0, lo, hi);
  } else if (const auto* b = std::get_if<dvf::Box>(&p)) {
    const Point3 lo(b->center_x - b->size_x / 2, b->center_y - b->size_y / 2, 0.0);
    const Point3 hi(b->center_x + b->size_x / 2, b->center_y + b->size_y / 2, b->height);
    for (int axis = 0; axis < 3; ++axis) {
      face(best, o, d, axis, lo[axis], lo, hi);
      face(best, o, d, axis, hi[axis], lo, hi);
    }
  } else if (const auto* c = std::get_if<dvf::Cylinder>(&p)) {
    const long double r = c->diameter / 2.0L;
    const long double px = o.x() - c->center_x;
    const long double py = o.y() - c->center_y;
    const long double a = static_cast<long double>(d.x()) * d.x() + static_cast<long double>(d.y()) * d.y();
    const long double bb = 2.0L * (px * d.x() + py * d.y());
    const long double cc = px * px + py * py - r * r;
    const long double disc = bb * bb - 4.0L * a * cc;
    if (a > 0.0L && disc >= 0.0L) {
      for (const long double sign : {-1.0L, 1.0L}) {
        const double s = static_cast<double>((-bb + sign * std::sqrt(disc)) / (2.0L * a));
        const double z = o.z() + s * d.z();
        if (z >= -kEdge && z <= c->height + kEdge) take(best, s);
      }
    }
    for (const double zc : {0.0, c->height}) {
      if (d.z() == 0.0) continue;
      const double s = (zc - o.z()) / d.z();
      const double x = o.x() + s * d.x() - c->center_x;
      const double y = o.y() + s * d.y() - c->center_y;
      if (x * x + y * y <= (c->diameter / 2) * (c->diameter / 2) + kEdge) take(best, s);
    }
  }
  return best;
}

std::optional<std::pair<double, std::size_t>> scene_hit(const dvf::Scene& scene, const Point3& o,
                                                        const Point3& d) {
  std::optional<std::pair<double, std::size_t>> best;
  for (std::size_t i = 0; i < scene.primitives().size(); ++i) {
    const auto s = primitive_hit(scene.primitives()[i], o, d);
    if (s && (!best || *s < best->first)) best = std::pair{*s, i};
  }
  return best;
}

bool segment_blocked(const dvf::Scene& scene, const Point3& from, const Point3& to, double slack) {
  const Point3 delta = to - from;
  const double length = delta.norm();
  const Point3 d = delta / length;
  for (const auto& p : scene.primitives()) {
    const auto s = primitive_hit(p, from, d);
    if (s && *s < length - slack) return true;
  }
  return false;
}

double elevation(const Point3& p, const Point3& origin) {
  const Point3 d = p - origin;
  return std::atan2(d.z(), std::hypot(d.x(), d.y()));
}

double azimuth(const Point3& p, const Point3& origin) {
  const Point3 d = p - origin;
  if (d.x() == 0.0 && d.y() == 0.0) return 0.0;
  double a = std::atan2(d.y(), d.x());
  if (a < 0.0) a += 2.0 * dvf::kPi;
  if (a >= 2.0 * dvf::kPi) a = 0.0;
  return a;
}

std::map<std::pair<int, int>, NaiveVoxel> naive_field(const std::vector<Point3>& cloud1,
                                                      const std::vector<Point3>& cloud2,
                                                      const dvf::SphericalGridSpec& grid,
                                                      std::size_t min_points) {
  const double az_width = 2.0 * dvf::kPi / grid.azimuth_bins;
  const double el_height = (grid.elevation_max - grid.elevation_min) / grid.elevation_bins;
  auto bin_of = [&](const Point3& p) -> std::optional<std::pair<int, int>> {
    if (p == grid.origin) return std::nullopt;
    const double el = elevation(p, grid.origin);
    if (el < grid.elevation_min || el >= grid.elevation_max) return std::nullopt;
    int a = static_cast<int>(std::floor(azimuth(p, grid.origin) / az_width));
    int e = static_cast<int>(std::floor((el - grid.elevation_min) / el_height));
    if (a >= grid.azimuth_bins) a = grid.azimuth_bins - 1;
    if (e >= grid.elevation_bins) e = grid.elevation_bins - 1;
    return std::pair{a, e};
  };

  std::map<std::pair<int, int>, NaiveVoxel> out;
  for (int e = 0; e < grid.elevation_bins; ++e) {
    for (int a = 0; a < grid.azimuth_bins; ++a) {
      NaiveVoxel v;
      Point3 s1 = Point3::Zero();
      Point3 s2 = Point3::Zero();
      for (const auto& p : cloud1) {
        if (bin_of(p) == std::pair{a, e}) {
          s1 += p;
          ++v.count1;
        }
      }
      for (const auto& p : cloud2) {
        if (bin_of(p) == std::pair{a, e}) {
          s2 += p;
          ++v.count2;
        }
      }
      if (v.count1 < min_points || v.count2 < min_points) continue;
      v.centroid1 = s1 / static_cast<double>(v.count1);
      v.centroid2 = s2 / static_cast<double>(v.count2);
      v.vector = v.centroid2 - v.centroid1;
      out.emplace(std::pair{a, e}, v);
    }
  }
  return out;
}

std::vector<std::size_t> fov_removed(const std::vector<Point3>& cloud, const Point3& other_origin,
                                     double el_min, double el_max, double max_range) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double r = (cloud[i] - other_origin).norm();
    if (r == 0.0) {
      out.push_back(i);
      continue;
    }
    const double el = elevation(cloud[i], other_origin);
    if (el < el_min || el > el_max || r > max_range) out.push_back(i);
  }
  return out;
}

bool near_silhouette(const dvf::Scene& scene, const Point3& origin, const Point3& p, double az_step,
                     double el_step) {
  const double az0 = azimuth(p, origin);
  const double el0 = elevation(p, origin);
  std::optional<std::size_t> first;
  bool first_set = false;
  for (int da = -1; da <= 1; ++da) {
    for (int de = -1; de <= 1; ++de) {
      const double az = az0 + da * az_step;
      const double el = el0 + de * el_step;
      const Point3 d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const auto hit = scene_hit(scene, origin, d);
      const std::optional<std::size_t> id = hit ? std::optional(hit->second) : std::nullopt;
      if (!first_set) {
        first = id;
        first_set = true;
      } else if (id != first) {
        return true;
      }
    }
  }
  return false;
}

Point3 Random::unit_vector() {
  while (true) {
    const Point3 v = point(-1.0, 1.0);
    const double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

dvf::RigidTransform Random::transform(double max_translation) {
  return dvf::RigidTransform::from_euler(point(-max_translation, max_translation),
                                         uniform(-dvf::kPi, dvf::kPi), uniform(-1.5, 1.5),
                                         uniform(-dvf::kPi, dvf::kPi));
}

SimPair sim_pair() {
  SimPair s;
  s.scene = dvf::build_default_scene();
  s.sensor = dvf::default_sensor_sim();
  s.pose1 = dvf::RigidTransform::from_euler({0, 0, 3}, 0, 0, 0);
  s.pose2 = dvf::RigidTransform::from_euler({1, 1, 3}, 0, 0, 0.05);
  s.cloud1 = dvf::raycast_cloud(s.scene, s.pose1, s.sensor);
  const auto raw2 = dvf::raycast_cloud(s.scene, s.pose2, s.sensor);
  s.cloud2_registered = dvf::register_with_truth(raw2, s.pose1, s.pose2).first;
  return s;
}

}  // namespace oracle
