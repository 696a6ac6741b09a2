#pragma once

// Reference implementations for tests. The oracles share no code with the
// functions they check; sim_pair() is a fixture built from production code.

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "dvf/field.hpp"
#include "dvf/geometry.hpp"
#include "dvf/scene.hpp"

namespace oracle {

using dvf::Point3;

/// Nearest hit distance of a ray against one primitive, face by face.
std::optional<double> primitive_hit(const dvf::ScenePrimitive& p, const Point3& o, const Point3& d);
/// Nearest hit over the whole scene, and the index of the primitive hit.
std::optional<std::pair<double, std::size_t>> scene_hit(const dvf::Scene& scene, const Point3& o,
                                                        const Point3& d);

/// True when a primitive crosses the open segment from `from` to `to`,
/// ignoring the last `slack` meters at the `to` end.
bool segment_blocked(const dvf::Scene& scene, const Point3& from, const Point3& to,
                     double slack = 1e-4);

/// Elevation via atan2 (production uses asin).
double elevation(const Point3& p, const Point3& origin);
double azimuth(const Point3& p, const Point3& origin);

struct NaiveVoxel {
  Point3 centroid1;
  Point3 centroid2;
  Point3 vector;
  std::size_t count1 = 0;
  std::size_t count2 = 0;
};

/// One pass over every point per voxel; accumulation in point order.
std::map<std::pair<int, int>, NaiveVoxel> naive_field(const std::vector<Point3>& cloud1,
                                                      const std::vector<Point3>& cloud2,
                                                      const dvf::SphericalGridSpec& grid,
                                                      std::size_t min_points = 1);

/// Indices failing the band/range check about `other_origin`.
std::vector<std::size_t> fov_removed(const std::vector<Point3>& cloud, const Point3& other_origin,
                                     double el_min, double el_max, double max_range);

/// True when rays from `origin` through the 3x3 angular neighbourhood of `p`
/// (steps of az_step, el_step) do not all hit the same primitive.
bool near_silhouette(const dvf::Scene& scene, const Point3& origin, const Point3& p, double az_step,
                     double el_step);

/// Uniform helpers over a seeded engine.
class Random {
 public:
  explicit Random(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Point3 point(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Point3 unit_vector();
  dvf::RigidTransform transform(double max_translation);
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Default scene seen from (0,0,3) and (1,1,3) yaw 0.05; clouds in the cloud-1 frame.
struct SimPair {
  dvf::Scene scene;
  dvf::SensorModel sensor;
  dvf::RigidTransform pose1;
  dvf::RigidTransform pose2;
  dvf::PointCloud cloud1;
  dvf::PointCloud cloud2_registered;
};
SimPair sim_pair();

}  // namespace oracle
