#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <string>
#include <vector>

namespace dvf {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Cartesian point in meters.
using Point3 = Eigen::Vector3d;

bool is_finite(const Point3& p);

/// Rigid transform p' = R p + t.
///
/// Euler convention: R = Rz(yaw) * Ry(pitch) * Rx(roll), i.e. the intrinsic
/// z-y-x sequence (yaw first, then pitch about the new y axis, then roll about
/// the new x axis). Angles in radians. The rotation is stored as a matrix; the
/// angle accessors extract the same convention back out of it.
class RigidTransform {
 public:
  RigidTransform() = default;

  static RigidTransform from_euler(const Point3& translation, double roll, double pitch,
                                   double yaw);
  /// Throws std::invalid_argument unless `rotation` is a proper rotation
  /// (orthonormal within 1e-9, det +1) and all entries are finite.
  static RigidTransform from_matrix(const Eigen::Matrix3d& rotation, const Point3& translation);
  static RigidTransform translation_only(const Point3& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Point3& translation() const { return translation_; }

  double roll() const;
  double pitch() const;
  double yaw() const;

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;

  /// (a * b).apply(p) == a.apply(b.apply(p))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);

  bool is_valid(double tol = 1e-9) const;

  friend bool operator==(const RigidTransform& a, const RigidTransform& b) {
    return a.rotation_ == b.rotation_ && a.translation_ == b.translation_;
  }

 private:
  RigidTransform(const Eigen::Matrix3d& r, const Point3& t) : rotation_(r), translation_(t) {}

  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Point3 translation_ = Point3::Zero();
};

Point3 transform_point(const Point3& p, const RigidTransform& transform);
RigidTransform invert_transform(const RigidTransform& transform);
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Largest translation (m) and rotation-angle (rad) deviation between two transforms.
struct TransformDelta {
  double translation = 0.0;
  double rotation = 0.0;
};
TransformDelta transform_delta(const RigidTransform& a, const RigidTransform& b);

/// azimuth in [0, 2pi), elevation in [-pi/2, pi/2]; azimuth is 0 at the poles.
struct SphericalCoord {
  double range = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
};

/// Spherical coordinates of `p` about `origin`. Returns nullopt when p == origin.
std::optional<SphericalCoord> cart_to_spherical(const Point3& p, const Point3& origin);
Point3 spherical_to_cart(const SphericalCoord& s, const Point3& origin);

/// Wraps any finite angle into [0, 2pi).
double normalize_azimuth(double angle);

struct PointCloud {
  std::vector<Point3> points;
  /// Pose of the capturing lidar in the frame the points are expressed in.
  /// Identity for a raw sensor-frame cloud.
  RigidTransform sensor_pose;
  /// World pose at capture time, when known (simulation, ground truth).
  std::optional<RigidTransform> capture_pose;
  std::string label;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Point3 sensor_origin() const { return sensor_pose.translation(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Maps every point and the sensor pose through `transform`.
PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& transform);

}  // namespace dvf
