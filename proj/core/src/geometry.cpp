#include "dvf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dvf {

bool is_finite(const Point3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

RigidTransform RigidTransform::from_euler(const Point3& translation, double roll, double pitch,
                                          double yaw) {
  if (!is_finite(translation) || !std::isfinite(roll) || !std::isfinite(pitch) ||
      !std::isfinite(yaw)) {
    throw std::invalid_argument("rigid transform: non-finite component");
  }
  const Eigen::Matrix3d r = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                             Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                             Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
                                .toRotationMatrix();
  return RigidTransform(r, translation);
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix3d& rotation,
                                           const Point3& translation) {
  RigidTransform t(rotation, translation);
  if (!t.is_valid()) {
    throw std::invalid_argument("rigid transform: rotation is not orthonormal");
  }
  return t;
}

RigidTransform RigidTransform::translation_only(const Point3& translation) {
  return from_euler(translation, 0.0, 0.0, 0.0);
}

double RigidTransform::pitch() const {
  return std::asin(std::clamp(-rotation_(2, 0), -1.0, 1.0)) + 0.0;  // no -0
}

double RigidTransform::roll() const {
  // Gimbal lock: fold everything into yaw, roll = 0.
  if (std::abs(rotation_(2, 0)) >= 1.0 - 1e-12) return 0.0;
  return std::atan2(rotation_(2, 1), rotation_(2, 2));
}

double RigidTransform::yaw() const {
  if (std::abs(rotation_(2, 0)) >= 1.0 - 1e-12) {
    return std::atan2(-rotation_(0, 1), rotation_(1, 1));
  }
  return std::atan2(rotation_(1, 0), rotation_(0, 0));
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return RigidTransform(rt, -(rt * translation_));
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation_ * b.rotation_, a.rotation_ * b.translation_ + a.translation_);
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation_.allFinite() || !is_finite(translation_)) return false;
  const double ortho = (rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  return ortho <= tol && std::abs(rotation_.determinant() - 1.0) <= tol;
}

Point3 transform_point(const Point3& p, const RigidTransform& transform) {
  return transform.apply(p);
}

RigidTransform invert_transform(const RigidTransform& transform) { return transform.inverse(); }

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }

TransformDelta transform_delta(const RigidTransform& a, const RigidTransform& b) {
  const RigidTransform d = a.inverse() * b;
  const auto& r = d.rotation();
  // Angle as atan2(sin, cos).
  const Point3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double angle = std::atan2(0.5 * axis.norm(), 0.5 * (r.trace() - 1.0));
  return {(a.translation() - b.translation()).norm(), angle};
}

double normalize_azimuth(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of a tiny negative number plus 2pi can round up to exactly 2pi.
  if (a >= kTwoPi) a = 0.0;
  return a;
}

std::optional<SphericalCoord> cart_to_spherical(const Point3& p, const Point3& origin) {
  const Point3 d = p - origin;
  const double range = d.norm();
  if (!(range > 0.0)) return std::nullopt;
  SphericalCoord s;
  s.range = range;
  s.elevation = std::asin(std::clamp(d.z() / range, -1.0, 1.0));
  s.azimuth = (d.x() == 0.0 && d.y() == 0.0) ? 0.0 : normalize_azimuth(std::atan2(d.y(), d.x()));
  return s;
}

Point3 spherical_to_cart(const SphericalCoord& s, const Point3& origin) {
  const double ce = std::cos(s.elevation);
  return origin + s.range * Point3(ce * std::cos(s.azimuth), ce * std::sin(s.azimuth),
                                   std::sin(s.elevation));
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& transform) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(transform.apply(p));
  out.sensor_pose = transform * cloud.sensor_pose;
  out.capture_pose = cloud.capture_pose;
  out.label = cloud.label;
  return out;
}

}  // namespace dvf
