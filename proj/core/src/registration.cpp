#include "dvf/registration.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "dvf/spatial_hash.hpp"

namespace dvf {

const char* to_string(RegistrationMethod method) {
  switch (method) {
    case RegistrationMethod::kTruth:
      return "truth";
    case RegistrationMethod::kIcp:
      return "icp";
  }
  return "unknown";
}

std::pair<PointCloud, RegistrationResult> register_with_truth(const PointCloud& cloud2,
                                                              const RigidTransform& pose1,
                                                              const RigidTransform& pose2) {
  if (!pose1.is_valid() || !pose2.is_valid()) {
    throw std::invalid_argument("register_with_truth: invalid pose");
  }
  RegistrationResult result;
  // Equal poses: exact identity.
  if (!(pose1 == pose2)) result.transform = pose1.inverse() * pose2;
  result.method = RegistrationMethod::kTruth;
  return {transform_cloud(cloud2, result.transform), std::move(result)};
}

RigidTransform best_fit_transform(const std::vector<Point3>& source,
                                  const std::vector<Point3>& target) {
  if (source.size() != target.size() || source.empty()) {
    throw std::invalid_argument("best_fit_transform: need matching, non-empty point sets");
  }
  const double n = static_cast<double>(source.size());
  Point3 source_mean = Point3::Zero();
  Point3 target_mean = Point3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    source_mean += source[i];
    target_mean += target[i];
  }
  source_mean /= n;
  target_mean /= n;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    cross += (source[i] - source_mean) * (target[i] - target_mean).transpose();
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Eigen::Matrix3d rotation = svd.matrixV() * reflect * svd.matrixU().transpose();
  // Re-orthonormalise.
  const Eigen::JacobiSVD<Eigen::Matrix3d> clean(rotation,
                                                Eigen::ComputeFullU | Eigen::ComputeFullV);
  rotation = clean.matrixU() * clean.matrixV().transpose();
  return RigidTransform::from_matrix(rotation, target_mean - rotation * source_mean);
}

namespace {

struct Evaluation {
  double cost = 0.0;  // sum of min(d^2, max_corr_dist^2)
  std::vector<Point3> source;
  std::vector<Point3> target;
};

Evaluation evaluate(const SpatialHash& hash, std::span<const Point3> target_points,
                    const std::vector<Point3>& moving, const RigidTransform& transform) {
  const double cap = hash.max_distance() * hash.max_distance();
  Evaluation e;
  e.source.reserve(moving.size());
  e.target.reserve(moving.size());
  for (const auto& p : moving) {
    const Point3 q = transform.apply(p);
    if (const auto nn = hash.nearest(q)) {
      e.cost += nn->squared_distance;
      e.source.push_back(q);
      e.target.push_back(target_points[nn->index]);
    } else {
      e.cost += cap;
    }
  }
  return e;
}

}  // namespace

RegistrationResult icp_register(const PointCloud& cloud1, const PointCloud& cloud2,
                                const RigidTransform& init, const IcpParams& params) {
  if (cloud1.empty() || cloud2.empty()) {
    throw std::invalid_argument("icp_register: both clouds must be non-empty");
  }
  if (params.max_iter < 0 || !(params.tol >= 0.0)) {
    throw std::invalid_argument("icp_register: invalid parameters");
  }
  const std::span<const Point3> target_points(cloud1.points);
  const SpatialHash hash(target_points, params.max_corr_dist);
  const double n = static_cast<double>(cloud2.size());

  RegistrationResult result;
  result.method = RegistrationMethod::kIcp;
  result.transform = init;
  result.converged = false;

  Evaluation current = evaluate(hash, target_points, cloud2.points, init);
  if (current.source.empty()) throw RegistrationError("registration failed: no correspondences");
  result.residual_trace.push_back(std::sqrt(current.cost / n));

  for (int iter = 0; iter < params.max_iter; ++iter) {
    const RigidTransform step = best_fit_transform(current.source, current.target);
    const RigidTransform candidate = step * result.transform;
    Evaluation next = evaluate(hash, target_points, cloud2.points, candidate);
    if (next.cost > current.cost) {
      // Rounding-level increase: the previous transform is the best we have.
      result.converged = true;
      break;
    }
    result.transform = candidate;
    result.iterations = iter + 1;
    result.residual_trace.push_back(std::sqrt(next.cost / n));
    current = std::move(next);
    const auto delta = transform_delta(RigidTransform{}, step);
    if (delta.translation + delta.rotation < params.tol) {
      result.converged = true;
      break;
    }
  }
  result.final_residual = result.residual_trace.back();
  return result;
}

}  // namespace dvf
