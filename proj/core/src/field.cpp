#include "dvf/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dvf {

void validate_grid(const SphericalGridSpec& grid) {
  if (grid.azimuth_bins < 1 || grid.elevation_bins < 1) {
    throw std::invalid_argument("grid: bin counts must be >= 1");
  }
  if (!std::isfinite(grid.elevation_min) || !std::isfinite(grid.elevation_max) ||
      !(grid.elevation_min < grid.elevation_max) || grid.elevation_min < -kPi / 2 ||
      grid.elevation_max > kPi / 2) {
    throw std::invalid_argument("grid: need -pi/2 <= elevation_min < elevation_max <= pi/2");
  }
  if (!is_finite(grid.origin)) throw std::invalid_argument("grid: non-finite origin");
}

SphericalGridSpec simulation_grid(const Point3& origin) {
  return {36, 9, deg_to_rad(-24.75), deg_to_rad(12.75), origin};
}

SphericalGridSpec vlp16_grid(const Point3& origin) {
  return {36, 5, deg_to_rad(-18.75), deg_to_rad(18.75), origin};
}

bool key_in_grid(const VoxelKey& key, const SphericalGridSpec& grid) {
  return key.azimuth_index >= 0 && key.azimuth_index < grid.azimuth_bins &&
         key.elevation_index >= 0 && key.elevation_index < grid.elevation_bins;
}

std::size_t linear_index(const VoxelKey& key, const SphericalGridSpec& grid) {
  return static_cast<std::size_t>(key.elevation_index) * grid.azimuth_bins +
         static_cast<std::size_t>(key.azimuth_index);
}

const VoxelDiscrepancy* DiscrepancyField::find(const VoxelKey& key) const {
  const auto it = std::lower_bound(voxels.begin(), voxels.end(), key,
                                   [this](const VoxelDiscrepancy& v, const VoxelKey& k) {
                                     return linear_index(v.key, grid) < linear_index(k, grid);
                                   });
  if (it == voxels.end() || it->key != key) return nullptr;
  return &*it;
}

std::optional<VoxelKey> voxel_of(const Point3& p, const SphericalGridSpec& grid) {
  const auto s = cart_to_spherical(p, grid.origin);
  if (!s) return std::nullopt;
  if (s->elevation < grid.elevation_min || s->elevation >= grid.elevation_max) return std::nullopt;
  const int az = std::min(static_cast<int>(s->azimuth / grid.azimuth_width()),
                          grid.azimuth_bins - 1);
  const int el = std::min(
      static_cast<int>((s->elevation - grid.elevation_min) / grid.elevation_height()),
      grid.elevation_bins - 1);
  return VoxelKey{az, el};
}

namespace {

struct Accumulator {
  Point3 sum = Point3::Zero();
  std::size_t count = 0;
};

std::vector<Accumulator> accumulate(const PointCloud& cloud, const SphericalGridSpec& grid) {
  std::vector<Accumulator> cells(grid.cell_count());
  for (const auto& p : cloud.points) {
    if (const auto key = voxel_of(p, grid)) {
      auto& cell = cells[linear_index(*key, grid)];
      cell.sum += p;
      ++cell.count;
    }
  }
  return cells;
}

}  // namespace

DiscrepancyField compute_field(const PointCloud& cloud1, const PointCloud& cloud2_registered,
                               const SphericalGridSpec& grid, std::size_t min_points) {
  validate_grid(grid);
  if (min_points < 1) throw std::invalid_argument("compute_field: min_points must be >= 1");

  const auto cells1 = accumulate(cloud1, grid);
  const auto cells2 = accumulate(cloud2_registered, grid);

  DiscrepancyField field;
  field.grid = grid;
  field.min_points = min_points;
  for (std::size_t i = 0; i < cells1.size(); ++i) {
    const auto& a = cells1[i];
    const auto& b = cells2[i];
    if (a.count < min_points || b.count < min_points) continue;
    VoxelDiscrepancy v;
    v.key = {static_cast<int>(i % grid.azimuth_bins), static_cast<int>(i / grid.azimuth_bins)};
    v.centroid1 = a.sum / static_cast<double>(a.count);
    v.centroid2 = b.sum / static_cast<double>(b.count);
    v.vector = v.centroid2 - v.centroid1;
    v.count1 = a.count;
    v.count2 = b.count;
    field.voxels.push_back(v);
  }
  field.stats = field_stats(field);
  return field;
}

FieldStats field_stats(const DiscrepancyField& field) {
  FieldStats stats;
  if (field.voxels.empty()) return stats;
  std::vector<double> magnitudes;
  magnitudes.reserve(field.voxels.size());
  double sum = 0.0;
  for (const auto& v : field.voxels) {
    magnitudes.push_back(v.magnitude());
    sum += magnitudes.back();
  }
  std::sort(magnitudes.begin(), magnitudes.end());
  const std::size_t n = magnitudes.size();
  stats.populated_voxels = n;
  stats.max_magnitude = magnitudes.back();
  // Clamp mean to max.
  stats.mean_magnitude = std::min(sum / static_cast<double>(n), stats.max_magnitude);
  stats.median_magnitude =
      n % 2 == 1 ? magnitudes[n / 2] : 0.5 * (magnitudes[n / 2 - 1] + magnitudes[n / 2]);
  return stats;
}

}  // namespace dvf
