#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dvf/geometry.hpp"

namespace dvf {

/// Azimuth x elevation frustum grid about `origin`, semi-infinite in range.
/// Bins are half-open, [low, high); azimuth wraps at 2pi.
struct SphericalGridSpec {
  int azimuth_bins = 36;
  int elevation_bins = 9;
  double elevation_min = 0.0;
  double elevation_max = 0.0;
  Point3 origin = Point3::Zero();

  double azimuth_width() const { return kTwoPi / azimuth_bins; }
  double elevation_height() const { return (elevation_max - elevation_min) / elevation_bins; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(azimuth_bins) * static_cast<std::size_t>(elevation_bins);
  }

  friend bool operator==(const SphericalGridSpec&, const SphericalGridSpec&) = default;
};

/// Throws std::invalid_argument on a malformed grid.
void validate_grid(const SphericalGridSpec& grid);

/// 36 x 9 bins over a 37.5 deg band (-24.75..+12.75 deg) enclosing the
/// simulated sensor's -22..+10 deg coverage.
SphericalGridSpec simulation_grid(const Point3& origin = Point3::Zero());
/// 36 x 5 bins over -18.75..+18.75 deg for a +-15 deg 16-channel sensor.
SphericalGridSpec vlp16_grid(const Point3& origin = Point3::Zero());

struct VoxelKey {
  int azimuth_index = 0;
  int elevation_index = 0;

  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

bool key_in_grid(const VoxelKey& key, const SphericalGridSpec& grid);
/// Row-major (elevation, then azimuth) linear index.
std::size_t linear_index(const VoxelKey& key, const SphericalGridSpec& grid);

struct VoxelDiscrepancy {
  VoxelKey key;
  Point3 centroid1 = Point3::Zero();
  Point3 centroid2 = Point3::Zero();
  /// centroid2 - centroid1.
  Point3 vector = Point3::Zero();
  std::size_t count1 = 0;
  std::size_t count2 = 0;

  double magnitude() const { return vector.norm(); }
  friend bool operator==(const VoxelDiscrepancy&, const VoxelDiscrepancy&) = default;
};

struct FieldStats {
  double max_magnitude = 0.0;
  double mean_magnitude = 0.0;
  double median_magnitude = 0.0;
  std::size_t populated_voxels = 0;

  friend bool operator==(const FieldStats&, const FieldStats&) = default;
};

struct DiscrepancyField {
  SphericalGridSpec grid;
  std::size_t min_points = 1;
  /// Sorted by linear_index of the key; one entry per populated voxel.
  std::vector<VoxelDiscrepancy> voxels;
  FieldStats stats;

  /// No voxel held points from both clouds.
  bool is_empty() const { return voxels.empty(); }
  const VoxelDiscrepancy* find(const VoxelKey& key) const;

  friend bool operator==(const DiscrepancyField&, const DiscrepancyField&) = default;
};

/// Voxel holding `p`, or nullopt when p is the grid origin or its elevation
/// falls outside [elevation_min, elevation_max).
std::optional<VoxelKey> voxel_of(const Point3& p, const SphericalGridSpec& grid);

/// Per-voxel centroid difference between two clouds expressed in the same
/// frame. Sums accumulate in point order, so results are reproducible bit for
/// bit. Voxels where either cloud has fewer than `min_points` points are omitted.
DiscrepancyField compute_field(const PointCloud& cloud1, const PointCloud& cloud2_registered,
                               const SphericalGridSpec& grid, std::size_t min_points = 1);

/// Magnitude statistics over the populated voxels; all zeros for an empty field.
FieldStats field_stats(const DiscrepancyField& field);

}  // namespace dvf
