#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "dvf/geometry.hpp"

namespace dvf {

/// Uniform-grid hash for exact radius-bounded nearest-neighbour queries.
///
/// Cells are max_dist / cells_per_radius wide; a query walks Chebyshev shells
/// outward from its own cell and stops once no unvisited cell can hold a
/// closer point.
class SpatialHash {
 public:
  struct Neighbor {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  SpatialHash(std::span<const Point3> points, double max_dist, int cells_per_radius = 4);

  std::optional<Neighbor> nearest(const Point3& query) const;

  double max_distance() const { return max_dist_; }
  double cell_size() const { return cell_; }

 private:
  struct Cell {
    std::int64_t x, y, z;
  };
  Cell cell_of(const Point3& p) const;
  static std::uint64_t pack(std::int64_t x, std::int64_t y, std::int64_t z);

  std::span<const Point3> points_;
  double max_dist_;
  double cell_;
  int shells_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace dvf
