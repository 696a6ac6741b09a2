#include "dvf/spatial_hash.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace dvf {

SpatialHash::SpatialHash(std::span<const Point3> points, double max_dist, int cells_per_radius)
    : points_(points), max_dist_(max_dist) {
  if (!(max_dist > 0.0) || !std::isfinite(max_dist) || cells_per_radius < 1) {
    throw std::invalid_argument("spatial hash: max_dist must be > 0");
  }
  if (points.size() > UINT32_MAX) throw std::invalid_argument("spatial hash: too many points");
  cell_ = max_dist / cells_per_radius;
  shells_ = cells_per_radius + 1;
  cells_.reserve(points.size() / 4 + 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Cell c = cell_of(points[i]);
    cells_[pack(c.x, c.y, c.z)].push_back(static_cast<std::uint32_t>(i));
  }
}

SpatialHash::Cell SpatialHash::cell_of(const Point3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
          static_cast<std::int64_t>(std::floor(p.y() / cell_)),
          static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

std::uint64_t SpatialHash::pack(std::int64_t x, std::int64_t y, std::int64_t z) {
  constexpr std::int64_t kBias = 1 << 20;
  constexpr std::uint64_t kMask = (1u << 21) - 1;
  return ((static_cast<std::uint64_t>(x + kBias) & kMask) << 42) |
         ((static_cast<std::uint64_t>(y + kBias) & kMask) << 21) |
         (static_cast<std::uint64_t>(z + kBias) & kMask);
}

std::optional<SpatialHash::Neighbor> SpatialHash::nearest(const Point3& query) const {
  const Cell home = cell_of(query);
  std::optional<Neighbor> best;
  double best_d2 = max_dist_ * max_dist_;

  auto visit = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    const auto it = cells_.find(pack(x, y, z));
    if (it == cells_.end()) return;
    for (const std::uint32_t idx : it->second) {
      const double d2 = (points_[idx] - query).squaredNorm();
      if (d2 <= best_d2 && (!best || d2 < best->squared_distance ||
                            (d2 == best->squared_distance && idx < best->index))) {
        best = Neighbor{idx, d2};
        best_d2 = d2;
      }
    }
  };

  for (std::int64_t s = 0; s <= shells_; ++s) {
    for (std::int64_t dx = -s; dx <= s; ++dx) {
      for (std::int64_t dy = -s; dy <= s; ++dy) {
        const bool edge = std::llabs(dx) == s || std::llabs(dy) == s;
        if (edge) {
          for (std::int64_t dz = -s; dz <= s; ++dz) visit(home.x + dx, home.y + dy, home.z + dz);
        } else {
          visit(home.x + dx, home.y + dy, home.z - s);
          if (s > 0) visit(home.x + dx, home.y + dy, home.z + s);
        }
      }
    }
    // Every point in shell s + 1 is at least s * cell away.
    const double reach = static_cast<double>(s) * cell_;
    if (best && best->squared_distance <= reach * reach) break;
  }
  return best;
}

}  // namespace dvf
