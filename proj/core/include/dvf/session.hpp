#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvf/cloud_io.hpp"
#include "dvf/field.hpp"
#include "dvf/geometry.hpp"
#include "dvf/mitigation.hpp"
#include "dvf/registration.hpp"

namespace dvf {

struct IterationRecord {
  /// Cumulative list in effect for this iteration.
  std::vector<Mitigation> mitigations;
  DiscrepancyField field;
  /// One per mitigation, indices relative to the raw clouds.
  std::vector<MitigationReport> reports;
  std::string note;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct MarkedRegion {
  std::string label;
  std::vector<VoxelKey> voxel_keys;
  std::size_t created_at_iteration = 0;

  friend bool operator==(const MarkedRegion&, const MarkedRegion&) = default;
};

/// Magnitudes of a region's voxels in one iteration's field. Voxels absent
/// from that field count as unpopulated.
struct RegionStats {
  std::size_t iteration = 0;
  std::size_t populated_voxels = 0;
  double max_magnitude = 0.0;
  double mean_magnitude = 0.0;
};

/// Where a raw cloud came from, for save/load.
struct CloudRef {
  std::filesystem::path path;
  std::string sha256;
  CloudFormat format = CloudFormat::kPlyAscii;

  friend bool operator==(const CloudRef&, const CloudRef&) = default;
};

class StaleCloudError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative mitigation loop over one registered cloud pair. Every iteration
/// re-runs the full mitigation list on the raw clouds.
class Session {
 public:
  /// `cloud2_raw` is in its own frame; registration.transform maps it into
  /// cloud1's frame. Throws std::invalid_argument on an invalid grid.
  Session(PointCloud cloud1_raw, PointCloud cloud2_raw, RegistrationResult registration,
          SphericalGridSpec grid, std::size_t min_points = 1);

  const PointCloud& cloud1_raw() const { return cloud1_raw_; }
  const PointCloud& cloud2_raw() const { return cloud2_raw_; }
  /// cloud2_raw mapped through the registration transform.
  const PointCloud& cloud2_registered() const { return cloud2_registered_; }
  const RegistrationResult& registration() const { return registration_; }
  const SphericalGridSpec& grid() const { return grid_; }
  std::size_t min_points() const { return min_points_; }
  const std::vector<IterationRecord>& iterations() const { return iterations_; }
  const std::vector<MarkedRegion>& regions() const { return regions_; }

  Point3 origin1() const { return cloud1_raw_.sensor_origin(); }
  Point3 origin2() const { return cloud2_registered_.sensor_origin(); }

  /// Mitigation list of the latest iteration, empty before the baseline.
  std::vector<Mitigation> current_mitigations() const;

  /// Appends `mitigation` (if any) to the latest list and records a new
  /// iteration. On an empty session the baseline is recorded first. Throws
  /// std::invalid_argument on bad parameters, leaving the session unchanged.
  const IterationRecord& run_iteration(const std::optional<Mitigation>& mitigation,
                                       const std::string& note = {});

  /// Mitigated clouds of iteration `index`, recomputed from the raw clouds.
  PipelineResult clouds_at(std::size_t index) const;

  /// Throws std::invalid_argument on an empty label or a key outside the grid.
  const MarkedRegion& mark_region(const std::string& label, const std::vector<VoxelKey>& keys);
  RegionStats region_stats(const MarkedRegion& region, std::size_t iteration) const;

  /// Replaces the grid and recomputes every iteration's field. Regions with
  /// keys outside the new grid make this throw, leaving the session unchanged.
  void set_grid(const SphericalGridSpec& grid, std::size_t min_points);

  std::optional<CloudRef> cloud1_ref;
  std::optional<CloudRef> cloud2_ref;

  friend bool operator==(const Session& a, const Session& b);

 private:
  friend Session load_session(const std::filesystem::path& path);
  Session() = default;

  IterationRecord compute_iteration(std::vector<Mitigation> mitigations) const;

  PointCloud cloud1_raw_;
  PointCloud cloud2_raw_;
  PointCloud cloud2_registered_;
  RegistrationResult registration_;
  SphericalGridSpec grid_;
  std::size_t min_points_ = 1;
  std::vector<IterationRecord> iterations_;
  std::vector<MarkedRegion> regions_;
};

/// Loads both clouds from disk, recording path and content hash, and builds
/// a session with the given registration.
Session open_session(const std::filesystem::path& cloud1, const std::filesystem::path& cloud2,
                     const RegistrationResult& registration, const SphericalGridSpec& grid,
                     std::size_t min_points = 1);

/// Writes the session as JSON. Raw clouds are stored by path and SHA-256;
/// throws std::logic_error if either cloud has no CloudRef.
void save_session(const Session& session, const std::filesystem::path& path);
/// Throws StaleCloudError when a referenced cloud's hash no longer matches.
Session load_session(const std::filesystem::path& path);

}  // namespace dvf
