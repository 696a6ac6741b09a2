#include "dvf/session.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dvf/json_io.hpp"

namespace dvf {

Session::Session(PointCloud cloud1_raw, PointCloud cloud2_raw, RegistrationResult registration,
                 SphericalGridSpec grid, std::size_t min_points)
    : cloud1_raw_(std::move(cloud1_raw)),
      cloud2_raw_(std::move(cloud2_raw)),
      registration_(std::move(registration)),
      grid_(grid),
      min_points_(min_points) {
  validate_grid(grid_);
  if (min_points_ < 1) throw std::invalid_argument("session: min_points must be >= 1");
  if (!registration_.transform.is_valid()) {
    throw std::invalid_argument("session: invalid registration transform");
  }
  cloud2_registered_ = transform_cloud(cloud2_raw_, registration_.transform);
}

std::vector<Mitigation> Session::current_mitigations() const {
  if (iterations_.empty()) return {};
  return iterations_.back().mitigations;
}

IterationRecord Session::compute_iteration(std::vector<Mitigation> mitigations) const {
  auto pipeline = apply_pipeline(cloud1_raw_, cloud2_registered_, origin1(), origin2(), mitigations);
  IterationRecord record;
  record.mitigations = std::move(mitigations);
  record.field = compute_field(pipeline.cloud1, pipeline.cloud2, grid_, min_points_);
  record.reports = std::move(pipeline.reports);
  return record;
}

const IterationRecord& Session::run_iteration(const std::optional<Mitigation>& mitigation,
                                              const std::string& note) {
  if (mitigation) validate_mitigation(*mitigation);

  std::vector<IterationRecord> added;
  if (iterations_.empty()) {
    added.push_back(compute_iteration({}));
    if (!mitigation) added.back().note = note;
  }
  if (mitigation) {
    auto list = current_mitigations();
    list.push_back(*mitigation);
    added.push_back(compute_iteration(std::move(list)));
    added.back().note = note;
  }
  for (auto& r : added) iterations_.push_back(std::move(r));
  return iterations_.back();
}

PipelineResult Session::clouds_at(std::size_t index) const {
  if (index >= iterations_.size()) throw std::out_of_range("session: no such iteration");
  return apply_pipeline(cloud1_raw_, cloud2_registered_, origin1(), origin2(),
                        iterations_[index].mitigations);
}

const MarkedRegion& Session::mark_region(const std::string& label,
                                         const std::vector<VoxelKey>& keys) {
  if (label.empty()) throw std::invalid_argument("region: label must not be empty");
  if (keys.empty()) throw std::invalid_argument("region: no voxel keys");
  for (const auto& k : keys) {
    if (!key_in_grid(k, grid_)) {
      throw std::invalid_argument("region: voxel key (" + std::to_string(k.azimuth_index) + ", " +
                                  std::to_string(k.elevation_index) + ") outside the grid");
    }
  }
  MarkedRegion region;
  region.label = label;
  region.voxel_keys = keys;
  region.created_at_iteration = iterations_.empty() ? 0 : iterations_.size() - 1;
  regions_.push_back(std::move(region));
  return regions_.back();
}

RegionStats Session::region_stats(const MarkedRegion& region, std::size_t iteration) const {
  if (iteration >= iterations_.size()) throw std::out_of_range("session: no such iteration");
  const auto& field = iterations_[iteration].field;
  RegionStats stats;
  stats.iteration = iteration;
  double sum = 0.0;
  for (const auto& key : region.voxel_keys) {
    if (const auto* v = field.find(key)) {
      const double m = v->magnitude();
      stats.max_magnitude = std::max(stats.max_magnitude, m);
      sum += m;
      ++stats.populated_voxels;
    }
  }
  if (stats.populated_voxels > 0) {
    stats.mean_magnitude =
        std::min(sum / static_cast<double>(stats.populated_voxels), stats.max_magnitude);
  }
  return stats;
}

void Session::set_grid(const SphericalGridSpec& grid, std::size_t min_points) {
  validate_grid(grid);
  if (min_points < 1) throw std::invalid_argument("session: min_points must be >= 1");
  for (const auto& region : regions_) {
    for (const auto& k : region.voxel_keys) {
      if (!key_in_grid(k, grid)) {
        throw std::invalid_argument("set_grid: region '" + region.label +
                                    "' has keys outside the new grid");
      }
    }
  }
  const auto old_grid = grid_;
  const auto old_min = min_points_;
  grid_ = grid;
  min_points_ = min_points;
  try {
    std::vector<IterationRecord> recomputed;
    recomputed.reserve(iterations_.size());
    for (const auto& it : iterations_) {
      recomputed.push_back(compute_iteration(it.mitigations));
      recomputed.back().note = it.note;
    }
    iterations_ = std::move(recomputed);
  } catch (...) {
    grid_ = old_grid;
    min_points_ = old_min;
    throw;
  }
}

bool operator==(const Session& a, const Session& b) {
  return a.cloud1_raw_ == b.cloud1_raw_ && a.cloud2_raw_ == b.cloud2_raw_ &&
         a.registration_ == b.registration_ && a.grid_ == b.grid_ &&
         a.min_points_ == b.min_points_ && a.iterations_ == b.iterations_ &&
         a.regions_ == b.regions_ && a.cloud1_ref == b.cloud1_ref && a.cloud2_ref == b.cloud2_ref;
}

Session open_session(const std::filesystem::path& cloud1, const std::filesystem::path& cloud2,
                     const RegistrationResult& registration, const SphericalGridSpec& grid,
                     std::size_t min_points) {
  auto ref_of = [](const std::filesystem::path& p) {
    const auto format = cloud_format_from_path(p);
    if (!format) throw std::runtime_error("cannot infer cloud format of " + p.string());
    return CloudRef{std::filesystem::absolute(p).lexically_normal(), sha256_file(p), *format};
  };
  auto ref1 = ref_of(cloud1);
  auto ref2 = ref_of(cloud2);
  Session session(load_cloud(ref1.path, ref1.format), load_cloud(ref2.path, ref2.format),
                  registration, grid, min_points);
  session.cloud1_ref = std::move(ref1);
  session.cloud2_ref = std::move(ref2);
  return session;
}

namespace {

constexpr const char* kSessionFormat = "dvf-session";
constexpr int kSessionVersion = 1;

json::Json ref_to_json(const CloudRef& ref) {
  return json::Json{{"path", ref.path.string()},
                    {"sha256", ref.sha256},
                    {"format", to_string(ref.format)}};
}

CloudRef ref_from_json(const json::Json& j) {
  CloudRef ref;
  ref.path = j.at("path").get<std::string>();
  ref.sha256 = j.at("sha256").get<std::string>();
  const auto format = cloud_format_from_string(j.at("format").get<std::string>());
  if (!format) throw std::invalid_argument("unknown cloud format");
  ref.format = *format;
  return ref;
}

PointCloud load_verified(const CloudRef& ref) {
  if (!std::filesystem::exists(ref.path)) {
    throw StaleCloudError("stale cloud reference: " + ref.path.string() + " is missing");
  }
  if (sha256_file(ref.path) != ref.sha256) {
    throw StaleCloudError("stale cloud reference: " + ref.path.string() + " changed on disk");
  }
  return load_cloud(ref.path, ref.format);
}

}  // namespace

void save_session(const Session& session, const std::filesystem::path& path) {
  if (!session.cloud1_ref || !session.cloud2_ref) {
    throw std::logic_error("save_session: clouds have no file reference");
  }
  json::Json iterations = json::Json::array();
  for (const auto& it : session.iterations()) {
    json::Json mitigations = json::Json::array();
    for (const auto& m : it.mitigations) mitigations.push_back(json::to_json(m));
    json::Json reports = json::Json::array();
    for (const auto& r : it.reports) reports.push_back(json::to_json(r));
    iterations.push_back(json::Json{{"mitigations", std::move(mitigations)},
                                    {"note", it.note},
                                    {"reports", std::move(reports)},
                                    {"field", json::to_json(it.field)}});
  }
  json::Json regions = json::Json::array();
  for (const auto& r : session.regions()) regions.push_back(json::to_json(r));

  const json::Json doc{{"format", kSessionFormat},
                       {"version", kSessionVersion},
                       {"clouds",
                        {{"cloud1", ref_to_json(*session.cloud1_ref)},
                         {"cloud2", ref_to_json(*session.cloud2_ref)}}},
                       {"registration", json::to_json(session.registration())},
                       {"grid", json::to_json(session.grid())},
                       {"min_points", session.min_points()},
                       {"iterations", std::move(iterations)},
                       {"regions", std::move(regions)}};

  // Write beside the target, then rename.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << json::dump(doc);
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Session load_session(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json::Json doc;
  try {
    doc = json::Json::parse(in);
  } catch (const json::Json::exception& e) {
    throw std::runtime_error("session " + path.string() + ": " + e.what());
  }

  try {
    if (doc.at("format") != kSessionFormat) throw std::invalid_argument("not a session file");
    if (doc.at("version") != kSessionVersion) throw std::invalid_argument("unsupported version");
    const auto ref1 = ref_from_json(doc.at("clouds").at("cloud1"));
    const auto ref2 = ref_from_json(doc.at("clouds").at("cloud2"));

    Session s;
    s.cloud1_raw_ = load_verified(ref1);
    s.cloud2_raw_ = load_verified(ref2);
    s.cloud1_ref = ref1;
    s.cloud2_ref = ref2;
    s.registration_ = json::registration_from_json(doc.at("registration"));
    s.grid_ = json::grid_from_json(doc.at("grid"));
    s.min_points_ = doc.at("min_points").get<std::size_t>();
    if (s.min_points_ < 1) throw std::invalid_argument("min_points must be >= 1");
    s.cloud2_registered_ = transform_cloud(s.cloud2_raw_, s.registration_.transform);

    for (const auto& it : doc.at("iterations")) {
      IterationRecord record;
      for (const auto& m : it.at("mitigations")) record.mitigations.push_back(json::mitigation_from_json(m));
      for (const auto& r : it.at("reports")) record.reports.push_back(json::report_from_json(r));
      record.note = it.at("note").get<std::string>();
      record.field = json::field_from_json(it.at("field"));
      if (record.reports.size() != record.mitigations.size()) {
        throw std::invalid_argument("iteration reports do not match mitigations");
      }
      s.iterations_.push_back(std::move(record));
    }
    for (const auto& r : doc.at("regions")) {
      auto region = json::region_from_json(r);
      for (const auto& k : region.voxel_keys) {
        if (!key_in_grid(k, s.grid_)) throw std::invalid_argument("region key outside grid");
      }
      s.regions_.push_back(std::move(region));
    }
    return s;
  } catch (const StaleCloudError&) {
    throw;
  } catch (const json::Json::exception& e) {
    throw std::runtime_error("session " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("session " + path.string() + ": " + e.what());
  }
}

}  // namespace dvf
