#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

#include "dvf/scene.hpp"
#include "dvf/session.hpp"

namespace dvf {

struct ApiRequest {
  std::string method;
  /// Path without the query string, e.g. "/api/field/2".
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  /// JSON; errors are {"code": ..., "message": ...}.
  std::string body;
};

/// Transport-independent router for the analyst HTTP/JSON API:
///   GET  /api/session
///   GET  /api/field/{iteration}
///   GET  /api/clouds/{iteration}?decimate=N
///   POST /api/iterations   {"mitigation": {...} | null, "note": "..."}
///   POST /api/regions      {"label": "...", "voxel_keys": [{...}, ...]}
///   GET  /api/regions
/// Reads run concurrently; mutations are serialized. With `autosave` set,
/// the session is saved there after every successful mutation.
class AnalystApi {
 public:
  explicit AnalystApi(Session session, std::optional<std::filesystem::path> autosave = {},
                      SensorModel sensor = default_sensor_sim());

  ApiResponse handle(const ApiRequest& request);

  /// Copy of the current session.
  Session snapshot() const;

  /// Server-side default: every N-th point, at most this many per cloud.
  static constexpr std::size_t kMaxCloudPoints = 100000;

 private:
  ApiResponse get_session() const;
  ApiResponse get_field(const std::string& id) const;
  ApiResponse get_clouds(const std::string& id, const std::map<std::string, std::string>& query) const;
  ApiResponse post_iteration(const std::string& body);
  ApiResponse post_region(const std::string& body);
  ApiResponse get_regions() const;

  mutable std::shared_mutex mutex_;
  Session session_;
  std::optional<std::filesystem::path> autosave_;
  SensorModel sensor_;
};

}  // namespace dvf
