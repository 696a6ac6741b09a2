#include "dvf/api.hpp"

#include <charconv>
#include <mutex>
#include <stdexcept>
#include <string_view>

#include "dvf/json_io.hpp"

namespace dvf {
namespace {

using json::Json;

ApiResponse reply(int status, const Json& body) { return {status, body.dump()}; }

ApiResponse error(int status, const std::string& code, const std::string& message) {
  return reply(status, Json{{"code", code}, {"message", message}});
}

std::optional<std::size_t> parse_index(std::string_view text) {
  std::size_t v = 0;
  if (text.empty()) return std::nullopt;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

Json rounded_point(const Point3& p) {
  return Json::array({json::round_significant(p.x()), json::round_significant(p.y()),
                      json::round_significant(p.z())});
}

Json mitigation_list(const std::vector<Mitigation>& list) {
  Json out = Json::array();
  for (const auto& m : list) out.push_back(json::to_json(m));
  return out;
}

Json report_counts(const std::vector<MitigationReport>& reports) {
  Json out = Json::array();
  for (const auto& r : reports) out.push_back(json::to_json(r, false));
  return out;
}

Json record_json(const IterationRecord& record, std::size_t index) {
  return Json{{"iteration", index},
              {"mitigations", mitigation_list(record.mitigations)},
              {"note", record.note},
              {"reports", report_counts(record.reports)},
              {"field", json::field_export(record.field, index)}};
}

Json cloud_json(const PointCloud& cloud, const std::vector<int>& removed_by, std::size_t step) {
  Json indices = Json::array();
  Json points = Json::array();
  Json flags = Json::array();
  for (std::size_t i = 0; i < cloud.size(); i += step) {
    indices.push_back(i);
    points.push_back(rounded_point(cloud.points[i]));
    if (removed_by[i] < 0) {
      flags.push_back(nullptr);
    } else {
      flags.push_back(removed_by[i]);
    }
  }
  return Json{{"label", cloud.label},
              {"sensor_origin", rounded_point(cloud.sensor_origin())},
              {"total_points", cloud.size()},
              {"indices", std::move(indices)},
              {"points", std::move(points)},
              {"removed_by", std::move(flags)}};
}

}  // namespace

AnalystApi::AnalystApi(Session session, std::optional<std::filesystem::path> autosave,
                       SensorModel sensor)
    : session_(std::move(session)), autosave_(std::move(autosave)), sensor_(sensor) {}

Session AnalystApi::snapshot() const {
  std::shared_lock lock(mutex_);
  return session_;
}

ApiResponse AnalystApi::handle(const ApiRequest& request) {
  std::string_view path = request.path;
  while (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
  constexpr std::string_view kPrefix = "/api/";
  if (path.substr(0, kPrefix.size()) != kPrefix) {
    return error(404, "not_found", "no route for " + request.path);
  }
  path.remove_prefix(kPrefix.size());
  const auto slash = path.find('/');
  const std::string_view resource = path.substr(0, slash);
  const std::string id = slash == std::string_view::npos ? "" : std::string(path.substr(slash + 1));
  const bool has_id = slash != std::string_view::npos;
  const bool get = request.method == "GET";
  const bool post = request.method == "POST";

  try {
    if (resource == "session" && !has_id) {
      if (!get) return error(405, "method_not_allowed", "use GET");
      return get_session();
    }
    if (resource == "field" && has_id) {
      if (!get) return error(405, "method_not_allowed", "use GET");
      return get_field(id);
    }
    if (resource == "clouds" && has_id) {
      if (!get) return error(405, "method_not_allowed", "use GET");
      return get_clouds(id, request.query);
    }
    if (resource == "iterations" && !has_id) {
      if (!post) return error(405, "method_not_allowed", "use POST");
      return post_iteration(request.body);
    }
    if (resource == "regions" && !has_id) {
      if (get) return get_regions();
      if (post) return post_region(request.body);
      return error(405, "method_not_allowed", "use GET or POST");
    }
  } catch (const std::exception& e) {
    return error(500, "internal_error", e.what());
  }
  return error(404, "not_found", "no route for " + request.path);
}

ApiResponse AnalystApi::get_session() const {
  std::shared_lock lock(mutex_);
  const auto& s = session_;
  const auto& reg = s.registration();
  Json history = Json::array();
  for (std::size_t i = 0; i < s.iterations().size(); ++i) {
    const auto& it = s.iterations()[i];
    const auto& st = it.field.stats;
    history.push_back(Json{{"iteration", i},
                           {"mitigations", mitigation_list(it.mitigations)},
                           {"note", it.note},
                           {"stats",
                            {{"max_magnitude", json::round_significant(st.max_magnitude)},
                             {"mean_magnitude", json::round_significant(st.mean_magnitude)},
                             {"median_magnitude", json::round_significant(st.median_magnitude)},
                             {"populated_voxels", st.populated_voxels}}}});
  }
  const auto cloud_summary = [](const PointCloud& c) {
    return Json{{"label", c.label}, {"points", c.size()}, {"sensor_origin", rounded_point(c.sensor_origin())}};
  };
  const Json body{
      {"iteration_count", s.iterations().size()},
      {"grid",
       {{"azimuth_bins", s.grid().azimuth_bins},
        {"elevation_bins", s.grid().elevation_bins},
        {"elevation_min", json::round_significant(s.grid().elevation_min)},
        {"elevation_max", json::round_significant(s.grid().elevation_max)},
        {"origin", rounded_point(s.grid().origin)}}},
      {"min_points", s.min_points()},
      {"registration",
       {{"method", to_string(reg.method)},
        {"translation", rounded_point(reg.transform.translation())},
        {"roll", json::round_significant(reg.transform.roll())},
        {"pitch", json::round_significant(reg.transform.pitch())},
        {"yaw", json::round_significant(reg.transform.yaw())},
        {"iterations", reg.iterations},
        {"final_residual", json::round_significant(reg.final_residual)},
        {"converged", reg.converged}}},
      {"clouds", {{"cloud1", cloud_summary(s.cloud1_raw())}, {"cloud2", cloud_summary(s.cloud2_registered())}}},
      {"history", std::move(history)},
      {"region_count", s.regions().size()}};
  return reply(200, body);
}

ApiResponse AnalystApi::get_field(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto index = parse_index(id);
  if (!index) return error(400, "invalid_parameter", "iteration must be a non-negative integer");
  if (*index >= session_.iterations().size()) {
    return error(404, "no_such_iteration", "iteration " + id + " does not exist");
  }
  return reply(200, json::field_export(session_.iterations()[*index].field, *index));
}

ApiResponse AnalystApi::get_clouds(const std::string& id,
                                   const std::map<std::string, std::string>& query) const {
  std::shared_lock lock(mutex_);
  const auto index = parse_index(id);
  if (!index) return error(400, "invalid_parameter", "iteration must be a non-negative integer");
  if (*index >= session_.iterations().size()) {
    return error(404, "no_such_iteration", "iteration " + id + " does not exist");
  }
  const auto& c1 = session_.cloud1_raw();
  const auto& c2 = session_.cloud2_registered();
  std::size_t step = (std::max(c1.size(), c2.size()) + kMaxCloudPoints - 1) / kMaxCloudPoints;
  if (step == 0) step = 1;
  if (const auto it = query.find("decimate"); it != query.end()) {
    const auto n = parse_index(it->second);
    if (!n || *n == 0) return error(400, "invalid_parameter", "decimate must be a positive integer");
    step = *n;
  }

  const auto& record = session_.iterations()[*index];
  std::vector<int> removed1(c1.size(), -1);
  std::vector<int> removed2(c2.size(), -1);
  for (std::size_t r = 0; r < record.reports.size(); ++r) {
    for (const auto i : record.reports[r].removed_indices1) removed1[i] = static_cast<int>(r);
    for (const auto i : record.reports[r].removed_indices2) removed2[i] = static_cast<int>(r);
  }
  const Json body{{"iteration", *index},
                  {"decimate", step},
                  {"reports", report_counts(record.reports)},
                  {"cloud1", cloud_json(c1, removed1, step)},
                  {"cloud2", cloud_json(c2, removed2, step)}};
  return reply(200, body);
}

ApiResponse AnalystApi::post_iteration(const std::string& body) {
  Json doc;
  try {
    doc = Json::parse(body.empty() ? std::string("{}") : body);
  } catch (const Json::exception& e) {
    return error(400, "invalid_json", e.what());
  }
  if (!doc.is_object()) return error(400, "invalid_json", "body must be a JSON object");

  std::optional<Mitigation> mitigation;
  std::string note;
  try {
    if (const auto it = doc.find("mitigation"); it != doc.end() && !it->is_null()) {
      mitigation = it->is_string() ? parse_mitigation_spec(it->get<std::string>(), sensor_)
                                   : json::mitigation_from_json(*it);
    }
    if (const auto it = doc.find("note"); it != doc.end()) {
      if (!it->is_string()) throw std::invalid_argument("'note' must be a string");
      note = it->get<std::string>();
    }
  } catch (const std::invalid_argument& e) {
    return error(400, "invalid_mitigation", e.what());
  }

  std::unique_lock lock(mutex_);
  Session next = session_;
  try {
    next.run_iteration(mitigation, note);
  } catch (const std::invalid_argument& e) {
    return error(400, "invalid_mitigation", e.what());
  }
  if (autosave_) {
    try {
      save_session(next, *autosave_);
    } catch (const std::exception& e) {
      return error(500, "save_failed", e.what());
    }
  }
  session_ = std::move(next);
  const std::size_t index = session_.iterations().size() - 1;
  return reply(201, record_json(session_.iterations().back(), index));
}

ApiResponse AnalystApi::post_region(const std::string& body) {
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::exception& e) {
    return error(400, "invalid_json", e.what());
  }
  std::string label;
  std::vector<VoxelKey> keys;
  try {
    if (!doc.is_object()) throw std::invalid_argument("body must be a JSON object");
    const auto l = doc.find("label");
    if (l == doc.end() || !l->is_string()) throw std::invalid_argument("'label' must be a string");
    label = l->get<std::string>();
    const auto k = doc.find("voxel_keys");
    if (k == doc.end() || !k->is_array()) throw std::invalid_argument("'voxel_keys' must be an array");
    for (const auto& key : *k) keys.push_back(json::key_from_json(key));
  } catch (const std::invalid_argument& e) {
    return error(400, "invalid_region", e.what());
  }

  std::unique_lock lock(mutex_);
  Session next = session_;
  try {
    next.mark_region(label, keys);
  } catch (const std::invalid_argument& e) {
    return error(400, "invalid_region", e.what());
  }
  if (autosave_) {
    try {
      save_session(next, *autosave_);
    } catch (const std::exception& e) {
      return error(500, "save_failed", e.what());
    }
  }
  session_ = std::move(next);
  Json out = json::to_json(session_.regions().back());
  out["index"] = session_.regions().size() - 1;
  return reply(201, out);
}

ApiResponse AnalystApi::get_regions() const {
  std::shared_lock lock(mutex_);
  Json regions = Json::array();
  for (std::size_t r = 0; r < session_.regions().size(); ++r) {
    const auto& region = session_.regions()[r];
    Json j = json::to_json(region);
    j["index"] = r;
    Json stats = Json::array();
    for (std::size_t i = 0; i < session_.iterations().size(); ++i) {
      stats.push_back(json::to_json(session_.region_stats(region, i)));
    }
    j["stats"] = std::move(stats);
    regions.push_back(std::move(j));
  }
  return reply(200, Json{{"regions", std::move(regions)}});
}

}  // namespace dvf
