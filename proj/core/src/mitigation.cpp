#include "dvf/mitigation.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace dvf {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

template <class Predicate>
FilterResult remove_if(const PointCloud& cloud, Predicate&& remove) {
  FilterResult result;
  result.cloud.sensor_pose = cloud.sensor_pose;
  result.cloud.capture_pose = cloud.capture_pose;
  result.cloud.label = cloud.label;
  result.cloud.points.reserve(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (remove(cloud.points[i])) {
      result.removed_indices.push_back(i);
    } else {
      result.cloud.points.push_back(cloud.points[i]);
    }
  }
  return result;
}

// Minimum range per occupied fine angular bin about an origin.
class RangeImage {
 public:
  RangeImage(double az_res, double el_res, double el_phase) {
    // First row edge at or below -pi/2.
    el_start_ = el_phase - std::ceil((el_phase + kPi / 2) / el_res) * el_res;
    azimuth_bins_ = static_cast<std::size_t>(std::ceil(kTwoPi / az_res));
    elevation_bins_ = static_cast<std::size_t>(std::ceil((kPi / 2 - el_start_) / el_res)) + 1;
    if (azimuth_bins_ * elevation_bins_ > (std::size_t{1} << 28)) {
      throw std::invalid_argument("shadow_filter: angular resolution too fine");
    }
    az_res_ = az_res;
    el_res_ = el_res;
    min_range_.assign(azimuth_bins_ * elevation_bins_, std::numeric_limits<double>::infinity());
  }

  std::size_t bin(const SphericalCoord& s) const {
    const auto az = std::min(static_cast<std::size_t>(s.azimuth / az_res_), azimuth_bins_ - 1);
    const auto el =
        std::min(static_cast<std::size_t>((s.elevation - el_start_) / el_res_), elevation_bins_ - 1);
    return el * azimuth_bins_ + az;
  }

  void insert(const SphericalCoord& s) {
    double& r = min_range_[bin(s)];
    r = std::min(r, s.range);
  }

  /// +inf for an unoccupied bin.
  double min_range(const SphericalCoord& s) const { return min_range_[bin(s)]; }

 private:
  std::size_t azimuth_bins_ = 0;
  std::size_t elevation_bins_ = 0;
  double az_res_ = 0.0;
  double el_res_ = 0.0;
  double el_start_ = 0.0;
  std::vector<double> min_range_;
};

// Maps indices of a filtered cloud back to raw-cloud indices.
std::vector<std::size_t> to_raw(const std::vector<std::size_t>& removed,
                                const std::vector<std::size_t>& raw_of_current) {
  std::vector<std::size_t> out;
  out.reserve(removed.size());
  for (const auto i : removed) out.push_back(raw_of_current[i]);
  return out;
}

void drop_removed(std::vector<std::size_t>& raw_of_current,
                  const std::vector<std::size_t>& removed) {
  std::vector<std::size_t> kept;
  kept.reserve(raw_of_current.size() - removed.size());
  std::size_t r = 0;
  for (std::size_t i = 0; i < raw_of_current.size(); ++i) {
    if (r < removed.size() && removed[r] == i) {
      ++r;
    } else {
      kept.push_back(raw_of_current[i]);
    }
  }
  raw_of_current = std::move(kept);
}

}  // namespace

MitigationKind kind_of(const Mitigation& mitigation) {
  return std::visit(Overloaded{
                        [](const EgoRemoval&) { return MitigationKind::kEgoRemoval; },
                        [](const FovFilter&) { return MitigationKind::kFovFilter; },
                        [](const ShadowFilter&) { return MitigationKind::kShadowFilter; },
                    },
                    mitigation);
}

const char* to_string(MitigationKind kind) {
  switch (kind) {
    case MitigationKind::kEgoRemoval:
      return "ego_removal";
    case MitigationKind::kFovFilter:
      return "fov_filter";
    case MitigationKind::kShadowFilter:
      return "shadow_filter";
  }
  return "unknown";
}

void validate_mitigation(const Mitigation& mitigation) {
  std::visit(
      Overloaded{
          [](const EgoRemoval& m) {
            if (!finite_positive(m.radius)) {
              throw std::invalid_argument("ego_removal: radius must be > 0");
            }
          },
          [](const FovFilter& m) {
            if (!std::isfinite(m.elevation_min) || !std::isfinite(m.elevation_max) ||
                !(m.elevation_min < m.elevation_max)) {
              throw std::invalid_argument("fov_filter: need elevation_min < elevation_max");
            }
            if (!finite_positive(m.max_range)) {
              throw std::invalid_argument("fov_filter: max_range must be > 0");
            }
          },
          [](const ShadowFilter& m) {
            if (!finite_positive(m.azimuth_resolution) ||
                !finite_positive(m.elevation_resolution)) {
              throw std::invalid_argument("shadow_filter: resolutions must be > 0");
            }
            if (!std::isfinite(m.elevation_phase)) {
              throw std::invalid_argument("shadow_filter: elevation_phase must be finite");
            }
            if (!std::isfinite(m.range_margin) || m.range_margin < 0.0) {
              throw std::invalid_argument("shadow_filter: range_margin must be >= 0");
            }
          },
      },
      mitigation);
}

FovFilter default_fov_filter(const SensorModel& sensor) {
  return {sensor.elevation_min, sensor.elevation_max, sensor.max_range};
}

ShadowFilter default_shadow_filter(const SensorModel& sensor) {
  const double el_res = sensor.channel_spacing();
  return {2.0 * sensor.azimuth_spacing(), el_res, 0.5, sensor.elevation_min - 0.5 * el_res};
}

Mitigation parse_mitigation_spec(std::string_view spec, const SensorModel& sensor) {
  const auto colon = spec.find(':');
  const std::string kind(spec.substr(0, colon));
  std::map<std::string, double, std::less<>> values;
  if (colon != std::string_view::npos) {
    std::string_view rest = spec.substr(colon + 1);
    while (true) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        throw std::invalid_argument("mitigation: expected key=value, got '" + std::string(item) + "'");
      }
      const auto text = item.substr(eq + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw std::invalid_argument("mitigation: bad number '" + std::string(text) + "'");
      }
      if (!values.emplace(std::string(item.substr(0, eq)), v).second) {
        throw std::invalid_argument("mitigation: duplicate key '" + std::string(item.substr(0, eq)) + "'");
      }
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  auto take = [&](const char* key) -> std::optional<double> {
    const auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    const double v = it->second;
    values.erase(it);
    return v;
  };

  Mitigation m;
  if (kind == "ego") {
    m = EgoRemoval{take("radius").value_or(EgoRemoval{}.radius)};
  } else if (kind == "fov") {
    auto f = default_fov_filter(sensor);
    if (const auto v = take("el_min")) f.elevation_min = deg_to_rad(*v);
    if (const auto v = take("el_max")) f.elevation_max = deg_to_rad(*v);
    if (const auto v = take("max_range")) f.max_range = *v;
    m = f;
  } else if (kind == "shadow") {
    auto f = default_shadow_filter(sensor);
    if (const auto v = take("margin")) f.range_margin = *v;
    if (const auto v = take("az_res")) f.azimuth_resolution = deg_to_rad(*v);
    if (const auto v = take("el_res")) f.elevation_resolution = deg_to_rad(*v);
    if (const auto v = take("el_phase")) f.elevation_phase = deg_to_rad(*v);
    m = f;
  } else {
    throw std::invalid_argument("mitigation: unknown kind '" + kind + "' (ego, fov, shadow)");
  }
  if (!values.empty()) {
    throw std::invalid_argument("mitigation: unknown key '" + values.begin()->first + "' for " + kind);
  }
  validate_mitigation(m);
  return m;
}

FilterResult remove_ego(const PointCloud& cloud, const Point3& center, double radius) {
  validate_mitigation(EgoRemoval{radius});
  const double r2 = radius * radius;
  return remove_if(cloud, [&](const Point3& p) { return (p - center).squaredNorm() < r2; });
}

FilterResult fov_filter(const PointCloud& cloud, const Point3& other_origin,
                        const FovFilter& fov) {
  validate_mitigation(fov);
  const double lo = fov.elevation_min - kFovAngularTolerance;
  const double hi = fov.elevation_max + kFovAngularTolerance;
  return remove_if(cloud, [&](const Point3& p) {
    const auto s = cart_to_spherical(p, other_origin);
    if (!s) return true;
    return s->elevation < lo || s->elevation > hi || s->range > fov.max_range;
  });
}

FilterResult shadow_filter(const PointCloud& cloud, const PointCloud& other_cloud,
                           const Point3& other_origin, const ShadowFilter& params) {
  validate_mitigation(params);
  RangeImage image(params.azimuth_resolution, params.elevation_resolution, params.elevation_phase);
  for (const auto& p : other_cloud.points) {
    if (const auto s = cart_to_spherical(p, other_origin)) image.insert(*s);
  }
  return remove_if(cloud, [&](const Point3& p) {
    const auto s = cart_to_spherical(p, other_origin);
    if (!s) return false;
    return s->range > image.min_range(*s) + params.range_margin;
  });
}

PipelineResult apply_pipeline(const PointCloud& cloud1, const PointCloud& cloud2,
                              const Point3& origin1, const Point3& origin2,
                              std::span<const Mitigation> mitigations) {
  for (const auto& m : mitigations) validate_mitigation(m);

  PipelineResult out{cloud1, cloud2, {}};
  std::vector<std::size_t> raw1(cloud1.size());
  std::vector<std::size_t> raw2(cloud2.size());
  for (std::size_t i = 0; i < raw1.size(); ++i) raw1[i] = i;
  for (std::size_t i = 0; i < raw2.size(); ++i) raw2[i] = i;

  for (const auto& mitigation : mitigations) {
    auto [step1, step2] = std::visit(
        Overloaded{
            [&](const EgoRemoval& m) {
              return std::pair{remove_ego(out.cloud1, origin1, m.radius),
                               remove_ego(out.cloud2, origin2, m.radius)};
            },
            [&](const FovFilter& m) {
              return std::pair{fov_filter(out.cloud1, origin2, m),
                               fov_filter(out.cloud2, origin1, m)};
            },
            [&](const ShadowFilter& m) {
              return std::pair{shadow_filter(out.cloud1, out.cloud2, origin2, m),
                               shadow_filter(out.cloud2, out.cloud1, origin1, m)};
            },
        },
        mitigation);

    MitigationReport report;
    report.kind = kind_of(mitigation);
    report.removed_indices1 = to_raw(step1.removed_indices, raw1);
    report.removed_indices2 = to_raw(step2.removed_indices, raw2);
    report.removed_from_cloud1 = report.removed_indices1.size();
    report.removed_from_cloud2 = report.removed_indices2.size();
    drop_removed(raw1, step1.removed_indices);
    drop_removed(raw2, step2.removed_indices);
    out.cloud1 = std::move(step1.cloud);
    out.cloud2 = std::move(step2.cloud);
    out.reports.push_back(std::move(report));
  }
  return out;
}

}  // namespace dvf
