// dvf: command-line front end for the discrepancy-field workbench.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dvf/api.hpp"
#include "dvf/cloud_io.hpp"
#include "dvf/field.hpp"
#include "dvf/http_server.hpp"
#include "dvf/json_io.hpp"
#include "dvf/mitigation.hpp"
#include "dvf/registration.hpp"
#include "dvf/scene.hpp"
#include "dvf/session.hpp"

namespace {

using dvf::json::Json;

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad number '" + item + "'");
    }
  }
  return out;
}

// x,y,z[,roll,pitch,yaw]; meters and radians.
dvf::RigidTransform parse_pose(const std::string& text) {
  const auto v = parse_numbers(text, "pose");
  if (v.size() != 3 && v.size() != 6) {
    throw std::invalid_argument("pose: expected x,y,z or x,y,z,roll,pitch,yaw");
  }
  if (v.size() == 3) return dvf::RigidTransform::translation_only({v[0], v[1], v[2]});
  return dvf::RigidTransform::from_euler({v[0], v[1], v[2]}, v[3], v[4], v[5]);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

dvf::SensorModel load_sensor(const std::string& spec) {
  if (spec == "sim" || spec == "default") return dvf::default_sensor_sim();
  if (spec == "vlp16") return dvf::vlp16_sensor();
  return dvf::json::sensor_from_json(read_json_file(spec));
}

dvf::Scene load_scene(const std::string& spec) {
  if (spec == "default") return dvf::build_default_scene();
  return dvf::json::scene_from_json(read_json_file(spec));
}

// "sim", "vlp16" or az_bins,el_bins,el_min_deg,el_max_deg.
dvf::SphericalGridSpec parse_grid(const std::string& spec, const dvf::Point3& origin) {
  if (spec == "sim") return dvf::simulation_grid(origin);
  if (spec == "vlp16") return dvf::vlp16_grid(origin);
  const auto v = parse_numbers(spec, "grid");
  if (v.size() != 4) throw std::invalid_argument("grid: expected az_bins,el_bins,el_min_deg,el_max_deg");
  if (v[0] != static_cast<int>(v[0]) || v[1] != static_cast<int>(v[1])) {
    throw std::invalid_argument("grid: bin counts must be integers");
  }
  dvf::SphericalGridSpec g{static_cast<int>(v[0]), static_cast<int>(v[1]), dvf::deg_to_rad(v[2]),
                           dvf::deg_to_rad(v[3]), origin};
  dvf::validate_grid(g);
  return g;
}

std::vector<dvf::VoxelKey> parse_voxels(const std::string& text) {
  std::vector<dvf::VoxelKey> keys;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("voxels: expected az:el, got '" + item + "'");
    try {
      keys.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw std::invalid_argument("voxels: bad index in '" + item + "'");
    }
  }
  return keys;
}

std::string describe(const dvf::Mitigation& m) {
  return dvf::json::to_json(m).dump();
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void print_stats(const dvf::Session& s) {
  std::printf("%-9s %-13s %-13s %-13s %-8s %s\n", "iteration", "max", "mean", "median", "voxels",
              "mitigations");
  for (std::size_t i = 0; i < s.iterations().size(); ++i) {
    const auto& it = s.iterations()[i];
    std::string kinds;
    for (const auto& m : it.mitigations) {
      if (!kinds.empty()) kinds += ",";
      kinds += dvf::to_string(dvf::kind_of(m));
    }
    if (kinds.empty()) kinds = "(baseline)";
    std::printf("%-9zu %-13.9g %-13.9g %-13.9g %-8zu %s\n", i, it.field.stats.max_magnitude,
                it.field.stats.mean_magnitude, it.field.stats.median_magnitude,
                it.field.stats.populated_voxels, kinds.c_str());
  }
}

dvf::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrepancy-vector fields between registered lidar point clouds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dvf 0.1.0");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Ray-cast a synthetic cloud");
  std::string scene_spec = "default";
  std::string pose_text = "0,0,3,0,0,0";
  std::string sensor_spec = "sim";
  std::string sim_out;
  double noise = -1.0;
  std::uint64_t seed = 0;
  simulate->add_option("--scene", scene_spec, "'default' or scene JSON file")->capture_default_str();
  simulate->add_option("--pose", pose_text, "x,y,z,roll,pitch,yaw (m, rad)")->capture_default_str();
  simulate->add_option("--sensor", sensor_spec, "'sim', 'vlp16' or sensor JSON file")->capture_default_str();
  simulate->add_option("--noise", noise, "Gaussian range noise sigma (m), overrides the sensor");
  simulate->add_option("--seed", seed, "Noise seed");
  simulate->add_option("--out", sim_out, ".ply or .csv output")->required();

  // register
  auto* reg = app.add_subcommand("register", "Register cloud2 into cloud1 and start a session");
  std::string cloud1_path;
  std::string cloud2_path;
  std::vector<std::string> truth_poses;
  bool use_icp = false;
  std::string init_text = "0,0,0,0,0,0";
  dvf::IcpParams icp;
  std::string grid_spec = "sim";
  std::size_t min_points = 1;
  std::string session_out;
  reg->add_option("--cloud1", cloud1_path, "Reference cloud")->required()->check(CLI::ExistingFile);
  reg->add_option("--cloud2", cloud2_path, "Cloud to register")->required()->check(CLI::ExistingFile);
  auto* truth_opt = reg->add_option("--truth", truth_poses, "pose1 pose2, each x,y,z,roll,pitch,yaw")
                        ->expected(2);
  auto* icp_flag = reg->add_flag("--icp", use_icp, "Point-to-point ICP");
  truth_opt->excludes(icp_flag);
  reg->add_option("--init", init_text, "ICP initial guess x,y,z,roll,pitch,yaw")->capture_default_str();
  reg->add_option("--max-iter", icp.max_iter)->capture_default_str();
  reg->add_option("--tol", icp.tol)->capture_default_str();
  reg->add_option("--max-corr-dist", icp.max_corr_dist)->capture_default_str();
  reg->add_option("--grid", grid_spec, "'sim', 'vlp16' or az_bins,el_bins,el_min_deg,el_max_deg")
      ->capture_default_str();
  reg->add_option("--min-points", min_points)->capture_default_str();
  reg->add_option("--out", session_out, "Session JSON")->required();

  // field
  auto* field = app.add_subcommand("field", "Export a discrepancy field");
  std::string session_path;
  std::string field_grid;
  std::optional<std::size_t> field_min_points;
  std::optional<std::size_t> field_iteration;
  std::string export_path = "-";
  field->add_option("--session", session_path)->required();
  field->add_option("--grid", field_grid, "Regrid the session (recomputes every iteration)");
  field->add_option("--min-points", field_min_points);
  field->add_option("--iteration", field_iteration, "Defaults to the latest");
  field->add_option("--export", export_path, "Output JSON, '-' for stdout")->capture_default_str();

  // mitigate
  auto* mitigate = app.add_subcommand("mitigate", "Add a mitigation and record a new iteration");
  std::string add_spec;
  std::string note;
  std::string mitigate_sensor = "sim";
  mitigate->add_option("--session", session_path)->required();
  mitigate->add_option("--add", add_spec,
                       "ego:radius=3 | fov:el_min=-22,el_max=10 | shadow:margin=0.5 (degrees)")
      ->required();
  mitigate->add_option("--note", note);
  mitigate->add_option("--sensor", mitigate_sensor, "Sensor whose defaults fill omitted keys")
      ->capture_default_str();

  // stats
  auto* stats = app.add_subcommand("stats", "Per-iteration magnitude statistics");
  bool stats_json = false;
  stats->add_option("--session", session_path)->required();
  stats->add_flag("--json", stats_json);

  // mark
  auto* mark = app.add_subcommand("mark", "Mark a voxel region");
  std::string label;
  std::string voxels;
  mark->add_option("--session", session_path)->required();
  mark->add_option("--label", label)->required();
  mark->add_option("--voxels", voxels, "az:el,az:el,...")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the analyst HTTP/JSON API");
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string serve_sensor = "sim";
  serve->add_option("--session", session_path)->required();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--sensor", serve_sensor)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      auto sensor = load_sensor(sensor_spec);
      if (noise >= 0.0) sensor.noise_sigma = noise;
      if (simulate->count("--seed") > 0) sensor.noise_seed = seed;
      const auto pose = parse_pose(pose_text);
      auto cloud = dvf::raycast_cloud(load_scene(scene_spec), pose, sensor);
      cloud.label = std::filesystem::path(sim_out).stem().string();
      dvf::save_cloud(cloud, sim_out);
      std::printf("wrote %zu points to %s\n", cloud.size(), sim_out.c_str());
    } else if (*reg) {
      const auto cloud1 = dvf::load_cloud(cloud1_path);
      const auto cloud2 = dvf::load_cloud(cloud2_path);
      dvf::RegistrationResult result;
      if (use_icp) {
        result = dvf::icp_register(cloud1, cloud2, parse_pose(init_text), icp);
      } else if (!truth_poses.empty()) {
        result = dvf::register_with_truth(cloud2, parse_pose(truth_poses[0]), parse_pose(truth_poses[1])).second;
      } else if (cloud1.capture_pose && cloud2.capture_pose) {
        result = dvf::register_with_truth(cloud2, *cloud1.capture_pose, *cloud2.capture_pose).second;
      } else {
        throw std::invalid_argument("register: pass --truth pose1 pose2 or --icp (clouds carry no capture poses)");
      }
      auto session = dvf::open_session(cloud1_path, cloud2_path, result,
                                       parse_grid(grid_spec, cloud1.sensor_origin()), min_points);
      session.run_iteration(std::nullopt, "baseline");
      dvf::save_session(session, session_out);
      const auto& t = result.transform;
      std::printf("method %s  translation %.9g %.9g %.9g  roll %.9g pitch %.9g yaw %.9g\n",
                  dvf::to_string(result.method), t.translation().x(), t.translation().y(),
                  t.translation().z(), t.roll(), t.pitch(), t.yaw());
      if (result.method == dvf::RegistrationMethod::kIcp) {
        std::printf("icp iterations %d  residual %.9g  converged %s\n", result.iterations,
                    result.final_residual, result.converged ? "yes" : "no");
      }
      std::printf("baseline max magnitude %.9g over %zu voxels\n",
                  session.iterations().back().field.stats.max_magnitude,
                  session.iterations().back().field.stats.populated_voxels);
    } else if (*field) {
      auto session = dvf::load_session(session_path);
      if (!field_grid.empty() || field_min_points) {
        const auto grid = field_grid.empty() ? session.grid() : parse_grid(field_grid, session.origin1());
        session.set_grid(grid, field_min_points.value_or(session.min_points()));
        if (session.iterations().empty()) session.run_iteration(std::nullopt, "baseline");
        dvf::save_session(session, session_path);
      }
      if (session.iterations().empty()) {
        session.run_iteration(std::nullopt, "baseline");
        dvf::save_session(session, session_path);
      }
      const std::size_t index = field_iteration.value_or(session.iterations().size() - 1);
      if (index >= session.iterations().size()) throw std::out_of_range("field: no such iteration");
      write_text(export_path, dvf::json::dump(dvf::json::field_export(session.iterations()[index].field, index)));
    } else if (*mitigate) {
      auto session = dvf::load_session(session_path);
      const auto m = dvf::parse_mitigation_spec(add_spec, load_sensor(mitigate_sensor));
      const auto& record = session.run_iteration(m, note);
      const auto& report = record.reports.back();
      std::printf("iteration %zu: %s removed %zu from cloud1, %zu from cloud2; max magnitude %.9g\n",
                  session.iterations().size() - 1, describe(m).c_str(), report.removed_from_cloud1,
                  report.removed_from_cloud2, record.field.stats.max_magnitude);
      dvf::save_session(session, session_path);
    } else if (*stats) {
      const auto session = dvf::load_session(session_path);
      if (stats_json) {
        Json out = Json::array();
        for (std::size_t i = 0; i < session.iterations().size(); ++i) {
          const auto& st = session.iterations()[i].field.stats;
          out.push_back(Json{{"iteration", i},
                             {"max_magnitude", dvf::json::round_significant(st.max_magnitude)},
                             {"mean_magnitude", dvf::json::round_significant(st.mean_magnitude)},
                             {"median_magnitude", dvf::json::round_significant(st.median_magnitude)},
                             {"populated_voxels", st.populated_voxels}});
        }
        std::cout << dvf::json::dump(out);
      } else {
        print_stats(session);
      }
    } else if (*mark) {
      auto session = dvf::load_session(session_path);
      const auto& region = session.mark_region(label, parse_voxels(voxels));
      std::printf("region '%s' with %zu voxels at iteration %zu\n", region.label.c_str(),
                  region.voxel_keys.size(), region.created_at_iteration);
      dvf::save_session(session, session_path);
    } else if (*serve) {
      dvf::AnalystApi api(dvf::load_session(session_path), std::filesystem::path(session_path),
                          load_sensor(serve_sensor));
      dvf::HttpServer server(api);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("serving %s on http://%s:%d/api/session\n", session_path.c_str(), host.c_str(), bound);
      std::fflush(stdout);
      server.listen();
      g_server = nullptr;
    }
  } catch (const dvf::ParseError& e) {
    std::fprintf(stderr, "dvf: parse error: %s\n", e.what());
    return 1;
  } catch (const dvf::StaleCloudError& e) {
    std::fprintf(stderr, "dvf: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dvf: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
