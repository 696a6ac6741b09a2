#include "dvf/cloud_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <vector>

namespace dvf {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<double> parse_double(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

double parse_coordinate(std::string_view token, std::size_t line) {
  const auto v = parse_double(token);
  if (!v) throw ParseError(line, "invalid number '" + std::string(trim(token)) + "'");
  if (!std::isfinite(*v)) throw ParseError(line, "non-finite coordinate");
  return *v;
}

RigidTransform parse_pose(const std::vector<std::string_view>& tokens, std::size_t line) {
  // tokens: comment <key> x y z roll pitch yaw
  if (tokens.size() != 8) throw ParseError(line, "pose comment needs 6 values");
  std::array<double, 6> v{};
  for (std::size_t i = 0; i < 6; ++i) v[i] = parse_coordinate(tokens[i + 2], line);
  return RigidTransform::from_euler({v[0], v[1], v[2]}, v[3], v[4], v[5]);
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_pose_comment(std::ostream& out, const char* key, const RigidTransform& pose) {
  const auto& t = pose.translation();
  out << "comment " << key << ' ' << format_double(t.x()) << ' ' << format_double(t.y()) << ' '
      << format_double(t.z()) << ' ' << format_double(pose.roll()) << ' '
      << format_double(pose.pitch()) << ' ' << format_double(pose.yaw()) << '\n';
}

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<std::string> properties;
  bool has_list = false;
};

const std::array<std::string_view, 16> kPlyScalarTypes = {
    "char",  "uchar",  "short", "ushort", "int",   "uint",    "float",   "double",
    "int8",  "uint8",  "int16", "uint16", "int32", "uint32",  "float32", "float64"};

}  // namespace

const char* to_string(CloudFormat format) {
  switch (format) {
    case CloudFormat::kPlyAscii:
      return "ply_ascii";
    case CloudFormat::kXyzCsv:
      return "xyz_csv";
  }
  return "unknown";
}

std::optional<CloudFormat> cloud_format_from_string(std::string_view name) {
  if (name == "ply_ascii" || name == "ply") return CloudFormat::kPlyAscii;
  if (name == "xyz_csv" || name == "csv") return CloudFormat::kXyzCsv;
  return std::nullopt;
}

std::optional<CloudFormat> cloud_format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".ply") return CloudFormat::kPlyAscii;
  if (ext == ".csv" || ext == ".xyz" || ext == ".txt") return CloudFormat::kXyzCsv;
  return std::nullopt;
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

PointCloud read_ply(std::istream& in) {
  PointCloud cloud;
  std::string raw;
  std::size_t line = 0;

  auto next_line = [&]() -> bool {
    if (!std::getline(in, raw)) return false;
    ++line;
    return true;
  };

  if (!next_line() || trim(raw) != "ply") throw ParseError(line == 0 ? 1 : line, "missing 'ply' magic");

  std::vector<PlyElement> elements;
  bool have_format = false;
  bool ended = false;
  while (next_line()) {
    const auto tokens = split_ws(raw);
    if (tokens.empty()) continue;
    const auto key = tokens[0];
    if (key == "end_header") {
      ended = true;
      break;
    }
    if (key == "format") {
      if (tokens.size() != 3) throw ParseError(line, "malformed format line");
      if (tokens[1] != "ascii") {
        throw ParseError(line, "unsupported PLY format '" + std::string(tokens[1]) + "'");
      }
      have_format = true;
    } else if (key == "comment" || key == "obj_info") {
      if (tokens.size() >= 2 && tokens[1] == "sensor_pose") {
        cloud.sensor_pose = parse_pose(tokens, line);
      } else if (tokens.size() >= 2 && tokens[1] == "capture_pose") {
        cloud.capture_pose = parse_pose(tokens, line);
      } else if (tokens.size() >= 2 && tokens[1] == "label") {
        const auto pos = raw.find("label");
        cloud.label = std::string(trim(std::string_view(raw).substr(pos + 5)));
      }
    } else if (key == "element") {
      if (tokens.size() != 3) throw ParseError(line, "malformed element line");
      PlyElement e;
      e.name = std::string(tokens[1]);
      std::size_t count = 0;
      const auto [ptr, ec] =
          std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), count);
      if (ec != std::errc() || ptr != tokens[2].data() + tokens[2].size()) {
        throw ParseError(line, "invalid element count");
      }
      e.count = count;
      elements.push_back(std::move(e));
    } else if (key == "property") {
      if (elements.empty()) throw ParseError(line, "property before any element");
      auto& e = elements.back();
      if (tokens.size() == 5 && tokens[1] == "list") {
        e.has_list = true;
        e.properties.emplace_back(tokens[4]);
      } else if (tokens.size() == 3) {
        if (std::find(kPlyScalarTypes.begin(), kPlyScalarTypes.end(), tokens[1]) ==
            kPlyScalarTypes.end()) {
          throw ParseError(line, "unknown property type '" + std::string(tokens[1]) + "'");
        }
        e.properties.emplace_back(tokens[2]);
      } else {
        throw ParseError(line, "malformed property line");
      }
    } else {
      throw ParseError(line, "unexpected header keyword '" + std::string(key) + "'");
    }
  }
  if (!ended) throw ParseError(line, "missing end_header");
  if (!have_format) throw ParseError(line, "missing format line");

  const auto vertex = std::find_if(elements.begin(), elements.end(),
                                   [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex == elements.end()) throw ParseError(line, "no vertex element");
  if (vertex->has_list) throw ParseError(line, "list properties on vertex are not supported");
  const auto column = [&](const char* name) -> std::size_t {
    const auto it = std::find(vertex->properties.begin(), vertex->properties.end(), name);
    if (it == vertex->properties.end()) {
      throw ParseError(line, std::string("vertex element lacks property '") + name + "'");
    }
    return static_cast<std::size_t>(it - vertex->properties.begin());
  };
  const std::size_t cx = column("x");
  const std::size_t cy = column("y");
  const std::size_t cz = column("z");

  for (auto e = elements.begin(); e != vertex; ++e) {
    for (std::size_t i = 0; i < e->count; ++i) {
      if (!next_line()) throw ParseError(line + 1, "unexpected end of file in '" + e->name + "'");
    }
  }
  cloud.points.reserve(vertex->count);
  for (std::size_t i = 0; i < vertex->count; ++i) {
    if (!next_line()) throw ParseError(line + 1, "unexpected end of file in vertex data");
    const auto tokens = split_ws(raw);
    if (tokens.size() != vertex->properties.size()) {
      throw ParseError(line, "expected " + std::to_string(vertex->properties.size()) +
                                 " values, got " + std::to_string(tokens.size()));
    }
    cloud.points.emplace_back(parse_coordinate(tokens[cx], line),
                              parse_coordinate(tokens[cy], line),
                              parse_coordinate(tokens[cz], line));
  }
  return cloud;
}

PointCloud read_csv(std::istream& in) {
  PointCloud cloud;
  std::string raw;
  std::size_t line = 0;
  bool seen_row = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      fields.push_back(text.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!seen_row) {
      seen_row = true;
      const bool numeric = std::all_of(fields.begin(), fields.end(),
                                       [](std::string_view f) { return parse_double(f).has_value(); });
      if (!numeric && fields.size() == 3) continue;  // header
    }
    if (fields.size() != 3) {
      throw ParseError(line, "expected 3 values, got " + std::to_string(fields.size()));
    }
    cloud.points.emplace_back(parse_coordinate(fields[0], line), parse_coordinate(fields[1], line),
                              parse_coordinate(fields[2], line));
  }
  return cloud;
}

void write_ply(const PointCloud& cloud, std::ostream& out) {
  out << "ply\nformat ascii 1.0\n";
  if (!cloud.label.empty()) out << "comment label " << cloud.label << '\n';
  write_pose_comment(out, "sensor_pose", cloud.sensor_pose);
  if (cloud.capture_pose) write_pose_comment(out, "capture_pose", *cloud.capture_pose);
  out << "element vertex " << cloud.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& p : cloud.points) {
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z())
        << '\n';
  }
}

void write_csv(const PointCloud& cloud, std::ostream& out) {
  out << "x,y,z\n";
  for (const auto& p : cloud.points) {
    out << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z())
        << '\n';
  }
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  PointCloud cloud = format == CloudFormat::kPlyAscii ? read_ply(in) : read_csv(in);
  if (cloud.label.empty()) cloud.label = path.stem().string();
  return cloud;
}

PointCloud load_cloud(const std::filesystem::path& path) {
  const auto format = cloud_format_from_path(path);
  if (!format) throw std::runtime_error("cannot infer cloud format of " + path.string());
  return load_cloud(path, *format);
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (format == CloudFormat::kPlyAscii) {
    write_ply(cloud, out);
  } else {
    write_csv(cloud, out);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  const auto format = cloud_format_from_path(path);
  if (!format) throw std::runtime_error("cannot infer cloud format of " + path.string());
  save_cloud(cloud, path, *format);
}

namespace {

struct DigestDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256: init failed");
    }
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("sha256: update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &len) != 1) {
      throw std::runtime_error("sha256: final failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[digest[i] >> 4]);
      out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, DigestDeleter> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

}  // namespace dvf
