#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dvf/geometry.hpp"

namespace dvf {

enum class CloudFormat { kPlyAscii, kXyzCsv };

const char* to_string(CloudFormat format);
std::optional<CloudFormat> cloud_format_from_string(std::string_view name);
/// .ply -> PLY, .csv / .xyz / .txt -> CSV.
std::optional<CloudFormat> cloud_format_from_path(const std::filesystem::path& path);

/// Malformed cloud file. line() is 1-based, 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

/// ASCII PLY. The vertex element needs x, y and z scalar properties; other
/// properties and elements are skipped. Recognised comments:
///   comment sensor_pose <x> <y> <z> <roll> <pitch> <yaw>
///   comment capture_pose <x> <y> <z> <roll> <pitch> <yaw>
///   comment label <text>
PointCloud read_ply(std::istream& in);
/// One x,y,z triple per line. A non-numeric first line is taken as a header.
PointCloud read_csv(std::istream& in);

void write_ply(const PointCloud& cloud, std::ostream& out);
void write_csv(const PointCloud& cloud, std::ostream& out);

/// Throws std::runtime_error if the file cannot be opened, ParseError on bad content.
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format);
PointCloud load_cloud(const std::filesystem::path& path);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path);

/// Lowercase hex SHA-256 of the file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

}  // namespace dvf
