#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dvf/cloud_io.hpp"
#include "oracles.hpp"

namespace {

using dvf::Point3;

dvf::PointCloud csv(const std::string& text) {
  std::istringstream in(text);
  return dvf::read_csv(in);
}

dvf::PointCloud ply(const std::string& text) {
  std::istringstream in(text);
  return dvf::read_ply(in);
}

std::size_t error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const dvf::ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError";
  return 0;
}

TEST(Csv, ThreeLines) {
  const auto c = csv("1,2,3\n4,5,6\n7,8,9\n");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.points[2], Point3(7, 8, 9));
}

TEST(Csv, HeaderCommentsAndBlankLines) {
  const auto c = csv("x,y,z\n# note\n\n1, 2 ,3\r\n-4.5e1,0,1e-3\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[1], Point3(-45, 0, 0.001));
}

TEST(Csv, ArityErrorNamesLine) {
  EXPECT_EQ(error_line([] { csv("1,2,3\n1,2\n"); }), 2u);
  EXPECT_EQ(error_line([] { csv("1,2,3,4\n"); }), 1u);
  try {
    csv("1,2,3\n4,5,6\n1,2\n");
  } catch (const dvf::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Csv, NonFiniteAndGarbageRejected) {
  EXPECT_EQ(error_line([] { csv("1,2,3\nnan,0,0\n"); }), 2u);
  EXPECT_EQ(error_line([] { csv("1,2,3\n1,inf,0\n"); }), 2u);
  EXPECT_EQ(error_line([] { csv("1,2,3\n1,2,abc\n"); }), 2u);
  EXPECT_EQ(error_line([] { csv("1,2,3\n1,2,3x\n"); }), 2u);
}

TEST(Csv, EmptyInputIsEmptyCloud) { EXPECT_TRUE(csv("").empty()); }

const char* kPlyHeader = "ply\nformat ascii 1.0\n";

TEST(Ply, ZeroVertices) {
  const auto c = ply(std::string(kPlyHeader) +
                     "element vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n");
  EXPECT_TRUE(c.empty());
}

TEST(Ply, ExtraPropertiesAndElements) {
  const auto c = ply(std::string(kPlyHeader) +
                     "comment label scan A\n"
                     "element vertex 2\nproperty float intensity\nproperty float z\nproperty float x\n"
                     "property float y\nelement face 1\nproperty list uchar int vertex_indices\n"
                     "end_header\n9 3 1 2\n9 6 4 5\n3 0 1 0\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[0], Point3(1, 2, 3));
  EXPECT_EQ(c.points[1], Point3(4, 5, 6));
  EXPECT_EQ(c.label, "scan A");
}

TEST(Ply, Rejections) {
  EXPECT_THROW(ply("plx\n"), dvf::ParseError);
  EXPECT_THROW(ply("ply\nformat binary_little_endian 1.0\nend_header\n"), dvf::ParseError);
  EXPECT_THROW(ply(std::string(kPlyHeader) + "element vertex 1\nproperty float x\nproperty float y\nend_header\n1 2\n"),
               dvf::ParseError);
  const std::string three = std::string(kPlyHeader) +
                            "element vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  EXPECT_EQ(error_line([&] { ply(three + "1 2 3\n1 2\n"); }), 9u);
  EXPECT_EQ(error_line([&] { ply(three + "1 2 3\n1 nan 3\n"); }), 9u);
  EXPECT_THROW(ply(three + "1 2 3\n"), dvf::ParseError);
  EXPECT_THROW(ply(std::string(kPlyHeader) + "comment sensor_pose 1 2 3\nend_header\n"), dvf::ParseError);
}

TEST(Ply, RoundTripIsLosslessWithPoses) {
  oracle::Random rng(21);
  dvf::PointCloud c;
  for (int i = 0; i < 200; ++i) c.points.push_back(rng.point(-50, 50));
  c.points.push_back({0.1, 1e-300, -0.0});
  c.sensor_pose = dvf::RigidTransform::from_euler({1, 1, 0}, 0.01, -0.02, 0.05);
  c.capture_pose = dvf::RigidTransform::from_euler({1, 1, 3}, 0, 0, 0.05);
  c.label = "cloud2";
  std::stringstream s;
  dvf::write_ply(c, s);
  const auto back = dvf::read_ply(s);
  EXPECT_EQ(back.points, c.points);
  EXPECT_EQ(back.label, c.label);
  ASSERT_TRUE(back.capture_pose);
  const auto d1 = dvf::transform_delta(back.sensor_pose, c.sensor_pose);
  const auto d2 = dvf::transform_delta(*back.capture_pose, *c.capture_pose);
  EXPECT_LT(d1.translation + d1.rotation, 1e-12);
  EXPECT_LT(d2.translation + d2.rotation, 1e-12);
}

TEST(Csv, RoundTripIsLossless) {
  oracle::Random rng(22);
  dvf::PointCloud c;
  for (int i = 0; i < 200; ++i) c.points.push_back(rng.point(-1e4, 1e4));
  std::stringstream s;
  dvf::write_csv(c, s);
  EXPECT_EQ(dvf::read_csv(s).points, c.points);
}

TEST(Files, FormatByExtensionAndHash) {
  const auto dir = std::filesystem::temp_directory_path() / "dvf_cloud_io_test";
  std::filesystem::create_directories(dir);
  dvf::PointCloud c;
  c.points = {{1, 2, 3}, {4, 5, 6}};
  dvf::save_cloud(c, dir / "a.ply");
  dvf::save_cloud(c, dir / "a.xyz");
  EXPECT_EQ(dvf::load_cloud(dir / "a.ply").points, c.points);
  EXPECT_EQ(dvf::load_cloud(dir / "a.xyz").points, c.points);
  EXPECT_THROW(dvf::save_cloud(c, dir / "a.bin"), std::runtime_error);
  EXPECT_THROW(dvf::load_cloud(dir / "missing.ply"), std::runtime_error);
  EXPECT_EQ(dvf::cloud_format_from_path("x.CSV"), dvf::CloudFormat::kXyzCsv);
  EXPECT_EQ(dvf::cloud_format_from_string("ply_ascii"), dvf::CloudFormat::kPlyAscii);
  EXPECT_FALSE(dvf::cloud_format_from_string("las"));

  {
    std::ofstream out(dir / "abc.txt", std::ios::binary);
    out << "abc";
  }
  EXPECT_EQ(dvf::sha256_file(dir / "abc.txt"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(dvf::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  std::filesystem::remove_all(dir);
}

}  // namespace
