#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dvf/json_io.hpp"
#include "dvf/session.hpp"

#ifdef DVF_CLI_PATH

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dvf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status; stdout and stderr land in out.txt / err.txt.
  int run(const std::string& args) {
    const std::string cmd = std::string("cd '") + dir_.string() + "' && '" + DVF_CLI_PATH + "' " + args +
                            " > out.txt 2> err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string out() const { return slurp(dir_ / "out.txt"); }
  std::string err() const { return slurp(dir_ / "err.txt"); }

  void make_session() {
    ASSERT_EQ(run("simulate --pose 0,0,3,0,0,0 --out c1.ply"), 0) << err();
    ASSERT_EQ(run("simulate --pose 1,1,3,0,0,0.05 --out c2.ply"), 0) << err();
    ASSERT_EQ(run("register --cloud1 c1.ply --cloud2 c2.ply --out s.json"), 0) << err();
  }

  fs::path dir_;
};

TEST_F(CliTest, SimulateWritesPoseComments) {
  ASSERT_EQ(run("simulate --pose 1,1,3,0,0,0.05 --out c.ply"), 0) << err();
  const auto c = dvf::load_cloud(dir_ / "c.ply");
  EXPECT_GT(c.size(), 30000u);
  ASSERT_TRUE(c.capture_pose);
  EXPECT_NEAR(c.capture_pose->yaw(), 0.05, 1e-15);
  ASSERT_EQ(run("simulate --pose 0,0,3,0,0,0 --sensor vlp16 --noise 0.01 --seed 3 --out v.csv"), 0) << err();
  EXPECT_GT(dvf::load_cloud(dir_ / "v.csv").size(), 1000u);
}

TEST_F(CliTest, FullLoopIsDeterministic) {
  make_session();
  ASSERT_EQ(run("mitigate --session s.json --add fov --note fov"), 0) << err();
  ASSERT_EQ(run("mitigate --session s.json --add shadow"), 0) << err();
  ASSERT_EQ(run("field --session s.json --export f1.json"), 0) << err();
  ASSERT_EQ(run("field --session s.json --export f2.json"), 0) << err();
  EXPECT_EQ(slurp(dir_ / "f1.json"), slurp(dir_ / "f2.json"));
  ASSERT_EQ(run("field --session s.json --iteration 0 --export -"), 0) << err();
  const auto baseline = dvf::json::Json::parse(out());
  EXPECT_EQ(baseline.at("iteration"), 0);

  const auto session = dvf::load_session(dir_ / "s.json");
  ASSERT_EQ(session.iterations().size(), 3u);
  EXPECT_EQ(dvf::json::Json::parse(slurp(dir_ / "f1.json")), dvf::json::field_export(session.iterations()[2].field, 2));

  ASSERT_EQ(run("stats --session s.json --json"), 0) << err();
  const auto stats = dvf::json::Json::parse(out());
  ASSERT_EQ(stats.size(), 3u);
  ASSERT_EQ(run("stats --session s.json"), 0) << err();
  EXPECT_NE(out().find("fov"), std::string::npos);

  ASSERT_EQ(run("mark --session s.json --label ring --voxels 1:0,2:0"), 0) << err();
  EXPECT_EQ(dvf::load_session(dir_ / "s.json").regions().at(0).voxel_keys.size(), 2u);
}

TEST_F(CliTest, IcpRegistration) {
  ASSERT_EQ(run("simulate --pose 0,0,3,0,0,0 --out c1.ply"), 0) << err();
  auto moved = dvf::load_cloud(dir_ / "c1.ply");
  moved.capture_pose.reset();
  moved = dvf::transform_cloud(moved, dvf::RigidTransform::translation_only({-0.1, -0.05, 0}));
  moved.sensor_pose = {};
  dvf::save_cloud(moved, dir_ / "c2.csv");
  ASSERT_EQ(run("register --cloud1 c1.ply --cloud2 c2.csv --icp --out s.json"), 0) << err();
  const auto s = dvf::load_session(dir_ / "s.json");
  EXPECT_EQ(s.registration().method, dvf::RegistrationMethod::kIcp);
  EXPECT_NEAR(s.registration().transform.translation().x(), 0.1, 1e-3);
  EXPECT_NEAR(s.registration().transform.translation().y(), 0.05, 1e-3);
}

TEST_F(CliTest, ErrorsExitNonZero) {
  {
    std::ofstream out(dir_ / "bad.csv");
    out << "1,2,3\n1,2\n";
  }
  ASSERT_EQ(run("simulate --out c1.ply"), 0) << err();
  EXPECT_EQ(run("register --cloud1 c1.ply --cloud2 bad.csv --truth 0,0,3,0,0,0 0,0,3,0,0,0 --out s.json"), 1);
  EXPECT_NE(err().find("line 2"), std::string::npos) << err();
  EXPECT_NE(run("simulate --pose 1,2 --out x.ply"), 0);
  EXPECT_NE(run("field --session missing.json"), 0);
  EXPECT_NE(run("bogus"), 0);
  make_session();
  EXPECT_EQ(run("mitigate --session s.json --add ego:radius=-1"), 1);
  EXPECT_EQ(dvf::load_session(dir_ / "s.json").iterations().size(), 1u);
  EXPECT_EQ(run("mark --session s.json --label x --voxels 99:0"), 1);
  {
    std::ofstream out(dir_ / "c2.ply", std::ios::app);
    out << "\n";
  }
  EXPECT_EQ(run("stats --session s.json"), 1);
  EXPECT_NE(err().find("stale cloud reference"), std::string::npos) << err();
}

}  // namespace

#endif
