#include <gtest/gtest.h>

#include <thread>

#include "dvf/http_server.hpp"
#include "dvf/json_io.hpp"

// After Eigen: <resolv.h> defines _res.
#include <httplib.h>

namespace {

using dvf::json::Json;

dvf::Session small_session() {
  dvf::PointCloud c1, c2;
  for (int i = 0; i < 200; ++i) {
    const double a = i * 0.1;
    c1.points.push_back({10 * std::cos(a), 10 * std::sin(a), -1 + 0.01 * i});
    c2.points.push_back(c1.points.back() + dvf::Point3(0.05, 0, 0));
  }
  return dvf::Session(c1, c2, {}, dvf::simulation_grid());
}

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    port_ = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.listen(); });
    for (int i = 0; i < 200 && !server_.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  dvf::AnalystApi api_{small_session()};
  dvf::HttpServer server_{api_};
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(HttpTest, GetSession) {
  ASSERT_GT(port_, 0);
  const auto res = client_->Get("/api/session");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_NE(res->get_header_value("Content-Type").find("application/json"), std::string::npos);
  EXPECT_EQ(Json::parse(res->body).at("iteration_count"), 0);
}

TEST_F(HttpTest, PostIterationThenFetchFieldAndClouds) {
  auto res = client_->Post("/api/iterations", R"({"mitigation": "ego:radius=3", "note": "ego"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  res = client_->Get("/api/field/1");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto field = Json::parse(res->body);
  EXPECT_EQ(field.at("iteration"), 1);
  EXPECT_EQ(field, dvf::json::field_export(api_.snapshot().iterations()[1].field, 1));
  res = client_->Get("/api/clouds/1?decimate=4");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(Json::parse(res->body).at("cloud1").at("points").size(), 50u);
}

TEST_F(HttpTest, Errors) {
  auto res = client_->Get("/api/field/3");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(Json::parse(res->body).at("code"), "no_such_iteration");
  res = client_->Post("/api/iterations", "{oops", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = client_->Get("/nowhere");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(Json::parse(res->body).at("code"), "not_found");
  res = client_->Options("/api/session");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
}

TEST_F(HttpTest, RegionsPersistAcrossRequests) {
  client_->Post("/api/iterations", "{}", "application/json");
  auto res = client_->Post("/api/regions",
                           R"({"label": "ring", "voxel_keys": [{"azimuth_index": 0, "elevation_index": 5}]})",
                           "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  res = client_->Get("/api/regions");
  ASSERT_TRUE(res);
  EXPECT_EQ(Json::parse(res->body).at("regions").at(0).at("label"), "ring");
}

TEST(Http, BindFailureThrows) {
  dvf::AnalystApi api(small_session());
  dvf::HttpServer a(api);
  const int port = a.bind("127.0.0.1", 0);
  dvf::HttpServer b(api);
  EXPECT_THROW(b.bind("127.0.0.1", port), std::runtime_error);
}

}  // namespace
