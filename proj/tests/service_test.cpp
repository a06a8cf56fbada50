#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>
#include <vector>

#include "httplib.h"

#include "hmdgeom/service/handlers.hpp"
#include "hmdgeom/service/http.hpp"
#include "oracles.hpp"

using namespace hmdgeom;
using namespace hmdgeom::service;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidInput;
}

const json kDiverging = {{"family", "custom"},
                         {"custom", {{"view_offset_left_m", {0.05, 0, 0}}, {"view_offset_right_m", {-0.05, 0, 0}}}},
                         {"target_z_m", 0.3}};

class LiveServer : public ::testing::Test {
 protected:
  void SetUp() override {
    ServeOptions options;
    server_ = make_server(options);
    port_ = server_->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }
  httplib::Result post(const std::string& path, const std::string& body) const {
    return client().Post(path, body, "application/json");
  }

  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(ParseScenario, DefaultsAndPresets) {
  const Scenario none = parse_scenario(json::object());
  EXPECT_EQ(none.hmd.iad(), 0.064);
  EXPECT_EQ(none.hmd.vid(), 1.3);

  const Scenario ipd = parse_scenario({{"family", "ipd-iad"}});
  EXPECT_NEAR(ipd.hmd.iad(), 0.052, 1e-15);
  EXPECT_EQ(std::get<IpdIad>(ipd.errors).delta, -0.012);

  const Scenario relief = parse_scenario({{"family", "eye-relief"}, {"magnitude_m", -0.02}, {"vid_m", 2.0}});
  EXPECT_EQ(std::get<EyeRelief>(relief.errors).e, -0.02);
  EXPECT_EQ(relief.hmd.vid(), 2.0);
}

TEST(ParseScenario, RejectsBadInput) {
  EXPECT_EQ(code_of([] { parse_scenario({{"family", "passthrough"}, {"magnitude_m", 0.25}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { parse_scenario({{"family", "eye-relief"}, {"magnitude_m", 0.11}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { parse_scenario({{"family", "warp"}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { parse_scenario({{"vid_m", "far"}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { parse_scenario({{"vid_m", -1.0}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { parse_scenario({{"family", "custom"}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { parse_scenario(json::array()); }), ErrorCode::InvalidInput);
}

TEST(HandlePredict, Examples) {
  const json pass = handle_predict({{"family", "passthrough"}, {"magnitude_m", 0.055}, {"target_z_m", 0.5}});
  EXPECT_EQ(pass["perceived_hmd"][2], 0.445);
  EXPECT_EQ(pass["status"], "converged");

  const json none = handle_predict({{"family", "none"}, {"target_z_m", 0.3}});
  EXPECT_EQ(none["perceived_hmd"][2], 0.3);

  const json ipd = handle_predict({{"family", "ipd-iad"}, {"magnitude_m", -0.012}, {"target_z_m", 0.5}});
  EXPECT_NEAR(ipd["perceived_hmd"][2].get<double>(), oracle::ipd_iad_on_axis(1.3, 0.064, 0.052, 0.5), 1e-8);

  const json lateral = handle_predict({{"target_m", {0.1, 0.05, 0.8}}});
  EXPECT_EQ(lateral["intended"], json({0.1, 0.05, 0.8}));
  EXPECT_EQ(lateral["perceived_hmd"], json({0.1, 0.05, 0.8}));
}

TEST(HandlePredict, Errors) {
  EXPECT_EQ(code_of([] { handle_predict({{"family", "none"}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { handle_predict({{"target_m", {0, 0}}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { handle_predict(kDiverging); }), ErrorCode::Diverged);
  EXPECT_EQ(code_of([] { handle_predict({{"family", "passthrough"}, {"target_z_m", 0.04}}); }),
            ErrorCode::PointBehindCamera);
}

TEST(HandleField, EyeReliefDisplayRowUndistorted) {
  const json body = handle_field({{"family", "eye-relief"}, {"magnitude_m", 0.03}});
  ASSERT_EQ(body["points"].size(), 21u * 29u);
  int on_plane = 0;
  for (const auto& p : body["points"]) {
    if (std::abs(p["intended"][2].get<double>() - 1.3) > 1e-12) continue;
    ++on_plane;
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(p["perceived_hmd"][k].get<double>(), p["intended"][k].get<double>(), 1e-9);
    }
    EXPECT_NEAR(p["perceived_ego"][2].get<double>(), 1.27, 1e-9);
  }
  EXPECT_EQ(on_plane, 21);
}

TEST(HandleField, CustomGrid) {
  const json body = handle_field({{"grid", {{"nx", 3}, {"nz", 2}, {"z_min_m", 0.5}, {"z_max_m", 1.0}}}});
  EXPECT_EQ(body["points"].size(), 6u);
  EXPECT_EQ(body["grid"]["nx"], 3);
  EXPECT_EQ(code_of([] { handle_field({{"grid", {{"nx", 0}}}}); }), ErrorCode::InvalidInput);
}

TEST(HandleFit, BinsAndTrials) {
  const json bins = {{"bins",
                      {{{"x", -0.012}, {"n_total", 20}, {"n_closer", 2}},
                       {{"x", 0.0}, {"n_total", 20}, {"n_closer", 10}},
                       {{"x", 0.012}, {"n_total", 20}, {"n_closer", 18}}}},
                     {"n_resamples", 50},
                     {"seed", 3}};
  const json a = handle_fit(bins);
  const json b = handle_fit(bins);
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_GT(a["slope"].get<double>(), 0.0);
  EXPECT_EQ(a["n_resamples"], 50);
  EXPECT_TRUE(a["converged"].get<bool>());

  json trials = json::array();
  for (const auto& bin : bins["bins"]) {
    for (int i = 0; i < bin["n_total"].get<int>(); ++i) {
      trials.push_back({{"error_m", bin["x"]}, {"response", i < bin["n_closer"].get<int>() ? 1 : 0}});
    }
  }
  const json c = handle_fit({{"trials", trials}, {"n_resamples", 50}, {"seed", 3}});
  EXPECT_EQ(a.dump(), c.dump());
}

TEST(HandleFit, Errors) {
  EXPECT_EQ(code_of([] { handle_fit({{"bins", {{{"x", 0.01}, {"n_total", 5}, {"n_closer", 2}}}}}); }),
            ErrorCode::DegenerateData);
  EXPECT_EQ(code_of([] { handle_fit(json::object()); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { handle_fit({{"trials", {{{"error_m", 0.01}, {"response", 3}}}}}); }), ErrorCode::InvalidInput);
}

TEST(HandleSimulate, SeededAndDeterministic) {
  const json request = {{"family", "passthrough"}, {"target_z_m", 0.5}, {"seed", 11}, {"n_per_level", 40}};
  const json a = handle_simulate(request);
  EXPECT_EQ(a.dump(), handle_simulate(request).dump());
  ASSERT_EQ(a["bins"].size(), 5u);
  EXPECT_EQ(a["bins"][0]["x"], -0.055);
  EXPECT_EQ(a["bins"][4]["n_total"], 40);
  EXPECT_EQ(code_of([] { handle_simulate({{"family", "passthrough"}, {"target_z_m", 0.5}}); }), ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] { handle_simulate({{"family", "passthrough"}, {"target_z_m", 0.5}, {"seed", -1}}); }),
            ErrorCode::InvalidInput);
  EXPECT_EQ(code_of([] {
              handle_simulate({{"family", "passthrough"}, {"target_z_m", 0.5}, {"seed", 1}, {"levels_m", {0.3}}});
            }),
            ErrorCode::InvalidInput);
}

TEST(HandlePipelineCheck, CanonicalPresets) {
  const json body = handle_pipeline_check(json::object());
  EXPECT_LT(body["max_deviation_m"].get<double>(), 1e-6);
  ASSERT_EQ(body["configs"].size(), 3u);
  for (const auto& c : body["configs"]) EXPECT_EQ(c["points_checked"], 25);
  EXPECT_EQ(body["grid"]["nx"], 5);
}

TEST(HandleReachTable, Slopes) {
  const json pass = handle_reach_table({{"family", "passthrough"}, {"magnitudes_m", {-0.055, 0.055}}, {"target_z_m", 0.3}});
  EXPECT_NEAR(pass["model_slope"].get<double>(), -1.0, 1e-6);
  EXPECT_NEAR(pass["trend_slope"].get<double>(), -1.0, 1e-6);
  const json relief = handle_reach_table({{"family", "eye-relief"}, {"target_z_m", 0.3}});
  EXPECT_NEAR(relief["model_slope"].get<double>(), -0.3 / 1.3, 1e-6);
  EXPECT_EQ(relief["rows"].size(), 3u);
  const json ipd = handle_reach_table({{"family", "ipd-iad"}, {"target_z_m", 0.3}});
  EXPECT_NEAR(ipd["model_slope"].get<double>(), oracle::ipd_iad_slope(1.3, 0.064, 0.3), 1e-5);
}

TEST(ErrorMapping, StatusCodes) {
  EXPECT_EQ(http_status(ErrorCode::InvalidInput), 400);
  EXPECT_EQ(http_status(ErrorCode::DegenerateData), 400);
  EXPECT_EQ(http_status(ErrorCode::Diverged), 422);
  EXPECT_EQ(http_status(ErrorCode::PointBehindCamera), 422);
  EXPECT_EQ(http_status(ErrorCode::IoFailure), 500);
  EXPECT_EQ(error_body(ErrorCode::Diverged, "x").dump(), R"({"error":{"code":"Diverged","message":"x"}})");
}

TEST(DefaultPort, ReadsEnvironment) {
  ::setenv("HMDGEOM_PORT", "9123", 1);
  EXPECT_EQ(default_port(), 9123);
  ::setenv("HMDGEOM_PORT", "not-a-port", 1);
  EXPECT_EQ(default_port(), 8080);
  ::unsetenv("HMDGEOM_PORT");
  EXPECT_EQ(default_port(), 8080);
}

TEST_F(LiveServer, Health) {
  auto res = client().Get("/api/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, R"({"status":"ok"})");
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(LiveServer, Preflight) {
  auto res = client().Options("/api/predict");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_NE(res->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
}

TEST_F(LiveServer, PredictIsStatelessAndMatchesHandler) {
  const json request = {{"family", "ipd-iad"}, {"magnitude_m", -0.012}, {"target_z_m", 0.5}};
  auto a = post("/api/predict", request.dump());
  auto b = post("/api/predict", request.dump());
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->status, 200);
  EXPECT_EQ(a->body, b->body);
  EXPECT_EQ(a->body, handle_predict(request).dump());
  EXPECT_EQ(a->get_header_value("Content-Type"), "application/json");
}

TEST_F(LiveServer, FieldRowAtVid) {
  auto res = post("/api/field", json({{"family", "eye-relief"}, {"magnitude_m", 0.03}}).dump());
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const json body = json::parse(res->body);
  for (const auto& p : body["points"]) {
    if (std::abs(p["intended"][2].get<double>() - 1.3) > 1e-12) continue;
    EXPECT_EQ(p["perceived_hmd"], p["intended"]);
  }
}

TEST_F(LiveServer, ErrorStatuses) {
  auto malformed = post("/api/predict", "{not json");
  ASSERT_TRUE(malformed);
  EXPECT_EQ(malformed->status, 400);
  EXPECT_EQ(json::parse(malformed->body)["error"]["code"], "InvalidInput");

  auto invalid = post("/api/predict", json({{"family", "warp"}, {"target_z_m", 0.5}}).dump());
  ASSERT_TRUE(invalid);
  EXPECT_EQ(invalid->status, 400);

  auto diverged = post("/api/predict", kDiverging.dump());
  ASSERT_TRUE(diverged);
  EXPECT_EQ(diverged->status, 422);
  EXPECT_EQ(json::parse(diverged->body)["error"]["code"], "Diverged");

  auto degenerate = post("/api/fit", json({{"bins", {{{"x", 0.01}, {"n_total", 5}, {"n_closer", 2}}}}}).dump());
  ASSERT_TRUE(degenerate);
  EXPECT_EQ(degenerate->status, 400);
  EXPECT_EQ(json::parse(degenerate->body)["error"]["code"], "DegenerateData");

  auto missing = client().Get("/api/nothing");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
}

TEST_F(LiveServer, ConcurrentSeededSimulationsAgree) {
  const std::string body = json({{"family", "ipd-iad"}, {"target_z_m", 2.5}, {"seed", 5}, {"n_per_level", 200}}).dump();
  std::vector<std::future<std::string>> calls;
  for (int i = 0; i < 6; ++i) {
    calls.push_back(std::async(std::launch::async, [&] {
      auto res = post("/api/simulate", body);
      return res ? res->body : std::string("no response");
    }));
  }
  const std::string first = calls[0].get();
  EXPECT_EQ(first, handle_simulate(json::parse(body)).dump());
  for (std::size_t i = 1; i < calls.size(); ++i) EXPECT_EQ(calls[i].get(), first);
}

TEST_F(LiveServer, PipelineCheckAndReachTable) {
  auto check = post("/api/pipeline-check", "{}");
  ASSERT_TRUE(check);
  EXPECT_EQ(check->status, 200);
  EXPECT_LT(json::parse(check->body)["max_deviation_m"].get<double>(), 1e-6);
  auto reach = post("/api/reach-table", json({{"family", "passthrough"}, {"target_z_m", 0.3}}).dump());
  ASSERT_TRUE(reach);
  EXPECT_EQ(reach->status, 200);
}

TEST(CorsAllowlist, OnlyListedOriginsAreEchoed) {
  ServeOptions options;
  options.cors_origins = {"http://localhost:5173"};
  auto server = make_server(options);
  const int port = server->bind_to_any_port("127.0.0.1");
  std::thread t([&] { server->listen_after_bind(); });
  server->wait_until_ready();
  httplib::Client c("127.0.0.1", port);
  auto allowed = c.Get("/api/health", {{"Origin", "http://localhost:5173"}});
  auto denied = c.Get("/api/health", {{"Origin", "http://evil.example"}});
  server->stop();
  t.join();
  ASSERT_TRUE(allowed && denied);
  EXPECT_EQ(allowed->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
  EXPECT_FALSE(denied->has_header("Access-Control-Allow-Origin"));
}
