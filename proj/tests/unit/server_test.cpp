// Copyright 2026 The synseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "synseg/server.hpp"

#include <unistd.h>

#include <filesystem>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "httplib.h"
#include "json.hpp"
#include "synseg/image_io.hpp"

namespace synseg {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("synseg_srv_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "patches");
    std::vector<AggregateRecord> manifest;
    std::vector<std::string> ids;
    for (int i = 1; i <= 4; ++i) {
      AggregateRecord r;
      r.wsi_id = "s";
      r.tile_id = "0_0";
      r.aggregate_id = "s_0_0_00" + std::to_string(i);
      r.patch_ref = "patches/" + r.aggregate_id + ".png";
      manifest.push_back(r);
      ids.push_back(r.aggregate_id);
    }
    WriteRgbPng(dir_ / "patches" / "s_0_0_001.png", RgbImage(8, 8, 3, 200));
    const std::vector<float> v = {1, 0, 0.9f, 0.1f, 0, 1, 0.6f, 0.4f};
    auto index = std::make_shared<EmbeddingIndex>(v, 2, ids);
    service_ = std::make_unique<AnnotationService>(manifest, index, dir_,
                                                   dir_ / "annotations.jsonl");
    server_ = std::make_unique<AnnotationServer>(*service_);
    port_ = server_->BindToAnyPort("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->ListenAfterBind(); });
    server_->WaitUntilReady();
  }
  void TearDown() override {
    server_->Stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
    service_.reset();
    fs::remove_all(dir_);
  }

  httplib::Client Client() { return httplib::Client("127.0.0.1", port_); }

  fs::path dir_;
  std::unique_ptr<AnnotationService> service_;
  std::unique_ptr<AnnotationServer> server_;
  std::thread thread_;
  int port_ = -1;
};

TEST_F(ServerTest, Classes) {
  auto cli = Client();
  const auto res = cli.Get("/api/classes");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto j = json::parse(res->body);
  ASSERT_EQ(j["classes"].size(), 6u);
  EXPECT_EQ(j["classes"][0]["name"], "LewyBody");
}

TEST_F(ServerTest, RoundTrip) {
  auto cli = Client();
  auto res = cli.Get("/api/aggregates?page=0&size=3");
  ASSERT_TRUE(res);
  auto j = json::parse(res->body);
  EXPECT_EQ(j["total"], 4);
  ASSERT_EQ(j["items"].size(), 3u);
  EXPECT_EQ(j["items"][0]["patch_url"], "/api/aggregates/s_0_0_001/patch");

  res = cli.Post("/api/query", R"({"aggregate_id":"s_0_0_001","k":2})", "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  j = json::parse(res->body);
  ASSERT_EQ(j["results"].size(), 2u);
  EXPECT_EQ(j["results"][0]["id"], "s_0_0_001");
  EXPECT_EQ(j["results"][0]["rank"], 1);
  EXPECT_EQ(j["results"][1]["id"], "s_0_0_002");

  res = cli.Post("/api/query", R"({"aggregate_id":"s_0_0_001"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["k"], 250);

  res = cli.Post("/api/annotations",
                 R"({"aggregate_id":"s_0_0_002","label":"Axon","annotator":"dr"})",
                 "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  EXPECT_EQ(json::parse(res->body)["superseded"], false);
  res = cli.Post("/api/annotations",
                 R"({"aggregate_id":"s_0_0_002","label":"Dendrite","annotator":"dr"})",
                 "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["supersedes"], 1);

  res = cli.Post("/api/query", R"({"aggregate_id":"s_0_0_001","k":2})", "application/json");
  EXPECT_EQ(json::parse(res->body)["results"][1]["label"], "Dendrite");

  res = cli.Get("/api/progress");
  ASSERT_TRUE(res);
  j = json::parse(res->body);
  EXPECT_EQ(j["labeled"], 1);
  EXPECT_EQ(j["total"], 4);

  res = cli.Get("/api/aggregates?filter=unlabeled");
  EXPECT_EQ(json::parse(res->body)["total"], 3);

  res = cli.Get("/api/export?format=jsonl&seed=42");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  std::istringstream lines(res->body);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(json::parse(line)["summary"]["total"], 1);
  std::getline(lines, line);
  EXPECT_EQ(json::parse(line)["label"], "Dendrite");
  EXPECT_EQ(service_->ExportDataset({}), res->body);

  res = cli.Get("/api/export?format=csv");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body.rfind("# summary ", 0), 0u);

  EXPECT_EQ(ReadAnnotationLog(dir_ / "annotations.jsonl").size(), 2u);
}

TEST_F(ServerTest, Patch) {
  auto cli = Client();
  const auto res = cli.Get("/api/aggregates/s_0_0_001/patch");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(res->body.substr(1, 3), "PNG");
  const auto missing = cli.Get("/api/aggregates/nope/patch");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
}

TEST_F(ServerTest, Errors) {
  auto cli = Client();
  auto res = cli.Post("/api/annotations",
                      R"({"aggregate_id":"s_0_0_001","label":"Blob","annotator":"dr"})",
                      "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["error"], "InvalidLabel");

  res = cli.Post("/api/annotations", R"({"aggregate_id":"zzz","label":"Axon"})",
                 "application/json");
  EXPECT_EQ(res->status, 404);
  res = cli.Post("/api/query", R"({"aggregate_id":"zzz"})", "application/json");
  EXPECT_EQ(res->status, 404);
  res = cli.Post("/api/query", "not json", "application/json");
  EXPECT_EQ(res->status, 400);
  res = cli.Get("/api/aggregates?size=0");
  EXPECT_EQ(res->status, 400);
  res = cli.Get("/api/export?format=xml");
  EXPECT_EQ(res->status, 400);
}

}  // namespace
}  // namespace synseg
