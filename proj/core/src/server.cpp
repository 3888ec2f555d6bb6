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

#include <charconv>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "synseg/error.hpp"

namespace synseg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void SendJson(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, ErrorCode code, const std::string& message) {
  int status = 400;
  if (code == ErrorCode::kNotFound) status = 404;
  if (code == ErrorCode::kIo) status = 500;
  SendJson(res, {{"error", ErrorCodeName(code)}, {"message", message}}, status);
}

int IntParam(const httplib::Request& req, const char* name, int fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string v = req.get_param_value(name);
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error(ErrorCode::kBadRequest, std::string("parameter ") + name + " must be an integer");
  }
  return out;
}

ordered_json LabelJson(const std::optional<ClassLabel>& label) {
  return label ? ordered_json(ClassLabelName(*label)) : ordered_json(nullptr);
}

json ParseBody(const httplib::Request& req) {
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::kBadRequest, "body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadRequest, "invalid JSON body: " + std::string(e.what()));
  }
}

std::string RequiredString(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw Error(ErrorCode::kBadRequest, std::string("missing string field ") + key);
  }
  return body[key].get<std::string>();
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationService& service;
  httplib::Server http;

  explicit Impl(AnnotationService& s) : service(s) { Routes(); }

  template <typename F>
  httplib::Server::Handler Guard(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        SendError(res, e.code(), e.what());
      } catch (const std::exception& e) {
        SendError(res, ErrorCode::kIo, e.what());
      }
    };
  }

  void Routes() {
    http.Get("/api/classes", Guard([](const httplib::Request&, httplib::Response& res) {
      ordered_json classes = ordered_json::array();
      for (std::size_t i = 0; i < kClassCount; ++i) {
        classes.push_back({{"key", i + 1}, {"name", ClassLabelName(kAllClasses[i])}});
      }
      SendJson(res, {{"classes", classes}});
    }));

    http.Get("/api/aggregates", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const int page = IntParam(req, "page", 0);
      const int size = IntParam(req, "size", 50);
      const auto filter =
          ParseListFilter(req.has_param("filter") ? req.get_param_value("filter") : "all");
      const auto result = service.ListAggregates(page, size, filter);
      ordered_json items = ordered_json::array();
      for (const auto& rec : result.items) {
        auto item = ordered_json::parse(RecordToJson(rec));
        item["patch_url"] = AnnotationService::PatchUrl(rec.aggregate_id);
        items.push_back(std::move(item));
      }
      SendJson(res, {{"page", result.page},
                     {"size", result.page_size},
                     {"total", result.total},
                     {"items", items}});
    }));

    http.Get(R"(/api/aggregates/([^/]+)/patch)",
             Guard([this](const httplib::Request& req, httplib::Response& res) {
               const auto path = service.PatchPath(req.matches[1].str());
               std::ifstream in(path, std::ios::binary);
               if (!in) throw Error(ErrorCode::kNotFound, "patch not found: " + path.string());
               std::ostringstream bytes;
               bytes << in.rdbuf();
               res.set_content(bytes.str(), "image/png");
             }));

    http.Post("/api/query", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const json body = ParseBody(req);
      const std::string id = RequiredString(body, "aggregate_id");
      int k = kDefaultNeighbors;
      if (body.contains("k") && !body["k"].is_null()) {
        if (!body["k"].is_number_integer()) throw Error(ErrorCode::kBadRequest, "k must be an integer");
        k = body["k"].get<int>();
      }
      ordered_json results = ordered_json::array();
      for (const auto& v : service.QueryNeighbors(id, k)) {
        results.push_back({{"rank", v.neighbor.rank},
                           {"id", v.neighbor.id},
                           {"score", v.neighbor.score},
                           {"patch_url", v.patch_url},
                           {"label", LabelJson(v.label)}});
      }
      SendJson(res, {{"query", id}, {"k", k}, {"results", results}});
    }));

    http.Post("/api/annotations", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const json body = ParseBody(req);
      const std::string annotator =
          body.contains("annotator") ? RequiredString(body, "annotator") : "default";
      const auto rec = service.SubmitAnnotation(RequiredString(body, "aggregate_id"),
                                                RequiredString(body, "label"), annotator);
      auto out = ordered_json::parse(AnnotationToJson(rec));
      out["superseded"] = rec.superseded;
      SendJson(res, out, 201);
    }));

    http.Get("/api/progress", Guard([this](const httplib::Request&, httplib::Response& res) {
      const auto p = service.GetProgress();
      ordered_json per_class = ordered_json::object();
      for (std::size_t c = 0; c < kClassCount; ++c) {
        per_class[std::string(ClassLabelName(kAllClasses[c]))] = p.per_class[c];
      }
      SendJson(res, {{"labeled", p.labeled}, {"total", p.total}, {"per_class", per_class}});
    }));

    http.Get("/api/export", Guard([this](const httplib::Request& req, httplib::Response& res) {
      ExportOptions opt;
      if (req.has_param("format")) {
        const auto f = ParseExportFormat(req.get_param_value("format"));
        if (!f) throw Error(ErrorCode::kBadRequest, "format must be jsonl or csv");
        opt.format = *f;
      }
      if (req.has_param("seed")) {
        const std::string v = req.get_param_value("seed");
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), opt.seed);
        if (ec != std::errc() || p != v.data() + v.size()) {
          throw Error(ErrorCode::kBadRequest, "seed must be a nonnegative integer");
        }
      }
      if (req.has_param("val_fraction")) {
        try {
          opt.val_fraction = std::stod(req.get_param_value("val_fraction"));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kBadRequest, "val_fraction must be a number");
        }
      }
      if (req.has_param("annotator")) opt.annotator = req.get_param_value("annotator");
      res.set_content(service.ExportDataset(opt),
                      opt.format == ExportFormat::kJsonl ? "application/x-ndjson" : "text/csv");
    }));
  }
};

AnnotationServer::AnnotationServer(AnnotationService& service)
    : impl_(std::make_unique<Impl>(service)) {}

AnnotationServer::~AnnotationServer() { Stop(); }

bool AnnotationServer::Listen(const std::string& host, int port) {
  return impl_->http.listen(host, port);
}

int AnnotationServer::BindToAnyPort(const std::string& host) {
  return impl_->http.bind_to_any_port(host);
}

bool AnnotationServer::ListenAfterBind() { return impl_->http.listen_after_bind(); }

void AnnotationServer::WaitUntilReady() const { impl_->http.wait_until_ready(); }

void AnnotationServer::Stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace synseg
