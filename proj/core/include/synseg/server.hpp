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

/// @file server.hpp
/// @brief HTTP+JSON front end for AnnotationService.
///
///   GET  /api/classes
///   GET  /api/aggregates?page=0&size=50&filter=all|labeled|unlabeled|wsi:<id>
///   GET  /api/aggregates/{id}/patch                       (image/png)
///   POST /api/query        {"aggregate_id", "k"}
///   POST /api/annotations  {"aggregate_id", "label", "annotator"}
///   GET  /api/progress
///   GET  /api/export?format=jsonl|csv&seed=42&val_fraction=&annotator=
///
/// Errors are {"error": <code>, "message": <text>} with 400, 404 or 500.

#pragma once

#include <memory>
#include <string>

#include "synseg/annotation.hpp"

namespace synseg {

class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationService& service);
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Blocks until Stop(). Returns false if the socket could not be bound.
  bool Listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it (or -1); serve with ListenAfterBind.
  int BindToAnyPort(const std::string& host);
  bool ListenAfterBind();
  void WaitUntilReady() const;
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace synseg
