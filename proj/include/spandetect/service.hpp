/*
 * Copyright (c) 2026, The spandetect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "spandetect/engine.hpp"

namespace spandetect {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0: pick a free port
  std::size_t max_text_chars = 20000;  // code points
  std::size_t max_k = 100;
  bool cors = false;
  std::optional<std::string> static_dir;  // served at "/" when set
};

struct HttpReply {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Body must be {"text": "...", "alpha"?: x, "k"?: n, "epsilon"?: x}.
HttpReply handle_detect(const Engine& engine, const std::string& body, const ServiceOptions& options);
HttpReply handle_health(const Engine& engine, double uptime_s);

/// Counts code points of valid UTF-8 (continuation bytes are skipped).
std::size_t utf8_length(std::string_view text) noexcept;

class Service {
 public:
  Service(const Engine& engine, ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the socket and returns the bound port.
  int bind();
  /// Serves until stop(). Calls bind() first if needed.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace spandetect
