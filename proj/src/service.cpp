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


#include "spandetect/service.hpp"

#include <cmath>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "spandetect/error.hpp"

namespace spandetect {
namespace {

HttpReply error_reply(int status, std::string_view code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  return {status, j.dump(), {}};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse: return 400;
    case ErrorCode::kBackendUnavailable: return 503;
    case ErrorCode::kBackendProtocol: return 502;
    default: return 500;
  }
}

std::string format_bound(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::size_t utf8_length(std::string_view text) noexcept {
  std::size_t n = 0;
  for (unsigned char c : text) n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

HttpReply handle_detect(const Engine& engine, const std::string& body, const ServiceOptions& options) {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return error_reply(400, "bad_request", std::string("body is not valid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_reply(400, "bad_request", "body must be a JSON object");
  auto text_it = req.find("text");
  if (text_it == req.end() || !text_it->is_string()) {
    return error_reply(400, "bad_request", "field \"text\" (string) is required");
  }
  const std::string text = text_it->get<std::string>();
  if (text.find_first_not_of(" \t\r\n\f\v") == std::string::npos) {
    return error_reply(400, "empty_text", "text is empty");
  }
  const std::size_t chars = utf8_length(text);
  if (chars > options.max_text_chars) {
    return error_reply(400, "text_too_long", "text has " + std::to_string(chars) + " characters; the limit is " +
                                                 std::to_string(options.max_text_chars));
  }

  DetectOverrides ov;
  auto unit_field = [&](const char* name, std::optional<double>& out) -> std::optional<HttpReply> {
    auto it = req.find(name);
    if (it == req.end() || it->is_null()) return std::nullopt;
    if (!it->is_number() || !(it->get<double>() >= 0.0 && it->get<double>() <= 1.0)) {
      return error_reply(422, "out_of_policy", std::string(name) + " must be a number in [0, 1]");
    }
    out = it->get<double>();
    return std::nullopt;
  };
  if (auto r = unit_field("alpha", ov.alpha)) return *r;
  if (auto r = unit_field("epsilon", ov.epsilon)) return *r;
  if (auto it = req.find("k"); it != req.end() && !it->is_null()) {
    const bool integral = it->is_number_unsigned() ||
                          (it->is_number_integer() && it->get<std::int64_t>() >= 0);
    if (!integral || it->get<std::uint64_t>() < 1 || it->get<std::uint64_t>() > options.max_k) {
      return error_reply(422, "out_of_policy",
                         "k must be an integer in [1, " + format_bound(static_cast<double>(options.max_k)) + "]");
    }
    ov.k = static_cast<std::size_t>(it->get<std::uint64_t>());
  }

  try {
    const DetectionResult r = engine.detect(text, ov);
    HttpReply reply{200, to_evidence_json(r).dump(), {}};
    reply.headers["X-Elapsed-Ms"] = format_bound(r.elapsed_ms);
    return reply;
  } catch (const Error& e) {
    return error_reply(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "internal", e.what());
  }
}

HttpReply handle_health(const Engine& engine, double uptime_s) {
  const Calibration& c = engine.calibration();
  nlohmann::ordered_json j;
  j["status"] = "ok";
  j["store_fingerprint"] = engine.store().fingerprint();
  j["embedder"] = engine.embedder().fingerprint();
  j["calibration"] = {{"alpha", c.alpha}, {"epsilon", c.epsilon}, {"k", c.k},
                      {"n_max", c.n_max}, {"target_fpr", c.target_fpr}};
  j["uptime_s"] = uptime_s;
  return {200, j.dump(), {}};
}

struct Service::Impl {
  const Engine& engine;
  ServiceOptions options;
  httplib::Server server;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
  int port = -1;

  Impl(const Engine& e, ServiceOptions o) : engine(e), options(std::move(o)) {}

  void send(httplib::Response& res, const HttpReply& r) const {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    if (options.cors) res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json");
  }
};

Service::Service(const Engine& engine, ServiceOptions options)
    : impl_(std::make_unique<Impl>(engine, std::move(options))) {
  auto* impl = impl_.get();
  impl->server.Post("/api/detect", [impl](const httplib::Request& req, httplib::Response& res) {
    impl->send(res, handle_detect(impl->engine, req.body, impl->options));
  });
  impl->server.Get("/api/health", [impl](const httplib::Request&, httplib::Response& res) {
    const double up = std::chrono::duration<double>(std::chrono::steady_clock::now() - impl->started).count();
    impl->send(res, handle_health(impl->engine, up));
  });
  if (impl->options.cors) {
    impl->server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }
  if (impl->options.static_dir && !impl->server.set_mount_point("/", *impl->options.static_dir)) {
    fail(ErrorCode::kIo, "static directory " + *impl->options.static_dir + " does not exist");
  }
}

Service::~Service() { stop(); }

int Service::bind() {
  if (impl_->port >= 0) return impl_->port;
  if (impl_->options.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
    if (impl_->port < 0) fail(ErrorCode::kIo, "cannot bind " + impl_->options.host);
  } else {
    if (!impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
      fail(ErrorCode::kIo, "cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
    impl_->port = impl_->options.port;
  }
  return impl_->port;
}

void Service::run() {
  bind();
  impl_->started = std::chrono::steady_clock::now();
  if (!impl_->server.listen_after_bind()) fail(ErrorCode::kIo, "server stopped with an error");
}

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace spandetect
