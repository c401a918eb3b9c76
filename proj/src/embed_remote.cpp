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

#include <cmath>
#include <condition_variable>
#include <mutex>

#include <httplib.h>

#include "spandetect/embed.hpp"
#include "spandetect/error.hpp"

namespace spandetect {
namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
    fail(ErrorCode::kInvalidArgument, "embedder endpoint must be an http:// URL, got \"" + url + "\"");
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

// One unit of work sent to the service: a token window of one document.
struct WindowJob {
  std::size_t doc;
  TokenWindow window;
};

}  // namespace

struct RemoteEmbedder::Impl {
  Endpoint endpoint;

  // Bounds concurrent requests across every thread calling this embedder.
  std::mutex mu;
  std::condition_variable cv;
  std::size_t in_flight = 0;
  std::size_t limit = 1;

  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return in_flight < limit; });
    ++in_flight;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      --in_flight;
    }
    cv.notify_one();
  }
};

RemoteEmbedder::RemoteEmbedder(EmbedderConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  if (config_.dim == 0) fail(ErrorCode::kInvalidArgument, "embedder dim must be positive");
  if (config_.batch_size == 0) fail(ErrorCode::kInvalidArgument, "batch_size must be positive");
  if (config_.max_in_flight == 0) fail(ErrorCode::kInvalidArgument, "max_in_flight must be positive");
  if (config_.window_overlap >= config_.window_tokens) {
    fail(ErrorCode::kInvalidArgument, "window_overlap must be smaller than window_tokens");
  }
  impl_->endpoint = split_endpoint(config_.endpoint);
  impl_->limit = config_.max_in_flight;
}

RemoteEmbedder::~RemoteEmbedder() = default;

std::string RemoteEmbedder::fingerprint() const {
  return "remote/v1;dim=" + std::to_string(config_.dim) + ";model=" + config_.model +
         ";window=" + std::to_string(config_.window_tokens) + "/" +
         std::to_string(config_.window_overlap);
}

TokenVectors RemoteEmbedder::embed(const TokenizedDoc& doc) const {
  auto out = embed_batch(std::span<const TokenizedDoc>(&doc, 1));
  return std::move(out.front());
}

std::vector<TokenVectors> RemoteEmbedder::embed_batch(std::span<const TokenizedDoc> docs) const {
  std::vector<WindowJob> jobs;
  std::vector<std::vector<TokenWindow>> windows(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].empty()) {
      fail(ErrorCode::kInvalidArgument, "cannot embed empty document \"" + docs[d].doc_id + "\"");
    }
    windows[d] = plan_windows(docs[d].size(), config_.window_tokens, config_.window_overlap);
    for (const auto& w : windows[d]) jobs.push_back({d, w});
  }

  // Per-window results, indexed like `jobs`.
  std::vector<std::vector<std::vector<float>>> results(jobs.size());
  for (std::size_t first = 0; first < jobs.size(); first += config_.batch_size) {
    const std::size_t last = std::min(first + config_.batch_size, jobs.size());
    nlohmann::json texts = nlohmann::json::array();
    for (std::size_t j = first; j < last; ++j) {
      const auto& tokens = docs[jobs[j].doc].tokens;
      texts.push_back(std::vector<std::string>(tokens.begin() + jobs[j].window.begin,
                                               tokens.begin() + jobs[j].window.end));
    }
    const std::string body = nlohmann::json{{"texts", std::move(texts)}}.dump();

    httplib::Result res;
    impl_->acquire();
    try {
      httplib::Client client(impl_->endpoint.base);
      const auto secs = static_cast<time_t>(config_.timeout_seconds);
      const auto usecs = static_cast<time_t>((config_.timeout_seconds - secs) * 1e6);
      client.set_connection_timeout(secs, usecs);
      client.set_read_timeout(secs, usecs);
      client.set_write_timeout(secs, usecs);
      res = client.Post(impl_->endpoint.path, body, "application/json");
    } catch (...) {
      impl_->release();
      throw;
    }
    impl_->release();

    if (!res) {
      fail(ErrorCode::kBackendUnavailable, "embedding service " + config_.endpoint +
                                               " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      fail(res->status >= 500 ? ErrorCode::kBackendUnavailable : ErrorCode::kBackendProtocol,
           "embedding service returned HTTP " + std::to_string(res->status));
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::kBackendProtocol, std::string("embedding service sent invalid JSON: ") + e.what());
    }
    const auto it = reply.find("embeddings");
    if (it == reply.end() || !it->is_array()) {
      fail(ErrorCode::kBackendProtocol, "embedding service reply lacks an \"embeddings\" array");
    }
    if (it->size() != last - first) {
      fail(ErrorCode::kBackendProtocol, "embedding service returned " + std::to_string(it->size()) +
                                            " texts, expected " + std::to_string(last - first));
    }
    for (std::size_t j = first; j < last; ++j) {
      const auto& per_text = (*it)[j - first];
      const std::size_t expected = jobs[j].window.end - jobs[j].window.begin;
      if (!per_text.is_array() || per_text.size() != expected) {
        fail(ErrorCode::kBackendProtocol,
             "embedding service returned " + std::to_string(per_text.is_array() ? per_text.size() : 0) +
                 " token vectors for \"" + docs[jobs[j].doc].doc_id + "\", expected " +
                 std::to_string(expected));
      }
      auto& rows = results[j];
      rows.reserve(expected);
      for (const auto& v : per_text) {
        if (!v.is_array() || v.size() != config_.dim) {
          fail(ErrorCode::kMismatch, "embedding service returned vectors of dim " +
                                         std::to_string(v.is_array() ? v.size() : 0) + ", expected " +
                                         std::to_string(config_.dim));
        }
        std::vector<float> row(config_.dim);
        for (std::size_t d = 0; d < config_.dim; ++d) {
          if (!v[d].is_number()) fail(ErrorCode::kBackendProtocol, "non-numeric vector component");
          row[d] = v[d].get<float>();
          if (!std::isfinite(row[d])) fail(ErrorCode::kBackendProtocol, "non-finite vector component");
        }
        rows.push_back(std::move(row));
      }
    }
  }

  // Stitch windows back together.
  std::vector<TokenVectors> out(docs.size());
  std::size_t job = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const std::size_t m = docs[d].size();
    out[d].doc_id = docs[d].doc_id;
    out[d].dim = config_.dim;
    out[d].data.resize(m * config_.dim);
    const std::size_t first_job = job;
    job += windows[d].size();
    for (std::size_t t = 0; t < m; ++t) {
      std::size_t best = first_job;
      std::size_t best_margin = 0;
      bool found = false;
      for (std::size_t w = first_job; w < job; ++w) {
        const auto& win = jobs[w].window;
        if (t < win.begin || t >= win.end) continue;
        const std::size_t margin = std::min(t - win.begin, win.end - 1 - t);
        if (!found || margin > best_margin) {
          best = w;
          best_margin = margin;
          found = true;
        }
      }
      const auto& src = results[best][t - jobs[best].window.begin];
      std::copy(src.begin(), src.end(), out[d].row(t).begin());
    }
  }
  return out;
}

}  // namespace spandetect
