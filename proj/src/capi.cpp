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


#include "spandetect/spandetect.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "spandetect/corpus.hpp"
#include "spandetect/datastore.hpp"
#include "spandetect/engine.hpp"
#include "spandetect/error.hpp"
#include "spandetect/experiments.hpp"
#include "spandetect/service.hpp"

struct sd_engine {
  std::unique_ptr<spandetect::Engine> engine;
};

namespace {

using namespace spandetect;
using nlohmann::json;

thread_local std::string g_last_error;

sd_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return SD_ERR_INVALID_ARGUMENT;
    case ErrorCode::kParse: return SD_ERR_PARSE;
    case ErrorCode::kIo: return SD_ERR_IO;
    case ErrorCode::kMismatch: return SD_ERR_MISMATCH;
    case ErrorCode::kBackendUnavailable: return SD_ERR_BACKEND_UNAVAILABLE;
    case ErrorCode::kBackendProtocol: return SD_ERR_BACKEND_PROTOCOL;
    case ErrorCode::kInternal: return SD_ERR_INTERNAL;
  }
  return SD_ERR_INTERNAL;
}

template <class F>
sd_status guarded(F&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return SD_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("bad options: ") + e.what();
    return SD_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SD_ERR_INTERNAL;
  }
}

const char* need(const char* s, const char* what) {
  if (s == nullptr || *s == '\0') fail(ErrorCode::kInvalidArgument, std::string(what) + " is required");
  return s;
}

json parse_options(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("options are not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParse, "options must be a JSON object");
  return j;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out != nullptr) *out = dup(s);
}

VocabProfile profile_from_json(const json& j) {
  VocabProfile p;
  p.machine_phrases = j.value("machine_phrases", p.machine_phrases);
  p.human_phrases = j.value("human_phrases", p.human_phrases);
  p.min_phrase_len = j.value("min_phrase_len", p.min_phrase_len);
  p.max_phrase_len = j.value("max_phrase_len", p.max_phrase_len);
  p.min_tokens = j.value("min_tokens", p.min_tokens);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  p.llm_phrase_rate = j.value("llm_phrase_rate", p.llm_phrase_rate);
  p.human_phrase_rate = j.value("human_phrase_rate", p.human_phrase_rate);
  p.cross_rate = j.value("cross_rate", p.cross_rate);
  p.domain = j.value("domain", p.domain);
  p.generator = j.value("generator", p.generator);
  return p;
}

BuildOptions build_options(const json& j) {
  BuildOptions b;
  b.n_max = j.value("n_max", b.n_max);
  b.k_default = j.value("k", b.k_default);
  b.threads = j.value("threads", b.threads);
  b.tokenizer.kind = j.value("tokenizer", b.tokenizer.kind);
  if (auto a = j.find("approximate"); a != j.end()) b.approximate = ApproximateParams::from_json(*a);
  return b;
}

EmbedderConfig embedder_config(const json& j) {
  EmbedderConfig cfg;
  if (auto e = j.find("embedder"); e != j.end()) cfg = EmbedderConfig::from_json(*e);
  if (cfg.kind == "remote" && cfg.endpoint.empty()) {
    if (const char* env = std::getenv(kEndpointEnv); env != nullptr) cfg.endpoint = env;
  }
  return cfg;
}

PipelineOptions pipeline_options(const json& j) {
  PipelineOptions p;
  p.k = j.value("k", p.k);
  p.n_max = j.value("n_max", p.n_max);
  p.target_fpr = j.value("target_fpr", p.target_fpr);
  p.threads = j.value("threads", p.threads);
  p.per_domain_thresholds = j.value("per_domain", p.per_domain_thresholds);
  p.segment.literal_init = j.value("literal_init", false);
  if (j.value("exact", false)) p.knn.mode = SearchMode::kExact;
  p.run_config = j;
  p.run_config.erase("threads");  // does not affect results
  return p;
}

std::optional<std::string> endpoint_option(const json& j) {
  if (auto e = j.find("endpoint"); e != j.end() && e->is_string()) return e->get<std::string>();
  return std::nullopt;
}

SpanStore open_store(const char* dir, const json& opts) {
  SpanStore store = SpanStore::load(need(dir, "store directory"));
  if (auto a = opts.find("approximate"); a != opts.end()) store.enable_approximate(ApproximateParams::from_json(*a));
  return store;
}

}  // namespace

extern "C" {

const char* sd_version(void) { return "0.1.0"; }

const char* sd_status_name(sd_status status) {
  switch (status) {
    case SD_OK: return "ok";
    case SD_ERR_INVALID_ARGUMENT: return to_string(ErrorCode::kInvalidArgument);
    case SD_ERR_PARSE: return to_string(ErrorCode::kParse);
    case SD_ERR_IO: return to_string(ErrorCode::kIo);
    case SD_ERR_MISMATCH: return to_string(ErrorCode::kMismatch);
    case SD_ERR_BACKEND_UNAVAILABLE: return to_string(ErrorCode::kBackendUnavailable);
    case SD_ERR_BACKEND_PROTOCOL: return to_string(ErrorCode::kBackendProtocol);
    case SD_ERR_INTERNAL: return to_string(ErrorCode::kInternal);
  }
  return "unknown";
}

const char* sd_last_error(void) { return g_last_error.c_str(); }

void sd_string_free(char* s) { std::free(s); }

sd_status sd_synthesize_corpus(const char* options_json, const char* out_path) {
  return guarded([&] {
    const json o = parse_options(options_json);
    std::map<Split, std::size_t> pairs{{Split::kTrain, o.value("train", std::size_t{200})},
                                       {Split::kValidation, o.value("validation", std::size_t{50})},
                                       {Split::kTest, o.value("test", std::size_t{50})}};
    const VocabProfile profile = profile_from_json(o.value("profile", json::object()));
    save_corpus(synthesize_corpus(o.value("seed", std::uint64_t{0}), pairs, profile), need(out_path, "output path"));
  });
}

sd_status sd_corpus_summary(const char* corpus_path, char** out_json) {
  return guarded([&] {
    const Corpus c = load_corpus(need(corpus_path, "corpus path"));
    nlohmann::ordered_json j;
    j["corpus_id"] = c.id();
    j["documents"] = c.size();
    for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
      j["splits"][to_string(s)] = {{"human", c.count(s, Label::kHuman)}, {"llm", c.count(s, Label::kLlm)}};
    }
    put(out_json, j.dump());
  });
}

sd_status sd_build_store(const char* corpus_path, const char* out_dir, const char* options_json,
                         char** out_fingerprint) {
  return guarded([&] {
    const json o = parse_options(options_json);
    const Corpus corpus = load_corpus(need(corpus_path, "corpus path"));
    const auto embedder = make_embedder(embedder_config(o));
    const SpanStore store = build_store(corpus, *embedder, build_options(o));
    store.save(need(out_dir, "output directory"));
    put(out_fingerprint, store.fingerprint());
  });
}

sd_status sd_store_info(const char* store_dir, char** out_json) {
  return guarded([&] {
    const SpanStore store = SpanStore::load(need(store_dir, "store directory"));
    nlohmann::ordered_json j;
    j["fingerprint"] = store.fingerprint();
    j["embedder"] = store.metadata().embedder_fingerprint;
    j["dim"] = store.dim();
    j["n_max"] = store.n_max();
    j["documents"] = store.document_count();
    j["records"] = store.total_records();
    j["occurrences"] = store.total_occurrences();
    put(out_json, j.dump());
  });
}

sd_status sd_calibrate(const char* store_dir, const char* corpus_path, const char* out_path,
                       const char* options_json, char** out_json) {
  return guarded([&] {
    const json o = parse_options(options_json);
    const SpanStore store = open_store(store_dir, o);
    const auto embedder = embedder_for_store(store, endpoint_option(o));
    const Corpus corpus = load_corpus(need(corpus_path, "corpus path"));
    const Calibration cal = calibrate(store, *embedder, corpus, pipeline_options(o));
    if (out_path != nullptr && *out_path != '\0') save_calibration(cal, out_path);
    put(out_json, cal.to_json().dump());
  });
}

sd_status sd_evaluate(const char* store_dir, const char* calibration_path, const char* corpus_path,
                      const char* options_json, char** out_report) {
  return guarded([&] {
    const json o = parse_options(options_json);
    const SpanStore store = open_store(store_dir, o);
    const auto embedder = embedder_for_store(store, endpoint_option(o));
    const Calibration cal = load_calibration(need(calibration_path, "calibration path"));
    const Corpus corpus = load_corpus(need(corpus_path, "corpus path"));
    put(out_report, evaluate(store, *embedder, cal, corpus, pipeline_options(o)).dump(2));
  });
}

sd_status sd_sweep_alpha(const char* store_dir, const char* calibration_path, const char* corpus_path,
                         const char* options_json, char** out_report) {
  return guarded([&] {
    const json o = parse_options(options_json);
    const SpanStore store = open_store(store_dir, o);
    const auto embedder = embedder_for_store(store, endpoint_option(o));
    const Calibration cal = load_calibration(need(calibration_path, "calibration path"));
    const Corpus corpus = load_corpus(need(corpus_path, "corpus path"));
    put(out_report, sweep_alpha(store, *embedder, cal, corpus, pipeline_options(o)).dump(2));
  });
}

sd_status sd_sweep_size(const char* corpus_path, const char* options_json, char** out_report) {
  return guarded([&] {
    const json o = parse_options(options_json);
    const Corpus corpus = load_corpus(need(corpus_path, "corpus path"));
    const json b = o.value("build", json::object());
    const auto embedder = make_embedder(embedder_config(b));
    const auto sizes = o.at("sizes").get<std::vector<std::size_t>>();
    PipelineOptions p = pipeline_options(o.value("pipeline", json::object()));
    p.run_config = o;
    put(out_report,
        sweep_datastore_size(corpus, *embedder, sizes, o.value("seed", std::uint64_t{0}), build_options(b), p)
            .dump(2));
  });
}

sd_status sd_engine_open(const char* store_dir, const char* calibration_path, const char* options_json,
                         sd_engine** out) {
  return guarded([&] {
    if (out == nullptr) fail(ErrorCode::kInvalidArgument, "output handle is required");
    *out = nullptr;
    const json o = parse_options(options_json);
    EngineOptions eo;
    eo.endpoint = endpoint_option(o);
    if (auto a = o.find("approximate"); a != o.end()) eo.approximate = ApproximateParams::from_json(*a);
    auto handle = std::make_unique<sd_engine>();
    handle->engine = Engine::open(need(store_dir, "store directory"), need(calibration_path, "calibration path"), eo);
    *out = handle.release();
  });
}

void sd_engine_close(sd_engine* engine) { delete engine; }

sd_status sd_engine_detect(const sd_engine* engine, const char* text, const char* overrides_json,
                           char** out_json) {
  return guarded([&] {
    if (engine == nullptr) fail(ErrorCode::kInvalidArgument, "engine is null");
    if (text == nullptr) fail(ErrorCode::kInvalidArgument, "text is null");
    const json o = parse_options(overrides_json);
    DetectOverrides ov;
    if (o.contains("alpha")) ov.alpha = o.at("alpha").get<double>();
    if (o.contains("epsilon")) ov.epsilon = o.at("epsilon").get<double>();
    if (o.contains("k")) ov.k = o.at("k").get<std::size_t>();
    put(out_json, to_evidence_json(engine->engine->detect(text, ov)).dump());
  });
}

sd_status sd_engine_info(const sd_engine* engine, char** out_json) {
  return guarded([&] {
    if (engine == nullptr) fail(ErrorCode::kInvalidArgument, "engine is null");
    put(out_json, handle_health(*engine->engine, 0.0).body);
  });
}

sd_status sd_serve(const sd_engine* engine, const char* options_json, void (*on_ready)(int, void*), void* user) {
  return guarded([&] {
    if (engine == nullptr) fail(ErrorCode::kInvalidArgument, "engine is null");
    const json o = parse_options(options_json);
    ServiceOptions so;
    so.host = o.value("host", so.host);
    so.port = o.value("port", so.port);
    so.max_text_chars = o.value("max_text_chars", so.max_text_chars);
    so.max_k = o.value("max_k", so.max_k);
    so.cors = o.value("cors", so.cors);
    if (auto d = o.find("static_dir"); d != o.end() && d->is_string()) so.static_dir = d->get<std::string>();
    Service service(*engine->engine, so);
    const int port = service.bind();
    if (on_ready != nullptr) on_ready(port, user);
    service.run();
  });
}

}  // extern "C"
