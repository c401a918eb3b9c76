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


/* C interface to the span detector. Every call returns an sd_status; on
 * failure sd_last_error() describes the problem for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * sd_string_free(). Options are JSON objects; NULL or "" means defaults. */

#ifndef SPANDETECT_SPANDETECT_H_
#define SPANDETECT_SPANDETECT_H_

#ifdef __cplusplus
extern "C" {
#endif

#if defined(SPANDETECT_BUILDING_LIBRARY)
#define SD_API __attribute__((visibility("default")))
#else
#define SD_API
#endif

typedef enum sd_status {
  SD_OK = 0,
  SD_ERR_INVALID_ARGUMENT = 1,
  SD_ERR_PARSE = 2,
  SD_ERR_IO = 3,
  SD_ERR_MISMATCH = 4,
  SD_ERR_BACKEND_UNAVAILABLE = 5,
  SD_ERR_BACKEND_PROTOCOL = 6,
  SD_ERR_INTERNAL = 7
} sd_status;

typedef struct sd_engine sd_engine;

SD_API const char* sd_version(void);
SD_API const char* sd_status_name(sd_status status);
/* Message of the last failed call on this thread; "" if none. */
SD_API const char* sd_last_error(void);
SD_API void sd_string_free(char* s);

/* {"seed", "train", "validation", "test", "profile": {...}} -> JSONL file. */
SD_API sd_status sd_synthesize_corpus(const char* options_json, const char* out_path);
/* Split/label counts and the corpus id. */
SD_API sd_status sd_corpus_summary(const char* corpus_path, char** out_json);

/* {"n_max", "k", "embedder": {...}, "approximate": {...}, "tokenizer", "threads"} */
SD_API sd_status sd_build_store(const char* corpus_path, const char* out_dir, const char* options_json,
                                char** out_fingerprint);
SD_API sd_status sd_store_info(const char* store_dir, char** out_json);

/* Pipeline options: {"k", "n_max", "target_fpr", "threads", "endpoint",
 * "literal_init", "per_domain"}. */
SD_API sd_status sd_calibrate(const char* store_dir, const char* corpus_path, const char* out_path,
                              const char* options_json, char** out_json);
SD_API sd_status sd_evaluate(const char* store_dir, const char* calibration_path, const char* corpus_path,
                             const char* options_json, char** out_report);
SD_API sd_status sd_sweep_alpha(const char* store_dir, const char* calibration_path, const char* corpus_path,
                                const char* options_json, char** out_report);
/* {"sizes": [...], "seed", "build": {...}, "pipeline": {...}} */
SD_API sd_status sd_sweep_size(const char* corpus_path, const char* options_json, char** out_report);

/* {"endpoint", "approximate": {...}} */
SD_API sd_status sd_engine_open(const char* store_dir, const char* calibration_path, const char* options_json,
                                sd_engine** out);
SD_API void sd_engine_close(sd_engine* engine);
/* Evidence JSON for one text. Overrides: {"alpha", "k", "epsilon"}. */
SD_API sd_status sd_engine_detect(const sd_engine* engine, const char* text, const char* overrides_json,
                                  char** out_json);
SD_API sd_status sd_engine_info(const sd_engine* engine, char** out_json);

/* Blocks while serving. on_ready(port, user) runs once the socket is bound.
 * {"host", "port", "max_text_chars", "max_k", "cors", "static_dir"} */
SD_API sd_status sd_serve(const sd_engine* engine, const char* options_json, void (*on_ready)(int, void*),
                          void* user);

#ifdef __cplusplus
}
#endif

#endif /* SPANDETECT_SPANDETECT_H_ */
