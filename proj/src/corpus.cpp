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

#include "spandetect/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "spandetect/error.hpp"
#include "spandetect/util.hpp"

namespace spandetect {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kMismatch: return "artifact mismatch";
    case ErrorCode::kBackendUnavailable: return "embedding backend unavailable";
    case ErrorCode::kBackendProtocol: return "embedding backend protocol error";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string Fnv1a::hex() const { return to_hex(state_); }

std::string_view to_string(Label label) noexcept {
  return label == Label::kLlm ? "llm" : "human";
}

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

Label parse_label(std::string_view text) {
  if (text == "human") return Label::kHuman;
  if (text == "llm") return Label::kLlm;
  fail(ErrorCode::kParse, "unknown label \"" + std::string(text) + "\" (expected \"human\" or \"llm\")");
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "validation") return Split::kValidation;
  if (text == "test") return Split::kTest;
  fail(ErrorCode::kParse, "unknown split \"" + std::string(text) + "\"");
}

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  });
}

void validate(const Document& doc, const std::string& where) {
  if (doc.doc_id.empty()) fail(ErrorCode::kInvalidArgument, where + "empty doc_id");
  if (is_blank(doc.text)) {
    fail(ErrorCode::kInvalidArgument, where + "document \"" + doc.doc_id + "\" has blank text");
  }
  if (doc.label == Label::kHuman && !doc.generator.empty()) {
    fail(ErrorCode::kInvalidArgument,
         where + "human document \"" + doc.doc_id + "\" must not name a generator");
  }
}

nlohmann::ordered_json to_json(const Document& doc) {
  nlohmann::ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["text"] = doc.text;
  j["label"] = to_string(doc.label);
  j["domain"] = doc.domain;
  j["generator"] = doc.generator;
  j["split"] = to_string(doc.split);
  return j;
}

std::string required_string(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    fail(ErrorCode::kParse, where + "missing string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

std::string optional_string(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) fail(ErrorCode::kParse, where + "field \"" + key + "\" must be a string");
  return it->get<std::string>();
}

}  // namespace

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  std::unordered_set<std::string> seen;
  seen.reserve(documents_.size());
  for (const auto& doc : documents_) {
    validate(doc, "");
    if (!seen.insert(doc.doc_id).second) {
      fail(ErrorCode::kInvalidArgument, "duplicate doc_id \"" + doc.doc_id + "\"");
    }
  }
}

std::size_t Corpus::count(Split split, Label label) const {
  return static_cast<std::size_t>(std::count_if(
      documents_.begin(), documents_.end(),
      [&](const Document& d) { return d.split == split && d.label == label; }));
}

std::size_t Corpus::count(Split split) const {
  return count(split, Label::kHuman) + count(split, Label::kLlm);
}

Corpus Corpus::subset(Split split) const {
  Corpus out;
  for (const auto& doc : documents_) {
    if (doc.split == split) out.documents_.push_back(doc);
  }
  return out;
}

std::string Corpus::id() const {
  std::ostringstream os;
  write_corpus(*this, os);
  return to_hex(fnv1a(os.str()));
}

Corpus parse_corpus(std::istream& in, std::string_view source) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::kParse, where + "malformed record: " + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::kParse, where + "record must be a JSON object");

    Document doc;
    doc.doc_id = required_string(j, "doc_id", where);
    doc.text = required_string(j, "text", where);
    try {
      doc.label = parse_label(required_string(j, "label", where));
      doc.split = parse_split(required_string(j, "split", where));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParse) throw;
      const std::string msg = e.what();
      // Avoid doubling the location prefix for messages from required_string.
      fail(ErrorCode::kParse, msg.rfind(where, 0) == 0 ? msg : where + msg);
    }
    doc.domain = optional_string(j, "domain", where);
    doc.generator = optional_string(j, "generator", where);
    validate(doc, where);
    if (!seen.insert(doc.doc_id).second) {
      fail(ErrorCode::kInvalidArgument, where + "duplicate doc_id \"" + doc.doc_id + "\"");
    }
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open corpus file " + path.string());
  return parse_corpus(in, path.string());
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.documents()) out << to_json(doc).dump() << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write corpus file " + path.string());
  write_corpus(corpus, out);
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace spandetect
