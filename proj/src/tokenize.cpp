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

#include "spandetect/tokenize.hpp"

#include <algorithm>

#include "spandetect/error.hpp"

namespace spandetect {
namespace {

enum class CharClass { kSpace, kWord, kPunct };

struct CodePoint {
  char32_t value;
  std::size_t size;  // bytes consumed
};

// Invalid sequences decode as a single byte so offsets always advance.
CodePoint decode(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t n = 0;
  char32_t cp = 0;
  if ((b0 & 0xe0) == 0xc0) {
    n = 2;
    cp = b0 & 0x1f;
  } else if ((b0 & 0xf0) == 0xe0) {
    n = 3;
    cp = b0 & 0x0f;
  } else if ((b0 & 0xf8) == 0xf0) {
    n = 4;
    cp = b0 & 0x07;
  } else {
    return {b0, 1};
  }
  if (i + n > s.size()) return {b0, 1};
  for (std::size_t k = 1; k < n; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xc0) != 0x80) return {b0, 1};
    cp = (cp << 6) | (b & 0x3f);
  }
  return {cp, n};
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if (cp <= 0x20 || cp == 0x7f) return CharClass::kSpace;
    if ((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) {
      return CharClass::kWord;
    }
    return CharClass::kPunct;
  }
  if (cp == 0x85 || cp == 0xa0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200a) ||
      cp == 0x2028 || cp == 0x2029 || cp == 0x202f || cp == 0x205f || cp == 0x3000 ||
      cp == 0xfeff) {
    return CharClass::kSpace;
  }
  if ((cp >= 0xa1 && cp <= 0xbf && cp != 0xaa && cp != 0xb2 && cp != 0xb3 && cp != 0xb5 &&
       cp != 0xb9 && cp != 0xba && cp != 0xbc && cp != 0xbd && cp != 0xbe) ||
      cp == 0xd7 || cp == 0xf7 || (cp >= 0x2010 && cp <= 0x2027) ||
      (cp >= 0x2030 && cp <= 0x205e) || (cp >= 0x3001 && cp <= 0x3003) ||
      (cp >= 0x3008 && cp <= 0x3011) || (cp >= 0xff01 && cp <= 0xff0f) ||
      (cp >= 0xff1a && cp <= 0xff20)) {
    return CharClass::kPunct;
  }
  return CharClass::kWord;
}

void push(TokenizedDoc& doc, std::size_t begin, std::size_t end) {
  doc.tokens.emplace_back(doc.text.substr(begin, end - begin));
  doc.offsets.push_back({begin, end});
}

void tokenize_unicode_words(TokenizedDoc& doc) {
  const std::string_view s = doc.text;
  std::size_t i = 0;
  std::size_t word_begin = 0;
  bool in_word = false;
  while (i < s.size()) {
    const CodePoint cp = decode(s, i);
    const CharClass cls = classify(cp.value);
    if (cls == CharClass::kWord) {
      if (!in_word) {
        word_begin = i;
        in_word = true;
      }
    } else {
      if (in_word) {
        push(doc, word_begin, i);
        in_word = false;
      }
      if (cls == CharClass::kPunct) push(doc, i, i + cp.size);
    }
    i += cp.size;
  }
  if (in_word) push(doc, word_begin, s.size());
}

void tokenize_whitespace(TokenizedDoc& doc) {
  const std::string_view s = doc.text;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && classify(decode(s, i).value) == CharClass::kSpace) i += decode(s, i).size;
    if (i >= s.size()) break;
    const std::size_t begin = i;
    while (i < s.size() && classify(decode(s, i).value) != CharClass::kSpace) i += decode(s, i).size;
    push(doc, begin, i);
  }
}

}  // namespace

std::string_view TokenizedDoc::surface(SpanRef span) const {
  if (span.len == 0 || span.end() > tokens.size()) {
    fail(ErrorCode::kInvalidArgument, "span out of bounds for document \"" + doc_id + "\"");
  }
  const std::size_t begin = offsets[span.start].begin;
  const std::size_t end = offsets[span.end() - 1].end;
  return std::string_view(text).substr(begin, end - begin);
}

TokenizedDoc tokenize(std::string_view doc_id, std::string_view text, const TokenizerConfig& config) {
  TokenizedDoc doc;
  doc.doc_id = std::string(doc_id);
  doc.text = std::string(text);
  if (config.kind == "unicode-words") {
    tokenize_unicode_words(doc);
  } else if (config.kind == "whitespace") {
    tokenize_whitespace(doc);
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown tokenizer \"" + config.kind + "\"");
  }
  if (doc.tokens.empty()) {
    fail(ErrorCode::kInvalidArgument, "text of \"" + doc.doc_id + "\" has no tokens");
  }
  return doc;
}

TokenizedDoc tokenize(const Document& doc, const TokenizerConfig& config) {
  return tokenize(doc.doc_id, doc.text, config);
}

std::size_t span_count(std::size_t token_count, std::size_t n_min, std::size_t n_max) {
  std::size_t total = 0;
  for (std::size_t n = std::max<std::size_t>(n_min, 1); n <= n_max && n <= token_count; ++n) {
    total += token_count - n + 1;
  }
  return total;
}

std::vector<SpanRef> enumerate_spans(std::size_t token_count, std::size_t n_min, std::size_t n_max) {
  if (n_min < 1 || n_min > n_max) {
    fail(ErrorCode::kInvalidArgument, "span lengths require 1 <= n_min <= n_max");
  }
  std::vector<SpanRef> spans;
  spans.reserve(span_count(token_count, n_min, n_max));
  for (std::size_t start = 0; start < token_count; ++start) {
    const std::size_t longest = std::min(n_max, token_count - start);
    for (std::size_t n = n_min; n <= longest; ++n) {
      spans.push_back({static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(n)});
    }
  }
  return spans;
}

std::vector<SpanRef> enumerate_spans(const TokenizedDoc& doc, std::size_t n_min, std::size_t n_max) {
  return enumerate_spans(doc.size(), n_min, n_max);
}

}  // namespace spandetect
