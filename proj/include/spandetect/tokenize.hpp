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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spandetect/corpus.hpp"

namespace spandetect {

/// Half-open byte range into the source text.
struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const ByteRange&) const = default;
};

/// A contiguous run of `len` tokens starting at token `start`. The owning
/// document is implied by the container holding the SpanRef.
struct SpanRef {
  std::uint32_t start = 0;
  std::uint32_t len = 0;

  std::uint32_t end() const noexcept { return start + len; }
  auto operator<=>(const SpanRef&) const = default;
};

struct TokenizedDoc {
  std::string doc_id;
  std::string text;
  std::vector<std::string> tokens;
  std::vector<ByteRange> offsets;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }

  /// Original text covered by the span, from its first token's start byte
  /// to its last token's end byte.
  std::string_view surface(SpanRef span) const;
};

struct TokenizerConfig {
  // "unicode-words": runs of letters/digits (any non-ASCII code point counts
  // as a letter unless it is Unicode whitespace or punctuation), every
  // punctuation mark its own token.
  // "whitespace": maximal runs of non-space bytes.
  std::string kind = "unicode-words";
};

TokenizedDoc tokenize(std::string_view doc_id, std::string_view text,
                      const TokenizerConfig& config = {});
TokenizedDoc tokenize(const Document& doc, const TokenizerConfig& config = {});

/// Every span with n_min <= len <= min(n_max, size), ordered by start then
/// length.
std::vector<SpanRef> enumerate_spans(const TokenizedDoc& doc, std::size_t n_min, std::size_t n_max);
std::vector<SpanRef> enumerate_spans(std::size_t token_count, std::size_t n_min, std::size_t n_max);

/// Sum over n in [n_min, n_max] of max(0, m - n + 1).
std::size_t span_count(std::size_t token_count, std::size_t n_min, std::size_t n_max);

}  // namespace spandetect
