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

// Desk-scale synthetic corpus. Both classes draw from one shared vocabulary;
// LLM documents lean on a small pool of recurring phrases while human
// documents use a larger, more varied pool, so the classes separate by how
// many spans they share with the datastore rather than by vocabulary.

#include <array>
#include <cstdio>
#include <random>

#include "spandetect/corpus.hpp"
#include "spandetect/error.hpp"

namespace spandetect {
namespace {

constexpr std::array<const char*, 160> kVocabulary = {
    "the", "a", "of", "and", "to", "in", "is", "was", "for", "with",
    "on", "as", "by", "at", "from", "that", "this", "it", "its", "an",
    "novel", "story", "book", "film", "series", "author", "city", "river", "village", "school",
    "family", "young", "old", "woman", "man", "girl", "boy", "king", "queen", "war",
    "world", "life", "time", "year", "home", "house", "road", "night", "day", "light",
    "published", "written", "known", "set", "told", "found", "made", "given", "taken", "seen",
    "tells", "follows", "explores", "describes", "reveals", "becomes", "remains", "returns", "leaves", "meets",
    "first", "second", "third", "last", "new", "small", "large", "dark", "bright", "quiet",
    "journey", "memory", "secret", "promise", "letter", "garden", "harbor", "mountain", "island", "forest",
    "people", "friends", "brother", "sister", "mother", "father", "teacher", "doctor", "soldier", "stranger",
    "later", "often", "never", "always", "still", "once", "again", "together", "alone", "away",
    "between", "during", "after", "before", "under", "over", "around", "through", "against", "within",
    "history", "music", "science", "church", "market", "station", "museum", "library", "bridge", "castle",
    "north", "south", "east", "west", "coast", "valley", "desert", "winter", "summer", "autumn",
    "considered", "regarded", "adapted", "praised", "translated", "awarded", "inspired", "based", "named", "described",
    "trilogy", "chapter", "sequel", "edition", "reader", "critic", "theme", "voice", "style", "tradition",
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

using Phrase = std::vector<const char*>;

std::vector<Phrase> make_phrases(Rng& rng, std::size_t count, std::size_t min_len,
                                 std::size_t max_len) {
  std::vector<Phrase> out(count);
  for (auto& phrase : out) {
    const std::size_t len = rng.between(min_len, max_len);
    for (std::size_t i = 0; i < len; ++i) phrase.push_back(kVocabulary[rng.index(kVocabulary.size())]);
  }
  return out;
}

struct Pools {
  std::vector<Phrase> machine;
  std::vector<Phrase> human;
};

std::string make_text(Rng& rng, bool llm, const Pools& pools, const VocabProfile& profile) {
  const std::size_t target = rng.between(profile.min_tokens, profile.max_tokens);
  const double phrase_rate = llm ? profile.llm_phrase_rate : profile.human_phrase_rate;
  const auto& own = llm ? pools.machine : pools.human;
  const auto& other = llm ? pools.human : pools.machine;

  std::vector<std::string> words;
  std::size_t since_stop = 0;
  while (words.size() < target) {
    if (rng.chance(phrase_rate)) {
      const auto& pool = rng.chance(profile.cross_rate) ? other : own;
      for (const char* w : pool[rng.index(pool.size())]) words.emplace_back(w);
    } else {
      const std::size_t n = rng.between(1, 3);
      for (std::size_t i = 0; i < n; ++i) words.emplace_back(kVocabulary[rng.index(kVocabulary.size())]);
    }
    since_stop += 1;
    if (since_stop >= 3 && rng.chance(0.35)) {
      words.emplace_back(rng.chance(0.7) ? "." : ",");
      since_stop = 0;
    }
  }
  if (words.back() != "." && words.back() != ",") words.emplace_back(".");
  else words.back() = ".";

  std::string text;
  for (const auto& w : words) {
    if (!text.empty() && w != "." && w != ",") text.push_back(' ');
    text += w;
  }
  return text;
}

}  // namespace

Corpus synthesize_corpus(std::uint64_t seed, const std::map<Split, std::size_t>& pairs_per_split,
                         const VocabProfile& profile) {
  if (pairs_per_split.empty()) fail(ErrorCode::kInvalidArgument, "no splits requested");
  for (const auto& [split, count] : pairs_per_split) {
    if (count < 1) {
      fail(ErrorCode::kInvalidArgument,
           "pair count for split " + std::string(to_string(split)) + " must be >= 1");
    }
  }
  if (profile.machine_phrases == 0 || profile.human_phrases == 0 || profile.min_phrase_len == 0 ||
      profile.min_phrase_len > profile.max_phrase_len || profile.min_tokens == 0 ||
      profile.min_tokens > profile.max_tokens) {
    fail(ErrorCode::kInvalidArgument, "invalid vocabulary profile");
  }

  Rng rng(seed);
  Pools pools;
  pools.machine = make_phrases(rng, profile.machine_phrases, profile.min_phrase_len, profile.max_phrase_len);
  pools.human = make_phrases(rng, profile.human_phrases, profile.min_phrase_len, profile.max_phrase_len);

  std::vector<Document> docs;
  for (const auto& [split, count] : pairs_per_split) {
    for (std::size_t i = 0; i < count; ++i) {
      char id[64];
      for (const bool llm : {false, true}) {
        std::snprintf(id, sizeof id, "%s-%05zu-%c", std::string(to_string(split)).c_str(), i,
                      llm ? 'l' : 'h');
        Document doc;
        doc.doc_id = id;
        doc.text = make_text(rng, llm, pools, profile);
        doc.label = llm ? Label::kLlm : Label::kHuman;
        doc.domain = profile.domain;
        doc.generator = llm ? profile.generator : "";
        doc.split = split;
        docs.push_back(std::move(doc));
      }
    }
  }
  return Corpus(std::move(docs));
}

}  // namespace spandetect
