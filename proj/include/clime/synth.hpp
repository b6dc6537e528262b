/*
 * Copyright 2026 The Clime Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace clime {

// A planted bilingual classification task. Each language has two groups of
// content words (task-relevant = 1, irrelevant = 0) plus stop words. Source
// vectors cluster around one center per group; each target word sits next to
// its source translation, except a `corruption` fraction of content words
// which are moved next to a random source word of the other group.
struct SyntheticTaskSpec {
  std::string src_lang = "en";
  std::string tgt_lang = "xx";
  std::size_t words_per_group = 60;
  std::size_t stop_words = 12;
  std::size_t dim = 16;
  double corruption = 0.6;
  std::size_t train_docs = 572;
  std::size_t test_docs = 200;
  std::size_t pool_docs = 400;
  std::size_t content_tokens = 11;  // odd, so the majority label is defined
  std::size_t stop_tokens = 6;
  double purity = 0.8;          // chance a content token comes from the doc's topic
  double zipf_exponent = 0.8;   // within-group word frequency skew
  double center_scale = 0.08;   // per-coordinate magnitude of the group centers
  double word_noise = 0.08;     // per-coordinate spread of words around a center
  double translation_noise = 0.02;
  std::uint64_t seed = 7;

  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticTaskSpec from_json(const nlohmann::json& j);
};

struct SyntheticDoc {
  std::string id;
  std::string lang;
  std::string text;
  int label = 0;
};

struct SyntheticWord {
  std::string surface;
  std::string lang;
  int group = -1;  // -1 for stop words
  std::vector<double> vector;
};

struct SyntheticTask {
  SyntheticTaskSpec spec;
  std::vector<SyntheticWord> src_words;
  std::vector<SyntheticWord> tgt_words;
  std::vector<SyntheticDoc> train;  // source language
  std::vector<SyntheticDoc> test;   // target language
  std::vector<SyntheticDoc> pool;   // target language, labels held out
  std::vector<std::size_t> corrupted;  // indices into tgt_words
};

SyntheticTask generate_task(const SyntheticTaskSpec& spec);

// Writes embeddings, corpora, lexicon, held pool labels and a workspace
// manifest into `dir` (created if missing).
void write_task(const SyntheticTask& task, const std::filesystem::path& dir);

}  // namespace clime
