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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "clime/text_classifier.hpp"

namespace clime {

struct SalienceTable {
  std::map<WordId, double> scores;
  std::map<WordId, std::size_t> doc_freq;
  std::size_t corpus_size = 0;
};

struct RankedWord {
  WordId id;
  double score;
};

struct KeywordRanking {
  std::vector<RankedWord> words;
  std::size_t requested = 0;
};

inline constexpr std::size_t kDefaultKeywordCount = 50;

// L2 norm of the loss gradient at each token occurrence of `tokens`.
std::vector<double> example_salience(const ClassifierParams& params,
                                     std::span<const WordId> tokens, int label,
                                     const Matrix& embeddings);

// Sums per-occurrence scores by word type and weights by ln(|X| / df).
// `occurrence_scores[i]` aligns with `docs[i].tokens`. Reduction runs in
// ascending doc-id order.
SalienceTable aggregate_salience(std::span<const Document> docs,
                                 std::span<const std::vector<double>> occurrence_scores);

SalienceTable global_salience(const ClassifierParams& params, std::span<const Document> docs,
                              const Matrix& embeddings);

// Top-s words of `lang` with positive salience; ties by surface ascending.
KeywordRanking select_keywords(const SalienceTable& table, const Vocabulary& vocab,
                               std::size_t s, const std::string& lang);

}  // namespace clime
