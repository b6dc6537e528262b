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
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clime/adam.hpp"
#include "clime/embed_store.hpp"

namespace clime {

// Accept/reject feedback for one keyword: positives are pulled towards the
// keyword, negatives pushed away.
struct KeywordFeedback {
  WordId keyword = 0;
  std::set<WordId> positive;
  std::set<WordId> negative;

  friend bool operator==(const KeywordFeedback&, const KeywordFeedback&) = default;
};

// Keywords in ranking order. Keywords with no marks may be present; they only
// matter for top-s truncation.
struct FeedbackSet {
  std::vector<KeywordFeedback> keywords;

  // Total number of marks.
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  // Throws unless P and N are disjoint, no keyword marks itself, every id is
  // below `vocab_size` and no keyword repeats.
  void validate(std::size_t vocab_size) const;

  // First `s` keywords. Throws if fewer than `s` keywords are present.
  FeedbackSet top(std::size_t s) const;

  // K plus every marked word, ascending.
  std::vector<WordId> touched_rows() const;

  friend bool operator==(const FeedbackSet&, const FeedbackSet&) = default;
};

// {"keywords": [{"keyword": {"word", "lang"}, "positive": [{"word", "lang"}...],
//   "negative": [...]}]}
nlohmann::json feedback_to_json(const FeedbackSet& fb, const Vocabulary& vocab);
FeedbackSet feedback_from_json(const nlohmann::json& j, const Vocabulary& vocab);
FeedbackSet read_feedback_file(const std::string& path, const Vocabulary& vocab);

struct RefineConfig {
  double lambda = 1.0;
  int steps = 100;
  AdamConfig adam;
};

// sum_k ( sum_{n in N_k} E_k.E_n - sum_{p in P_k} E_k.E_p )
double feedback_cost(const Matrix& e, const FeedbackSet& fb);

// sum_w |anchor_w - E_w|^2
double regularizer(const Matrix& e, const Matrix& anchor);

double total_cost(const Matrix& e, const Matrix& anchor, const FeedbackSet& fb, double lambda);

// Full |V| x d gradient of total_cost.
Matrix cost_gradient(const Matrix& e, const Matrix& anchor, const FeedbackSet& fb,
                     double lambda);

struct RefineResult {
  Matrix embeddings;
  std::vector<double> trace;  // total cost before the first step, then after each step
};

// Full-batch Adam on the rows touched by `fb`, starting from `start` and
// regularized towards `anchor`. Every other row is copied bit for bit.
RefineResult refine(const Matrix& start, const Matrix& anchor, const FeedbackSet& fb,
                    const RefineConfig& config);

// Refines space.current() against space.original() and installs the result.
// On failure the space is left unchanged.
RefineResult refine(EmbeddingSpace& space, const FeedbackSet& fb, const RefineConfig& config);

}  // namespace clime
