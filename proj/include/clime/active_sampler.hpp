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
#include <span>
#include <string>
#include <vector>

#include "clime/text_classifier.hpp"

namespace clime {

struct SelectionBudget {
  std::size_t docs = 50;
  std::size_t keywords = 0;

  static SelectionBudget active() { return {50, 0}; }
  static SelectionBudget clime() { return {0, 50}; }
  static SelectionBudget combined() { return {25, 25}; }
};

// Natural-log entropy of a probability pair; 0 ln 0 = 0.
double entropy(const Probabilities& p);

// Ids of the n pool documents with highest predictive entropy, ties by
// ascending id. Documents with no in-vocabulary tokens cannot be scored and
// are skipped.
std::vector<std::string> uncertainty_sample(const ClassifierParams& params,
                                            std::span<const Document> pool, std::size_t n,
                                            const Matrix& embeddings);

std::vector<Document> augment_training_set(std::span<const Document> train,
                                           std::span<const Document> selected);

}  // namespace clime
