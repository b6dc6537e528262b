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

#include "clime/active_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace clime {

double entropy(const Probabilities& p) {
  if (p[0] < 0.0 || p[1] < 0.0 || std::abs(p[0] + p[1] - 1.0) > 1e-9)
    fail(ErrorCode::kInvalidArgument, "entropy: probabilities are not normalized");
  double h = 0.0;
  for (double q : p)
    if (q > 0.0) h -= q * std::log(q);
  return h;
}

std::vector<std::string> uncertainty_sample(const ClassifierParams& params,
                                            std::span<const Document> pool, std::size_t n,
                                            const Matrix& embeddings) {
  if (pool.empty()) fail(ErrorCode::kInvalidArgument, "uncertainty sampling: empty pool");
  struct Scored {
    double h;
    const std::string* id;
  };
  std::vector<Scored> scored;
  scored.reserve(pool.size());
  for (const auto& doc : pool) {
    if (doc.tokens.empty()) continue;
    scored.push_back({entropy(predict_proba(params, doc.tokens, embeddings)), &doc.id});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.h != b.h) return a.h > b.h;
    return *a.id < *b.id;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < std::min(n, scored.size()); ++i) ids.push_back(*scored[i].id);
  return ids;
}

std::vector<Document> augment_training_set(std::span<const Document> train,
                                           std::span<const Document> selected) {
  std::set<std::string> ids;
  for (const auto& d : train) ids.insert(d.id);
  std::vector<Document> out(train.begin(), train.end());
  for (const auto& d : selected) {
    if (!d.label) fail(ErrorCode::kInvalidArgument, "augment: selected document lacks a label");
    if (!ids.insert(d.id).second)
      fail(ErrorCode::kConflict, "augment: duplicate document id " + d.id);
    out.push_back(d);
  }
  return out;
}

}  // namespace clime
