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

#include "clime/salience.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace clime {

std::vector<double> example_salience(const ClassifierParams& params,
                                     std::span<const WordId> tokens, int label,
                                     const Matrix& embeddings) {
  const auto lg = loss_and_gradients(params, tokens, label, embeddings, false, true);
  std::vector<double> scores;
  scores.reserve(lg.embedding.size());
  for (const auto& g : lg.embedding) scores.push_back(norm(g));
  return scores;
}

SalienceTable aggregate_salience(std::span<const Document> docs,
                                 std::span<const std::vector<double>> occurrence_scores) {
  if (docs.size() != occurrence_scores.size())
    fail(ErrorCode::kInvalidArgument, "salience: one score list per document required");
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return docs[a].id < docs[b].id; });

  SalienceTable table;
  table.corpus_size = docs.size();
  std::map<WordId, double> sums;
  for (std::size_t i : order) {
    const auto& tokens = docs[i].tokens;
    const auto& scores = occurrence_scores[i];
    if (scores.size() != tokens.size())
      fail(ErrorCode::kInvalidArgument, "salience: score count does not match tokens");
    std::set<WordId> seen;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      sums[tokens[t]] += scores[t];
      seen.insert(tokens[t]);
    }
    for (WordId w : seen) ++table.doc_freq[w];
  }
  const double n = static_cast<double>(docs.size());
  for (const auto& [w, sum] : sums) {
    const double idf = std::log(n / static_cast<double>(table.doc_freq[w]));
    table.scores[w] = idf * sum;
  }
  return table;
}

SalienceTable global_salience(const ClassifierParams& params, std::span<const Document> docs,
                              const Matrix& embeddings) {
  if (docs.empty()) fail(ErrorCode::kInvalidArgument, "salience: empty corpus");
  std::vector<std::vector<double>> scores;
  scores.reserve(docs.size());
  for (const auto& d : docs) {
    if (!d.label) fail(ErrorCode::kInvalidArgument, "salience: unlabeled document " + d.id);
    scores.push_back(example_salience(params, d.tokens, *d.label, embeddings));
  }
  return aggregate_salience(docs, scores);
}

KeywordRanking select_keywords(const SalienceTable& table, const Vocabulary& vocab,
                               std::size_t s, const std::string& lang) {
  if (s < 1) fail(ErrorCode::kInvalidArgument, "keyword count must be >= 1");
  KeywordRanking ranking;
  ranking.requested = s;
  for (const auto& [w, score] : table.scores)
    if (score > 0.0 && vocab.at(w).lang == lang) ranking.words.push_back({w, score});
  std::sort(ranking.words.begin(), ranking.words.end(),
            [&](const RankedWord& a, const RankedWord& b) {
              if (a.score != b.score) return a.score > b.score;
              const auto& sa = vocab.at(a.id).surface;
              const auto& sb = vocab.at(b.id).surface;
              if (sa != sb) return sa < sb;
              return a.id < b.id;
            });
  if (ranking.words.size() > s) ranking.words.resize(s);
  return ranking;
}

}  // namespace clime
