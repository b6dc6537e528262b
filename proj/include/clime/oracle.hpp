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

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clime/cards.hpp"
#include "clime/corpus.hpp"

namespace clime {

// Planted group of every content word; stands in for a bilingual annotator.
struct OracleLexicon {
  std::map<WordId, int> group;
};

OracleLexicon read_lexicon_file(const std::string& path, const Vocabulary& vocab);

// Accepts card words that share the keyword's group, rejects the rest. Words
// the lexicon does not cover (and cards whose keyword it does not cover) stay
// unmarked.
std::vector<std::pair<WordId, Mark>> oracle_feedback(const NeighborCard& card,
                                                     const OracleLexicon& lexicon);

// Held ground-truth labels for pool documents, keyed by document id.
std::map<std::string, int> read_truth_file(const std::string& path);

// Copies of `docs` whose ids are in `ids` (in `ids` order), labeled from
// `truth`.
std::vector<Document> label_from_truth(std::span<const Document> docs,
                                       std::span<const std::string> ids,
                                       const std::map<std::string, int>& truth);

}  // namespace clime
