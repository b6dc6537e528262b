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

#include "clime/oracle.hpp"

#include <fstream>

#include <json.hpp>

namespace clime {

using json = nlohmann::json;

OracleLexicon read_lexicon_file(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  OracleLexicon lex;
  try {
    const json j = json::parse(in);
    for (const auto& e : j.at("entries")) {
      const auto id = vocab.find(e.at("word").get<std::string>(), e.at("lang").get<std::string>());
      if (id) lex.group[*id] = e.at("group").get<int>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, path + ": " + e.what());
  }
  return lex;
}

std::vector<std::pair<WordId, Mark>> oracle_feedback(const NeighborCard& card,
                                                     const OracleLexicon& lexicon) {
  std::vector<std::pair<WordId, Mark>> marks;
  const auto kg = lexicon.group.find(card.keyword);
  if (kg == lexicon.group.end()) return marks;
  for (const auto& column : card.columns)
    for (const auto& entry : column) {
      const auto wg = lexicon.group.find(entry.word);
      if (wg == lexicon.group.end()) continue;
      marks.emplace_back(entry.word, wg->second == kg->second ? Mark::kAccept : Mark::kReject);
    }
  return marks;
}

std::map<std::string, int> read_truth_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  try {
    return json::parse(in).get<std::map<std::string, int>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, path + ": " + e.what());
  }
}

std::vector<Document> label_from_truth(std::span<const Document> docs,
                                       std::span<const std::string> ids,
                                       const std::map<std::string, int>& truth) {
  std::map<std::string, const Document*> by_id;
  for (const auto& d : docs) by_id[d.id] = &d;
  std::vector<Document> out;
  for (const auto& id : ids) {
    const auto doc = by_id.find(id);
    if (doc == by_id.end()) fail(ErrorCode::kNotFound, "unknown document " + id);
    const auto label = truth.find(id);
    if (label == truth.end()) fail(ErrorCode::kNotFound, "no held label for document " + id);
    Document copy = *doc->second;
    copy.label = label->second;
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace clime
