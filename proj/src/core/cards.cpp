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

#include "clime/cards.hpp"

#include <algorithm>

namespace clime {

std::string_view to_string(Mark m) {
  switch (m) {
    case Mark::kAccept: return "accept";
    case Mark::kReject: return "reject";
    case Mark::kClear: return "clear";
  }
  return "clear";
}

Mark parse_mark(std::string_view s) {
  if (s == "accept") return Mark::kAccept;
  if (s == "reject") return Mark::kReject;
  if (s == "clear") return Mark::kClear;
  fail(ErrorCode::kInvalidArgument, "mark must be accept, reject or clear");
}

bool NeighborCard::contains(WordId w) const {
  for (const auto& col : columns)
    for (const auto& e : col)
      if (e.word == w) return true;
  return false;
}

std::optional<std::size_t> NeighborCard::column_of(std::string_view lang) const {
  for (std::size_t i = 0; i < langs.size(); ++i)
    if (langs[i] == lang) return i;
  return std::nullopt;
}

void NeighborCard::insert_added(const CardEntry& entry, std::string_view lang) {
  const auto col = column_of(lang);
  if (!col) fail(ErrorCode::kInvalidArgument, "card has no column for " + std::string(lang));
  auto& column = columns[*col];
  auto pos = std::find_if(column.begin(), column.end(), [&](const CardEntry& e) {
    return e.cosine < entry.cosine || (e.cosine == entry.cosine && e.word > entry.word);
  });
  column.insert(pos, entry);
}

NeighborCard build_card(const Matrix& m, const Vocabulary& vocab, WordId keyword,
                        double salience, const std::vector<std::string>& langs, std::size_t k) {
  NeighborCard card;
  card.keyword = keyword;
  card.salience = salience;
  card.langs = langs;
  for (const auto& lang : langs) {
    std::vector<CardEntry> column;
    for (const auto& nb : nearest_neighbors(m, vocab, {keyword, lang, k, {}}))
      column.push_back({nb.id, nb.cosine, false});
    card.columns.push_back(std::move(column));
  }
  return card;
}

}  // namespace clime
