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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clime/embed_store.hpp"

namespace clime {

enum class Mark { kAccept, kReject, kClear };

std::string_view to_string(Mark m);
Mark parse_mark(std::string_view s);

struct CardEntry {
  WordId word = 0;
  double cosine = 0.0;
  bool added = false;

  friend bool operator==(const CardEntry&, const CardEntry&) = default;
};

// One keyword with a nearest-neighbor column per language.
struct NeighborCard {
  WordId keyword = 0;
  double salience = 0.0;
  std::vector<std::string> langs;
  std::vector<std::vector<CardEntry>> columns;  // parallel to langs

  bool contains(WordId w) const;
  std::optional<std::size_t> column_of(std::string_view lang) const;

  // Inserts an added word into its language column, keeping cosine order.
  void insert_added(const CardEntry& entry, std::string_view lang);

  friend bool operator==(const NeighborCard&, const NeighborCard&) = default;
};

NeighborCard build_card(const Matrix& m, const Vocabulary& vocab, WordId keyword,
                        double salience, const std::vector<std::string>& langs, std::size_t k);

}  // namespace clime
