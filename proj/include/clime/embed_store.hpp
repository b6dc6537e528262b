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
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clime/matrix.hpp"

namespace clime {

using WordId = std::uint32_t;

struct Word {
  std::string surface;
  std::string lang;
};

// Joint bilingual vocabulary. Entries are keyed by (surface, lang); the same
// surface string may exist once per language. Ids are dense and assigned in
// load order.
class Vocabulary {
 public:
  WordId add(std::string surface, std::string lang);
  std::optional<WordId> find(std::string_view surface, std::string_view lang) const;
  WordId require(std::string_view surface, std::string_view lang) const;

  const Word& at(WordId id) const;
  bool contains(WordId id) const noexcept { return id < entries_.size(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Word>& entries() const noexcept { return entries_; }

  // Languages in first-seen order.
  std::vector<std::string> languages() const;

 private:
  std::vector<Word> entries_;
  std::map<std::pair<std::string, std::string>, WordId, std::less<>> index_;
};

enum class Which { kCurrent, kOriginal };

// Vocabulary plus the working matrix E and the frozen matrix loaded from disk.
// Only `current` ever changes after load.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;

  // Appends the rows of one word2vec text file tagged with `lang`. Checks the
  // dimension against rows already loaded. On error nothing is appended.
  void load(std::istream& in, const std::string& lang);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  const Matrix& current() const noexcept { return current_; }
  const Matrix& original() const noexcept { return original_; }
  const Matrix& matrix(Which which) const noexcept {
    return which == Which::kCurrent ? current_ : original_;
  }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vocab_.size(); }

  // Replaces `current` wholesale. Shape must match and entries be finite.
  void install_current(Matrix next);

 private:
  Vocabulary vocab_;
  Matrix current_;
  Matrix original_;
  std::size_t dim_ = 0;
};

// u.v / (|u||v|). Throws on a zero-norm input.
double cosine(std::span<const double> u, std::span<const double> v);

struct Neighbor {
  WordId id;
  double cosine;
};

struct NeighborQuery {
  WordId query = 0;
  std::optional<std::string> lang;  // nullopt: all languages
  std::size_t k = 5;
  std::set<WordId> exclude;
};

// Exhaustive top-k cosine search over the rows of `m`. Zero rows are never
// candidates; a zero query yields an empty list. Sorted by cosine descending,
// ties by ascending id.
std::vector<Neighbor> nearest_neighbors(const Matrix& m, const Vocabulary& vocab,
                                        const NeighborQuery& q);

inline std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space,
                                               const NeighborQuery& q) {
  return nearest_neighbors(space.current(), space.vocab(), q);
}

// Writes word2vec text with 6 decimal digits. With `lang` set, only that
// language's rows are written. Returns bytes written.
std::size_t save_embeddings(const EmbeddingSpace& space, Which which, std::ostream& out,
                            const std::optional<std::string>& lang = std::nullopt);

// Loads a source/target pair of files into a fresh space.
EmbeddingSpace load_space(const std::string& src_path, const std::string& src_lang,
                          const std::string& tgt_path, const std::string& tgt_lang);

// Exact binary snapshot of a matrix (little-endian doubles behind a small
// header). Used for workspace state, where text precision would drift.
void write_matrix(const Matrix& m, const std::string& path);
Matrix read_matrix(const std::string& path);

}  // namespace clime
