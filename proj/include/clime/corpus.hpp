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
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clime/embed_store.hpp"

namespace clime {

struct Document {
  std::string id;
  std::string lang;
  std::string text;
  std::vector<WordId> tokens;
  std::optional<int> label;  // 0/1, or unlabeled
  std::size_t oov = 0;
};

// Lowercases, splits on whitespace, strips leading/trailing ASCII punctuation
// and maps to ids of `lang`. Unknown tokens are dropped and counted in `oov`.
std::vector<WordId> tokenize(std::string_view text, const Vocabulary& vocab,
                             std::string_view lang, std::size_t* oov = nullptr);

// Normalized token strings (the same rule as tokenize, before lookup).
std::vector<std::string> normalize_tokens(std::string_view text);

// JSON-lines corpus: {"id": str, "lang": str, "text": str, "label": 0|1|null}.
std::vector<Document> read_corpus(std::istream& in, const Vocabulary& vocab);
std::vector<Document> read_corpus_file(const std::string& path, const Vocabulary& vocab);
void write_corpus(std::ostream& out, std::span<const Document> docs);
void write_corpus_file(const std::string& path, std::span<const Document> docs);

// Copy of `docs` sorted by id.
std::vector<Document> sorted_by_id(std::span<const Document> docs);

}  // namespace clime
