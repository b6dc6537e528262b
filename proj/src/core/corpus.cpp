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

#include "clime/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

namespace clime {

using json = nlohmann::json;

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && is_punct(text[b])) ++b;
    while (e > b && is_punct(text[e - 1])) --e;
    if (e > b) {
      std::string tok(text.substr(b, e - b));
      for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

std::vector<WordId> tokenize(std::string_view text, const Vocabulary& vocab,
                             std::string_view lang, std::size_t* oov) {
  std::vector<WordId> ids;
  std::size_t missing = 0;
  for (const auto& tok : normalize_tokens(text)) {
    if (auto id = vocab.find(tok, lang))
      ids.push_back(*id);
    else
      ++missing;
  }
  if (oov) *oov = missing;
  return ids;
}

std::vector<Document> read_corpus(std::istream& in, const Vocabulary& vocab) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      fail(ErrorCode::kFormat, "corpus line " + std::to_string(line_no) + ": invalid JSON");
    }
    try {
      Document doc;
      doc.id = obj.at("id").get<std::string>();
      doc.lang = obj.at("lang").get<std::string>();
      doc.text = obj.at("text").get<std::string>();
      const auto& label = obj.contains("label") ? obj.at("label") : json();
      if (!label.is_null()) {
        const int y = label.get<int>();
        if (y != 0 && y != 1) fail(ErrorCode::kFormat, "label must be 0, 1 or null");
        doc.label = y;
      }
      doc.tokens = tokenize(doc.text, vocab, doc.lang, &doc.oov);
      docs.push_back(std::move(doc));
    } catch (const json::exception& e) {
      fail(ErrorCode::kFormat, "corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorCode::kFormat, "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

std::vector<Document> read_corpus_file(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return read_corpus(in, vocab);
}

void write_corpus(std::ostream& out, std::span<const Document> docs) {
  for (const auto& d : docs) {
    json obj = {{"id", d.id}, {"lang", d.lang}, {"text", d.text}};
    obj["label"] = d.label ? json(*d.label) : json(nullptr);
    out << obj.dump() << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "corpus write failed");
}

void write_corpus_file(const std::string& path, std::span<const Document> docs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  write_corpus(out, docs);
}

std::vector<Document> sorted_by_id(std::span<const Document> docs) {
  std::vector<Document> out(docs.begin(), docs.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const Document& a, const Document& b) { return a.id < b.id; });
  return out;
}

}  // namespace clime
