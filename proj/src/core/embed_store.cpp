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

#include "clime/embed_store.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace clime {

std::uint64_t fingerprint(const Matrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t shape[2] = {m.rows(), m.cols()};
  mix(shape, sizeof(shape));
  mix(m.data().data(), m.data().size() * sizeof(double));
  return h;
}

WordId Vocabulary::add(std::string surface, std::string lang) {
  auto key = std::make_pair(surface, lang);
  if (index_.contains(key))
    fail(ErrorCode::kFormat, "duplicate entry '" + surface + "' (" + lang + ")");
  const auto id = static_cast<WordId>(entries_.size());
  index_.emplace(std::move(key), id);
  entries_.push_back({std::move(surface), std::move(lang)});
  return id;
}

std::optional<WordId> Vocabulary::find(std::string_view surface, std::string_view lang) const {
  auto it = index_.find(std::make_pair(std::string(surface), std::string(lang)));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::require(std::string_view surface, std::string_view lang) const {
  auto id = find(surface, lang);
  if (!id)
    fail(ErrorCode::kNotFound,
         "not in vocabulary: '" + std::string(surface) + "' (" + std::string(lang) + ")");
  return *id;
}

const Word& Vocabulary::at(WordId id) const {
  if (!contains(id)) fail(ErrorCode::kNotFound, "invalid word id " + std::to_string(id));
  return entries_[id];
}

std::vector<std::string> Vocabulary::languages() const {
  std::vector<std::string> out;
  for (const auto& w : entries_)
    if (std::find(out.begin(), out.end(), w.lang) == out.end()) out.push_back(w.lang);
  return out;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

void EmbeddingSpace::load(std::istream& in, const std::string& lang) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kFormat, "malformed header: empty input");
  const auto header = split_ws(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
      dim == 0)
    fail(ErrorCode::kFormat, "malformed header: '" + line + "'");
  if (dim_ != 0 && dim != dim_)
    fail(ErrorCode::kFormat, "dim mismatch: file has " + std::to_string(dim) + ", space has " +
                                 std::to_string(dim_));

  // Stage into copies so a failure leaves the space untouched.
  Vocabulary vocab = vocab_;
  std::vector<double> rows;
  rows.reserve(count * dim);
  std::vector<double> values(dim);
  std::size_t line_no = 1;
  std::size_t loaded = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (loaded == count)
      fail(ErrorCode::kFormat, "more rows than header count at line " + std::to_string(line_no));
    if (fields.size() != dim + 1)
      fail(ErrorCode::kFormat, "dim mismatch at line " + std::to_string(line_no));
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_number(fields[j + 1], values[j]))
        fail(ErrorCode::kFormat, "bad number at line " + std::to_string(line_no));
      if (!std::isfinite(values[j]))
        fail(ErrorCode::kFormat, "non-finite value at line " + std::to_string(line_no));
    }
    try {
      vocab.add(std::string(fields[0]), lang);
    } catch (const Error&) {
      fail(ErrorCode::kFormat, "duplicate entry '" + std::string(fields[0]) + "' at line " +
                                   std::to_string(line_no));
    }
    rows.insert(rows.end(), values.begin(), values.end());
    ++loaded;
  }
  if (loaded != count)
    fail(ErrorCode::kFormat, "header promises " + std::to_string(count) + " rows, found " +
                                 std::to_string(loaded));

  dim_ = dim;
  vocab_ = std::move(vocab);
  current_.set_cols(dim);
  original_.set_cols(dim);
  for (std::size_t r = 0; r < loaded; ++r) {
    std::span<const double> row(rows.data() + r * dim, dim);
    current_.append_row(row);
    original_.append_row(row);
  }
}

void EmbeddingSpace::install_current(Matrix next) {
  if (!next.same_shape(current_))
    fail(ErrorCode::kInvalidArgument, "install_current: shape mismatch");
  if (!all_finite(next.data()))
    fail(ErrorCode::kNumeric, "install_current: non-finite entries");
  current_ = std::move(next);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) fail(ErrorCode::kInvalidArgument, "zero vector");
  const double c = dot(u, v) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

std::vector<Neighbor> nearest_neighbors(const Matrix& m, const Vocabulary& vocab,
                                        const NeighborQuery& q) {
  if (q.query >= m.rows() || !vocab.contains(q.query))
    fail(ErrorCode::kNotFound, "invalid word id " + std::to_string(q.query));
  if (q.k == 0) fail(ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto query = m.row(q.query);
  if (norm(query) == 0.0) return {};

  std::vector<Neighbor> candidates;
  for (WordId id = 0; id < m.rows(); ++id) {
    if (id == q.query || q.exclude.contains(id)) continue;
    if (q.lang && vocab.at(id).lang != *q.lang) continue;
    const auto row = m.row(id);
    if (norm(row) == 0.0) continue;
    candidates.push_back({id, cosine(query, row)});
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.id < b.id;
  };
  const std::size_t k = std::min(q.k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), better);
  candidates.resize(k);
  return candidates;
}

std::size_t save_embeddings(const EmbeddingSpace& space, Which which, std::ostream& out,
                            const std::optional<std::string>& lang) {
  const Matrix& m = space.matrix(which);
  const auto& entries = space.vocab().entries();
  std::size_t count = 0;
  for (const auto& w : entries)
    if (!lang || w.lang == *lang) ++count;

  std::ostringstream buf;
  buf << count << ' ' << space.dim() << '\n';
  char num[64];
  for (WordId id = 0; id < entries.size(); ++id) {
    if (lang && entries[id].lang != *lang) continue;
    buf << entries[id].surface;
    for (double v : m.row(id)) {
      auto [ptr, ec] = std::to_chars(num, num + sizeof(num), v, std::chars_format::fixed, 6);
      buf << ' ' << std::string_view(num, static_cast<std::size_t>(ptr - num));
    }
    buf << '\n';
  }
  const std::string text = buf.str();
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed");
  return text.size();
}

EmbeddingSpace load_space(const std::string& src_path, const std::string& src_lang,
                          const std::string& tgt_path, const std::string& tgt_lang) {
  EmbeddingSpace space;
  for (const auto& [path, lang] : {std::pair{src_path, src_lang}, std::pair{tgt_path, tgt_lang}}) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::kIo, "cannot open " + path);
    try {
      space.load(in, lang);
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + e.what());
    }
  }
  return space;
}

namespace {
constexpr char kMatrixMagic[8] = {'C', 'L', 'M', 'M', 'A', 'T', '0', '1'};
}

void write_matrix(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  const std::uint64_t shape[2] = {m.rows(), m.cols()};
  out.write(kMatrixMagic, sizeof(kMatrixMagic));
  out.write(reinterpret_cast<const char*>(shape), sizeof(shape));
  out.write(reinterpret_cast<const char*>(m.data().data()),
            static_cast<std::streamsize>(m.data().size() * sizeof(double)));
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  char magic[8];
  std::uint64_t shape[2];
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(shape), sizeof(shape));
  if (!in || std::memcmp(magic, kMatrixMagic, sizeof(magic)) != 0)
    fail(ErrorCode::kFormat, "not a matrix snapshot: " + path);
  Matrix m(shape[0], shape[1]);
  in.read(reinterpret_cast<char*>(m.data().data()),
          static_cast<std::streamsize>(m.data().size() * sizeof(double)));
  if (!in) fail(ErrorCode::kFormat, "truncated matrix snapshot: " + path);
  return m;
}

}  // namespace clime
