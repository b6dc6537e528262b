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

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "clime/corpus.hpp"
#include "clime/embed_store.hpp"
#include "clime/rng.hpp"
#include "clime/synth.hpp"

namespace clime::test {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("clime-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline EmbeddingSpace space_from_text(const std::string& src, const std::string& tgt = "") {
  EmbeddingSpace space;
  std::istringstream a(src);
  space.load(a, "en");
  if (!tgt.empty()) {
    std::istringstream b(tgt);
    space.load(b, "xx");
  }
  return space;
}

// Space of `rows` words "w0", "w1", ... with entries uniform in [-1, 1].
inline EmbeddingSpace random_space(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                   const std::string& lang = "en") {
  Rng rng(seed);
  std::ostringstream text;
  text << rows << ' ' << dim << '\n';
  text.precision(17);
  for (std::size_t i = 0; i < rows; ++i) {
    text << 'w' << i;
    for (std::size_t j = 0; j < dim; ++j) text << ' ' << rng.uniform(-1.0, 1.0);
    text << '\n';
  }
  EmbeddingSpace space;
  std::istringstream in(text.str());
  space.load(in, lang);
  return space;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-scale, scale);
  return m;
}

inline Document make_doc(std::string id, std::vector<WordId> tokens, std::optional<int> label = std::nullopt,
                         std::string lang = "en") {
  Document d;
  d.id = std::move(id);
  d.lang = std::move(lang);
  d.tokens = std::move(tokens);
  d.label = label;
  return d;
}

// Central finite difference of f with respect to *x.
inline double central_difference(const std::function<double()>& f, double* x, double h = 1e-5) {
  const double saved = *x;
  *x = saved + h;
  const double up = f();
  *x = saved - h;
  const double down = f();
  *x = saved;
  return (up - down) / (2.0 * h);
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / (std::abs(numeric) + 1e-8);
}

// A reduced synthetic task that trains in well under a second.
inline SyntheticTaskSpec small_spec(std::uint64_t seed = 3) {
  SyntheticTaskSpec s;
  s.words_per_group = 24;
  s.stop_words = 6;
  s.dim = 8;
  s.train_docs = 96;
  s.test_docs = 60;
  s.pool_docs = 60;
  s.seed = seed;
  return s;
}

}  // namespace clime::test
