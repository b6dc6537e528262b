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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "clime/embed_store.hpp"
#include "expect_error.hpp"
#include "support.hpp"

namespace clime {
namespace {

using test::space_from_text;
using test::throws_error;

TEST(Vocabulary, SameSurfaceInTwoLanguagesIsTwoEntries) {
  Vocabulary v;
  EXPECT_EQ(v.add("casa", "en"), 0u);
  EXPECT_EQ(v.add("casa", "xx"), 1u);
  EXPECT_EQ(*v.find("casa", "xx"), 1u);
  EXPECT_FALSE(v.find("casa", "yy"));
  EXPECT_TRUE(throws_error([&] { v.add("casa", "en"); }, ErrorCode::kFormat, "duplicate entry"));
  EXPECT_TRUE(throws_error([&] { v.require("nope", "en"); }, ErrorCode::kNotFound,
                           "not in vocabulary"));
  EXPECT_EQ(v.languages(), (std::vector<std::string>{"en", "xx"}));
}

TEST(LoadEmbeddings, HeaderAndRows) {
  auto space = space_from_text("3 4\na 1 2 3 4\nb 0 0 0 1\nc -1 0.5 0 0\n");
  EXPECT_EQ(space.size(), 3u);
  EXPECT_EQ(space.dim(), 4u);
  EXPECT_EQ(space.current()(2, 1), 0.5);
  EXPECT_EQ(space.current(), space.original());
}

TEST(LoadEmbeddings, SecondLanguageAppendsRows) {
  auto space = space_from_text("1 2\na 1 0\n", "2 2\na 0 1\nb 1 1\n");
  EXPECT_EQ(space.size(), 3u);
  EXPECT_EQ(space.vocab().at(1).lang, "xx");
  EXPECT_EQ(space.current()(1, 1), 1.0);
}

TEST(LoadEmbeddings, ShortRowReportsLine) {
  EXPECT_TRUE(throws_error([] { space_from_text("2 4\na 1 2 3 4\nb 1 2 3\n"); },
                           ErrorCode::kFormat, "dim mismatch at line 3"));
}

TEST(LoadEmbeddings, DuplicateWordInOneFile) {
  EXPECT_TRUE(throws_error([] { space_from_text("2 1\na 1\na 2\n"); }, ErrorCode::kFormat,
                           "duplicate entry"));
}

TEST(LoadEmbeddings, DimensionMismatchAcrossFiles) {
  EXPECT_TRUE(throws_error([] { space_from_text("1 2\na 1 0\n", "1 3\nb 1 0 0\n"); },
                           ErrorCode::kFormat, "dim mismatch"));
}

TEST(LoadEmbeddings, NonFiniteAndMalformed) {
  EXPECT_TRUE(throws_error([] { space_from_text("1 2\na nan 0\n"); }, ErrorCode::kFormat,
                           "non-finite value at line 2"));
  EXPECT_TRUE(throws_error([] { space_from_text("1 2\na inf 0\n"); }, ErrorCode::kFormat,
                           "non-finite"));
  EXPECT_TRUE(throws_error([] { space_from_text("x y\n"); }, ErrorCode::kFormat,
                           "malformed header"));
  EXPECT_TRUE(throws_error([] { space_from_text(""); }, ErrorCode::kFormat, "malformed header"));
  EXPECT_TRUE(throws_error([] { space_from_text("3 1\na 1\n"); }, ErrorCode::kFormat, "3 rows"));
}

TEST(LoadEmbeddings, FailedLoadLeavesSpaceUntouched) {
  auto space = space_from_text("1 2\na 1 0\n");
  std::istringstream bad("2 2\nb 1 1\nc 1\n");
  EXPECT_THROW(space.load(bad, "xx"), Error);
  EXPECT_EQ(space.size(), 1u);
  EXPECT_EQ(space.current().rows(), 1u);
}

TEST(Cosine, Examples) {
  const std::vector<double> x{1, 0}, y{0, 1}, u{1, 1}, v{2, 2}, z{0, 0};
  EXPECT_DOUBLE_EQ(cosine(x, y), 0.0);
  EXPECT_NEAR(cosine(u, v), 1.0, 1e-15);
  EXPECT_TRUE(throws_error([&] { cosine(x, z); }, ErrorCode::kInvalidArgument, "zero vector"));
}

TEST(NearestNeighbors, SmallExample) {
  auto space = space_from_text("3 2\ne1 1 0\ne2 0.9 0.1\ne3 0 1\n");
  const auto nn = nearest_neighbors(space, {0, std::nullopt, 2, {}});
  ASSERT_EQ(nn.size(), 2u);
  EXPECT_EQ(nn[0].id, 1u);
  // 0.9 / sqrt(0.82), evaluated independently.
  EXPECT_NEAR(nn[0].cosine, 0.9 / std::sqrt(0.9 * 0.9 + 0.1 * 0.1), 1e-12);
  EXPECT_NEAR(nn[0].cosine, 0.9939, 1e-4);
  EXPECT_EQ(nn[1].id, 2u);
  EXPECT_DOUBLE_EQ(nn[1].cosine, 0.0);
}

TEST(NearestNeighbors, KAboveCandidatesReturnsAllButQuery) {
  auto space = test::random_space(7, 3, 1);
  const auto nn = nearest_neighbors(space, {4, std::nullopt, 7, {}});
  EXPECT_EQ(nn.size(), 6u);
  for (const auto& n : nn) EXPECT_NE(n.id, 4u);
}

TEST(NearestNeighbors, LanguageFilterExcludeAndZeroRows) {
  auto space = space_from_text("3 2\na 1 0\nb 1 0.1\nz 0 0\n", "2 2\nc 1 0.2\nd -1 0\n");
  auto nn = nearest_neighbors(space, {0, std::string("xx"), 5, {}});
  ASSERT_EQ(nn.size(), 2u);
  EXPECT_EQ(nn[0].id, 3u);
  EXPECT_EQ(nn[1].id, 4u);
  nn = nearest_neighbors(space, {0, std::nullopt, 5, {1}});
  for (const auto& n : nn) {
    EXPECT_NE(n.id, 1u);
    EXPECT_NE(n.id, 2u) << "zero row is never a candidate";
  }
  EXPECT_TRUE(nearest_neighbors(space, {2, std::nullopt, 5, {}}).empty());
  EXPECT_TRUE(throws_error([&] { nearest_neighbors(space, {9, std::nullopt, 1, {}}); },
                           ErrorCode::kNotFound));
  EXPECT_TRUE(throws_error([&] { nearest_neighbors(space, {0, std::nullopt, 0, {}}); },
                           ErrorCode::kInvalidArgument));
}

TEST(NearestNeighbors, TiesGoToLowerId) {
  auto space = space_from_text("4 2\nq 1 0\nb 2 0\na 3 0\nc 0 1\n");
  const auto nn = nearest_neighbors(space, {0, std::nullopt, 2, {}});
  ASSERT_EQ(nn.size(), 2u);
  EXPECT_EQ(nn[0].id, 1u);
  EXPECT_EQ(nn[1].id, 2u);
}

// Brute-force oracle: score every candidate, stable sort on (cosine desc, id asc).
std::vector<Neighbor> exhaustive(const Matrix& m, WordId q, std::size_t k) {
  std::vector<Neighbor> all;
  for (WordId i = 0; i < m.rows(); ++i) {
    if (i == q) continue;
    double dot = 0, nq = 0, ni = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      dot += m(q, j) * m(i, j);
      nq += m(q, j) * m(q, j);
      ni += m(i, j) * m(i, j);
    }
    if (ni == 0.0) continue;  // zero rows are not candidates
    all.push_back({i, dot / (std::sqrt(nq) * std::sqrt(ni))});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Neighbor& a, const Neighbor& b) { return a.cosine > b.cosine; });
  if (all.size() > k) all.resize(k);
  return all;
}

TEST(NearestNeighbors, PropertyMatchesExhaustiveScan) {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t rows = 2 + rng.below(199);
    const std::size_t dim = 1 + rng.below(6);
    auto space = test::random_space(rows, dim, rng.next());
    // Quantize some rows to force exact ties.
    Matrix m = space.current();
    for (std::size_t i = 0; i < rows; i += 3)
      for (double& v : m.row(i)) v = std::round(v);
    m.row(0)[0] = 1.0;
    space.install_current(m);
    const WordId q = static_cast<WordId>(rng.below(rows));
    if (norm(m.row(q)) == 0.0) continue;
    const std::size_t k = 1 + rng.below(rows + 2);
    const auto got = nearest_neighbors(space, {q, std::nullopt, k, {}});
    const auto want = exhaustive(m, q, k);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].id, want[i].id) << "trial " << trial << " rank " << i;
      EXPECT_NEAR(got[i].cosine, want[i].cosine, 1e-12);
      if (i > 0) {
        EXPECT_GE(got[i - 1].cosine, got[i].cosine);
      }
    }
  }
}

TEST(Cosine, PropertySelfSimilarityIsOne) {
  auto space = test::random_space(50, 7, 5);
  for (WordId i = 0; i < 50; ++i)
    EXPECT_NEAR(cosine(space.current().row(i), space.current().row(i)), 1.0, 1e-9);
}

TEST(SaveEmbeddings, RoundTripWithinSixDecimals) {
  auto space = test::random_space(20, 5, 2);
  std::stringstream buf;
  const std::size_t bytes = save_embeddings(space, Which::kCurrent, buf);
  EXPECT_EQ(bytes, buf.str().size());
  EmbeddingSpace back;
  back.load(buf, "en");
  ASSERT_EQ(back.size(), space.size());
  for (WordId i = 0; i < 20; ++i) {
    EXPECT_EQ(back.vocab().at(i).surface, space.vocab().at(i).surface);
    for (std::size_t j = 0; j < 5; ++j)
      EXPECT_NEAR(back.current()(i, j), space.current()(i, j), 1e-6);
  }
}

TEST(SaveEmbeddings, OriginalSurvivesInstall) {
  auto space = test::random_space(4, 2, 3);
  const Matrix before = space.original();
  Matrix next = space.current();
  next(1, 1) += 5.0;
  space.install_current(next);
  std::stringstream orig, cur;
  save_embeddings(space, Which::kOriginal, orig);
  save_embeddings(space, Which::kCurrent, cur);
  EXPECT_NE(orig.str(), cur.str());
  EXPECT_EQ(space.original(), before);
  EmbeddingSpace back;
  back.load(orig, "en");
  EXPECT_NEAR(back.current()(1, 1), before(1, 1), 1e-6);
}

TEST(SaveEmbeddings, EmptySpaceWritesHeaderOnly) {
  auto space = space_from_text("0 3\n");
  std::ostringstream out;
  save_embeddings(space, Which::kCurrent, out);
  EXPECT_EQ(out.str(), "0 3\n");
}

TEST(SaveEmbeddings, LanguageFilter) {
  auto space = space_from_text("1 1\na 1\n", "2 1\nb 2\nc 3\n");
  std::ostringstream out;
  save_embeddings(space, Which::kCurrent, out, std::string("xx"));
  EXPECT_EQ(out.str(), "2 1\nb 2.000000\nc 3.000000\n");
}

TEST(InstallCurrent, RejectsBadShapesAndValues) {
  auto space = test::random_space(3, 2, 4);
  EXPECT_TRUE(throws_error([&] { space.install_current(Matrix(2, 2)); },
                           ErrorCode::kInvalidArgument));
  Matrix m = space.current();
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(throws_error([&] { space.install_current(m); }, ErrorCode::kNumeric));
  EXPECT_EQ(space.current(), space.original());
}

TEST(MatrixSnapshot, BinaryRoundTripIsExact) {
  test::TempDir dir;
  Rng rng(8);
  const Matrix m = test::random_matrix(13, 6, rng);
  write_matrix(m, (dir / "m.bin").string());
  const Matrix back = read_matrix((dir / "m.bin").string());
  EXPECT_EQ(back, m);
  EXPECT_EQ(fingerprint(back), fingerprint(m));
  {
    std::ofstream junk(dir / "junk.bin");
    junk << "hello";
  }
  EXPECT_TRUE(throws_error([&] { read_matrix((dir / "junk.bin").string()); }, ErrorCode::kFormat));
}

}  // namespace
}  // namespace clime
