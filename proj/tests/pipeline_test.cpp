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

#include <fstream>
#include <set>

#include "clime/experiment.hpp"
#include "clime/oracle.hpp"
#include "clime/synth.hpp"
#include "clime/workspace.hpp"
#include "expect_error.hpp"
#include "support.hpp"

namespace clime {
namespace {

using test::make_doc;
using test::throws_error;
namespace fs = std::filesystem;

TEST(Synth, DeterministicPerSeed) {
  const auto a = generate_task(test::small_spec(5));
  const auto b = generate_task(test::small_spec(5));
  const auto c = generate_task(test::small_spec(6));
  ASSERT_EQ(a.train.size(), 96u);
  ASSERT_EQ(a.test.size(), 60u);
  ASSERT_EQ(a.pool.size(), 60u);
  for (std::size_t i = 0; i < a.train.size(); ++i) EXPECT_EQ(a.train[i].text, b.train[i].text);
  for (std::size_t i = 0; i < a.tgt_words.size(); ++i)
    EXPECT_EQ(a.tgt_words[i].vector, b.tgt_words[i].vector);
  EXPECT_NE(a.train[0].text, c.train[0].text);
}

TEST(Synth, CorruptionMovesTargetWordsToTheOtherGroup) {
  auto spec = test::small_spec();
  spec.corruption = 0.5;
  const auto task = generate_task(spec);
  std::size_t content = 0;
  for (const auto& w : task.tgt_words) content += w.group >= 0 ? 1 : 0;
  EXPECT_EQ(task.corrupted.size(), content / 2);
  const std::set<std::size_t> corrupted(task.corrupted.begin(), task.corrupted.end());
  // Nearest source word by cosine decides which group a target word "looks" like.
  for (std::size_t i = 0; i < task.tgt_words.size(); ++i) {
    const auto& t = task.tgt_words[i];
    if (t.group < 0) continue;
    double best = -2.0;
    int best_group = -1;
    for (const auto& s : task.src_words) {
      if (s.group < 0) continue;
      const double c = cosine(t.vector, s.vector);
      if (c > best) {
        best = c;
        best_group = s.group;
      }
    }
    if (corrupted.count(i)) {
      EXPECT_NE(best_group, t.group) << t.surface;
    } else {
      EXPECT_EQ(best_group, t.group) << t.surface;
    }
  }
  for (const auto& d : task.test) EXPECT_EQ(d.lang, "xx");
  for (const auto& d : task.train) EXPECT_EQ(d.lang, "en");
}

TEST(Synth, SpecValidationAndJson) {
  auto spec = test::small_spec();
  EXPECT_EQ(SyntheticTaskSpec::from_json(spec.to_json()).to_json(), spec.to_json());
  spec.corruption = 1.5;
  EXPECT_TRUE(throws_error([&] { generate_task(spec); }, ErrorCode::kInvalidArgument, "corruption"));
  spec = test::small_spec();
  spec.content_tokens = 4;
  EXPECT_TRUE(throws_error([&] { spec.validate(); }, ErrorCode::kInvalidArgument, "odd"));
  spec = test::small_spec();
  spec.tgt_lang = spec.src_lang;
  EXPECT_TRUE(throws_error([&] { spec.validate(); }, ErrorCode::kInvalidArgument, "distinct"));
}

class WorkspaceFixture : public ::testing::Test {
 protected:
  void SetUp() override { write_task(generate_task(test::small_spec()), dir.path()); }
  test::TempDir dir;
};

TEST_F(WorkspaceFixture, OpensWrittenTask) {
  const auto ws = Workspace::open(dir.path());
  EXPECT_EQ(ws.langs(), (std::vector<std::string>{"en", "xx"}));
  EXPECT_EQ(ws.train_docs().size(), 96u);
  EXPECT_EQ(ws.test_docs().size(), 60u);
  EXPECT_EQ(ws.pool_docs().size(), 60u);
  EXPECT_EQ(ws.pool_truth().size(), 60u);
  ASSERT_TRUE(ws.lexicon().has_value());
  EXPECT_FALSE(ws.params().has_value());
  EXPECT_EQ(ws.space().dim(), 8u);
  for (const auto& d : ws.pool_docs()) EXPECT_FALSE(d.label.has_value());
  EXPECT_EQ(ws.manifest().round, 1);
}

TEST_F(WorkspaceFixture, ParamsAndCurrentMatrixPersist) {
  auto ws = Workspace::open(dir.path());
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 77;
  const auto p = train_model(ws.train_docs(), ws.space().original(), cfg);
  ws.set_params(p, cfg);
  Matrix next = ws.space().current();
  next(0, 0) = 0.1234567890123456789;
  ws.install_current(next);

  const auto again = Workspace::open(dir.path());
  ASSERT_TRUE(again.params().has_value());
  EXPECT_EQ(again.train_config().epochs, 2);
  EXPECT_EQ(again.train_config().seed, 77u);
  EXPECT_EQ(again.space().current(), next);  // exact, not text round-tripped
  EXPECT_EQ(again.space().original(), ws.space().original());
  EXPECT_EQ(again.manifest().round, 2);
  for (const auto& d : again.test_docs()) {
    const auto a = predict_proba(p, d.tokens, next);
    const auto b = predict_proba(*again.params(), d.tokens, next);
    EXPECT_NEAR(a[1], b[1], 1e-9);
  }
}

TEST_F(WorkspaceFixture, ManifestErrors) {
  test::TempDir empty;
  EXPECT_TRUE(throws_error([&] { Workspace::open(empty.path()); }, ErrorCode::kNotFound, "manifest"));
  std::ofstream(dir / "manifest.json", std::ios::trunc) << "{\"version\": 99}";
  EXPECT_TRUE(throws_error([&] { Workspace::open(dir.path()); }, ErrorCode::kFormat, "version"));
  std::ofstream(dir / "manifest.json", std::ios::trunc) << "[";
  EXPECT_TRUE(throws_error([&] { Workspace::open(dir.path()); }, ErrorCode::kFormat));
  WorkspaceManifest m;
  m.src_lang = "en";
  m.tgt_lang = "xx";
  m.src_emb = "src.vec";
  m.tgt_emb = "missing.vec";
  EXPECT_TRUE(throws_error([&] { Workspace::create(dir.path(), m); }, ErrorCode::kNotFound,
                           "not found"));
}

TEST(Config, JsonRoundTrips) {
  TrainConfig t;
  t.epochs = 3;
  t.widths = {1, 4};
  t.filters_per_width = 7;
  t.seed = 9;
  const auto t2 = train_config_from_json(train_config_to_json(t));
  EXPECT_EQ(t2.epochs, 3);
  EXPECT_EQ(t2.widths, (std::vector<int>{1, 4}));
  EXPECT_EQ(t2.filters_per_width, 7);
  EXPECT_EQ(t2.seed, 9u);
  RefineConfig r;
  r.lambda = 0.25;
  r.steps = 40;
  const auto r2 = refine_config_from_json(refine_config_to_json(r));
  EXPECT_EQ(r2.lambda, 0.25);
  EXPECT_EQ(r2.steps, 40);
}

TEST(Cards, MarksParseAndPrint) {
  for (Mark m : {Mark::kAccept, Mark::kReject, Mark::kClear}) EXPECT_EQ(parse_mark(to_string(m)), m);
  EXPECT_TRUE(throws_error([] { parse_mark("maybe"); }, ErrorCode::kInvalidArgument));
}

TEST(Cards, BuildAndInsertAdded) {
  auto space = test::space_from_text("3 2\nk 1 0\na 0.9 0.1\nb 0 1\n", "2 2\nx 1 0.2\ny 0.2 1\n");
  const auto& v = space.vocab();
  const auto card = build_card(space.current(), v, v.require("k", "en"), 2.5, {"en", "xx"}, 5);
  ASSERT_EQ(card.columns.size(), 2u);
  EXPECT_EQ(card.columns[0].size(), 2u);  // excludes the keyword itself
  EXPECT_EQ(card.columns[0][0].word, v.require("a", "en"));
  EXPECT_EQ(card.columns[1][0].word, v.require("x", "xx"));
  EXPECT_TRUE(card.contains(v.require("y", "xx")));
  EXPECT_FALSE(card.contains(v.require("k", "en")));

  auto edited = card;
  edited.columns[0].clear();
  edited.insert_added({7, 0.5, true}, "en");
  edited.insert_added({3, 0.9, true}, "en");
  edited.insert_added({5, 0.5, true}, "en");
  ASSERT_EQ(edited.columns[0].size(), 3u);
  EXPECT_EQ(edited.columns[0][0].word, 3u);
  EXPECT_EQ(edited.columns[0][1].word, 5u);
  EXPECT_EQ(edited.columns[0][2].word, 7u);
  EXPECT_TRUE(throws_error([&] { edited.insert_added({1, 0.1, true}, "fr"); },
                           ErrorCode::kInvalidArgument, "no column"));
}

TEST_F(WorkspaceFixture, OracleFollowsPlantedGroups) {
  const auto ws = Workspace::open(dir.path());
  const auto& lex = *ws.lexicon();
  const auto& v = ws.space().vocab();
  NeighborCard card;
  WordId keyword = 0;
  while (!lex.group.count(keyword)) ++keyword;
  card.keyword = keyword;
  card.langs = {"en", "xx"};
  card.columns.resize(2);
  std::size_t expected_marks = 0;
  for (WordId w = 0; w < v.size(); ++w) {
    if (w == keyword) continue;
    card.columns[v.at(w).lang == "en" ? 0 : 1].push_back({w, 0.0, false});
    expected_marks += lex.group.count(w);
  }
  const auto marks = oracle_feedback(card, lex);
  EXPECT_EQ(marks.size(), expected_marks);
  for (const auto& [w, m] : marks)
    EXPECT_EQ(m, lex.group.at(w) == lex.group.at(keyword) ? Mark::kAccept : Mark::kReject);

  card.keyword = *v.find("the", "en");
  EXPECT_TRUE(oracle_feedback(card, lex).empty()) << "stop-word keyword is never marked";
}

TEST_F(WorkspaceFixture, TruthLabels) {
  const auto ws = Workspace::open(dir.path());
  const std::vector<std::string> ids{ws.pool_docs()[3].id, ws.pool_docs()[0].id};
  const auto docs = label_from_truth(ws.pool_docs(), ids, ws.pool_truth());
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, ids[0]);
  EXPECT_EQ(*docs[0].label, ws.pool_truth().at(ids[0]));
  const std::vector<std::string> bad{"nope"};
  EXPECT_TRUE(throws_error([&] { label_from_truth(ws.pool_docs(), bad, ws.pool_truth()); },
                           ErrorCode::kNotFound));
  EXPECT_TRUE(throws_error([&] { read_truth_file((dir / "none.json").string()); }, ErrorCode::kIo));
}

TEST_F(WorkspaceFixture, RetrainingIsIndependentOfThreadCount) {
  const auto ws = Workspace::open(dir.path());
  TrainConfig cfg;
  cfg.epochs = 3;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto one = retrain_accuracies(ws.train_docs(), ws.test_docs(), ws.space().original(), cfg,
                                      seeds, 1);
  const auto four = retrain_accuracies(ws.train_docs(), ws.test_docs(), ws.space().original(), cfg,
                                       seeds, 4);
  EXPECT_EQ(one, four);
}

TEST_F(WorkspaceFixture, ConditionsAndCurveOnSmallTask) {
  const auto ws = Workspace::open(dir.path());
  const auto task = TaskData::from(ws);
  ExperimentConfig cfg;
  cfg.seeds = 2;
  cfg.train.epochs = 5;
  cfg.active_docs = 10;
  cfg.combined_docs = 5;
  cfg.clime_keywords = 8;
  cfg.combined_keywords = 4;
  cfg.curve = {0, 4};
  const auto r = run_conditions(task, cfg);
  ASSERT_EQ(r.conditions.size(), 4u);
  EXPECT_EQ(r.conditions[0].name, "Base");
  EXPECT_EQ(r.conditions[0].delta_vs_base, 0.0);
  EXPECT_EQ(r.seeds, cfg.seed_list());
  ASSERT_EQ(r.curve.size(), 2u);
  EXPECT_EQ(r.curve[0].accuracies, r.condition("Base").accuracies);
  EXPECT_EQ(r.details["keywords"].size(), 8u);
  EXPECT_TRUE(throws_error([&] { r.condition("Nope"); }, ErrorCode::kNotFound));
  const auto tsv = r.summary_tsv();
  EXPECT_EQ(tsv.rfind("condition\tmean", 0), 0u);
  EXPECT_NE(tsv.find("curve@4"), std::string::npos);
  const auto j = r.to_json();
  EXPECT_TRUE(j.contains("conditions"));
  EXPECT_TRUE(j.contains("ttests"));

  auto no_lexicon = task;
  no_lexicon.lexicon = nullptr;
  EXPECT_TRUE(throws_error([&] { run_conditions(no_lexicon, cfg); }, ErrorCode::kInvalidArgument,
                           "lexicon"));
}

TEST_F(WorkspaceFixture, ShiftReportTracksMarkedPairs) {
  const auto ws = Workspace::open(dir.path());
  const Matrix& e = ws.space().original();
  FeedbackSet fb{{{0, {1}, {2}}}};
  const auto after = refine(e, e, fb, RefineConfig{}).embeddings;
  const auto report = neighbor_shift_report(ws.space().vocab(), e, after, fb, ws.langs(), 3);
  ASSERT_EQ(report.size(), 1u);
  ASSERT_EQ(report[0].marks.size(), 2u);
  for (const auto& m : report[0].marks) {
    EXPECT_TRUE(m.satisfied);
    EXPECT_NEAR(m.delta, m.after - m.before, 1e-15);
  }
  EXPECT_EQ(report[0].before.size(), 2u);
  const auto j = shift_report_to_json(report, ws.space().vocab());
  EXPECT_EQ(j["keywords"].size(), 1u);
  EXPECT_EQ(j["violated_marks"], 0);
}

}  // namespace
}  // namespace clime
