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
#include <chrono>
#include <fstream>
#include <thread>

#include "clime/session.hpp"
#include "expect_error.hpp"
#include "support.hpp"
#include "trained_workspace.hpp"

namespace clime {
namespace {

using nlohmann::json;
using test::throws_error;
namespace fs = std::filesystem;

FinalizeOptions quick_options() {
  FinalizeOptions o;
  o.seeds = 2;
  o.refine.steps = 20;
  return o;
}

class SessionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    test::make_trained_workspace(dir.path(), test::small_spec());
    ws = svc.open_workspace(dir.path());
    sid = svc.create_session(ws, 4, 3);
  }

  // First card's keyword surface and a neighbor of the given column.
  std::pair<std::string, json> first_neighbor(std::size_t column = 0, std::size_t entry = 0) {
    const json card = svc.card_json(sid, 0);
    return {card["keyword"]["word"].get<std::string>(), card["columns"][column]["entries"][entry]};
  }

  test::TempDir dir;
  SessionService svc;
  std::string ws, sid;
};

TEST_F(SessionTest, CreateProducesCards) {
  EXPECT_EQ(ws, "w1");
  EXPECT_EQ(sid, "w1-s0001");
  const json s = svc.session_json(sid);
  EXPECT_EQ(s["state"], "open");
  EXPECT_EQ(s["cards"], 4);
  EXPECT_EQ(s["marks"], 0);
  EXPECT_EQ(s["round"], 1);
  const json card = svc.card_json(sid, 3);
  EXPECT_EQ(card["of"], 4);
  ASSERT_EQ(card["columns"].size(), 2u);
  EXPECT_EQ(card["columns"][0]["lang"], "en");
  EXPECT_EQ(card["columns"][1]["entries"].size(), 3u);
  for (const auto& e : card["columns"][1]["entries"]) EXPECT_EQ(e["mark"], "clear");
  // Keywords come out in descending salience.
  for (std::size_t i = 1; i < 4; ++i)
    EXPECT_GE(s["keywords"][i - 1]["salience"].get<double>(), s["keywords"][i]["salience"].get<double>());
  EXPECT_TRUE(throws_error([&] { svc.card_json(sid, 4); }, ErrorCode::kNotFound));
  EXPECT_TRUE(throws_error([&] { svc.create_session(ws, 0, 3); }, ErrorCode::kInvalidArgument));
  EXPECT_TRUE(throws_error([&] { svc.session("w1-s0099"); }, ErrorCode::kNotFound));
}

TEST_F(SessionTest, MarksAreLastWriteWinsAndClearIsLogged) {
  const auto [kw, e] = first_neighbor(1);
  const std::string word = e["word"], lang = e["lang"];
  svc.submit_mark(sid, kw, word, lang, Mark::kAccept);
  auto card = svc.submit_mark(sid, kw, word, lang, Mark::kReject);
  EXPECT_EQ(card["columns"][1]["entries"][0]["mark"], "reject");
  EXPECT_EQ(svc.session(sid).mark_count(), 1u);
  const auto fb = svc.session(sid).feedback();
  EXPECT_EQ(fb.keywords[0].negative.size(), 1u);
  EXPECT_TRUE(fb.keywords[0].positive.empty());

  card = svc.submit_mark(sid, kw, word, lang, Mark::kClear);
  EXPECT_EQ(card["columns"][1]["entries"][0]["mark"], "clear");
  EXPECT_EQ(svc.session(sid).mark_count(), 0u);
  // Clearing an unmarked word is still recorded.
  svc.submit_mark(sid, kw, word, lang, Mark::kClear);
  const auto events = svc.events(sid);
  ASSERT_EQ(events.size(), 5u);
  EXPECT_EQ(events[3].kind, "unmark");
  EXPECT_EQ(events[4].kind, "unmark");
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, i + 1);
}

TEST_F(SessionTest, MarkPreconditions) {
  const auto [kw, e] = first_neighbor();
  EXPECT_TRUE(throws_error([&] { svc.submit_mark(sid, kw, kw, "en", Mark::kAccept); },
                           ErrorCode::kInvalidArgument, "against itself"));
  EXPECT_TRUE(throws_error([&] { svc.submit_mark(sid, kw, "qqqq", "xx", Mark::kAccept); },
                           ErrorCode::kInvalidArgument, "not in vocabulary"));
  EXPECT_TRUE(throws_error([&] { svc.submit_mark(sid, "the", "of", "en", Mark::kAccept); },
                           ErrorCode::kInvalidArgument, "not on this session"));
  // An in-vocabulary word that is not on the card.
  const auto s = svc.session(sid);
  const auto& vocab = svc.with_workspace(ws, [](const Workspace& w) { return w.space().vocab(); });
  for (WordId w = 0; w < vocab.size(); ++w) {
    if (s.cards[0].contains(w) || w == s.cards[0].keyword) continue;
    EXPECT_TRUE(throws_error(
        [&] { svc.submit_mark(sid, kw, vocab.at(w).surface, vocab.at(w).lang, Mark::kAccept); },
        ErrorCode::kInvalidArgument, "not on the card"));
    break;
  }
  EXPECT_EQ(svc.events(sid).size(), 1u) << "rejected mutations are not logged";
}

TEST_F(SessionTest, AddWord) {
  const auto s = svc.session(sid);
  const auto [kw, e] = first_neighbor();
  const auto vocab = svc.with_workspace(ws, [](const Workspace& w) { return w.space().vocab(); });
  WordId extra = 0;
  while (vocab.at(extra).lang != "xx" || s.cards[0].contains(extra)) ++extra;
  const json card = svc.add_word(sid, kw, vocab.at(extra).surface, "xx", Mark::kAccept);
  bool found = false;
  for (const auto& entry : card["columns"][1]["entries"])
    if (entry["word"] == vocab.at(extra).surface) {
      found = true;
      EXPECT_TRUE(entry["added"].get<bool>());
      EXPECT_EQ(entry["mark"], "accept");
    }
  EXPECT_TRUE(found);
  EXPECT_EQ(card["columns"][1]["entries"].size(), 4u);
  EXPECT_TRUE(svc.session(sid).feedback().keywords[0].positive.count(extra));

  EXPECT_TRUE(throws_error([&] { svc.add_word(sid, kw, "qqqq", "xx", Mark::kAccept); },
                           ErrorCode::kInvalidArgument, "not in vocabulary"));
  EXPECT_TRUE(throws_error([&] { svc.add_word(sid, kw, vocab.at(extra).surface, "xx", Mark::kReject); },
                           ErrorCode::kInvalidArgument, "already a neighbor"));
  EXPECT_TRUE(throws_error([&] { svc.add_word(sid, kw, e["word"], "en", Mark::kReject); },
                           ErrorCode::kInvalidArgument, "already a neighbor"));
  EXPECT_TRUE(throws_error([&] { svc.add_word(sid, kw, kw, "en", Mark::kReject); },
                           ErrorCode::kInvalidArgument, "own neighbor"));
  EXPECT_TRUE(throws_error([&] { svc.add_word(sid, kw, "the", "fr", Mark::kReject); },
                           ErrorCode::kInvalidArgument, "no column"));
}

TEST_F(SessionTest, ConcordanceIsLimitedAndOrdered) {
  const auto hits = svc.concordance(ws, "the", "en", 7);
  ASSERT_EQ(hits.size(), 7u);
  for (std::size_t i = 1; i < hits.size(); ++i)
    EXPECT_LT(hits[i - 1]["doc"].get<std::string>(), hits[i]["doc"].get<std::string>());
  for (const auto& h : hits) {
    EXPECT_EQ(h["lang"], "en");
    const auto tokens = normalize_tokens(h["text"].get<std::string>());
    EXPECT_NE(std::find(tokens.begin(), tokens.end(), "the"), tokens.end());
  }
  const auto all = svc.concordance(ws, "the", "en", 100000);
  EXPECT_GT(all.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(all[i], hits[i]);
  EXPECT_TRUE(svc.concordance(ws, "the", "en", 0).empty());
  EXPECT_TRUE(throws_error([&] { svc.concordance(ws, "qqqq", "en"); }, ErrorCode::kInvalidArgument,
                           "not in vocabulary"));
}

TEST_F(SessionTest, FinalizeNeedsMarks) {
  EXPECT_TRUE(throws_error([&] { svc.finalize(sid, quick_options()); }, ErrorCode::kInvalidArgument,
                           "no marks"));
  EXPECT_TRUE(throws_error([&] { svc.finalize_async(sid, quick_options()); },
                           ErrorCode::kInvalidArgument, "no marks"));
  EXPECT_TRUE(throws_error([&] { svc.report(sid); }, ErrorCode::kNotFound));
  EXPECT_EQ(svc.session_json(sid)["state"], "open");
}

TEST_F(SessionTest, FinalizeClosesInstallsAndReRanks) {
  svc.oracle_annotate(sid);
  ASSERT_GT(svc.session(sid).mark_count(), 0u);
  const Matrix before = svc.with_workspace(ws, [](const Workspace& w) { return w.space().current(); });
  const auto report = svc.finalize(sid, quick_options());
  EXPECT_EQ(report.conditions.size(), 2u);
  EXPECT_EQ(report.seeds.size(), 2u);
  EXPECT_EQ(svc.session_json(sid)["state"], "closed");
  EXPECT_EQ(svc.report(sid)["conditions"], report.to_json()["conditions"]);

  const auto [kw, e] = first_neighbor();
  EXPECT_TRUE(throws_error([&] { svc.submit_mark(sid, kw, e["word"], e["lang"], Mark::kAccept); },
                           ErrorCode::kConflict));
  EXPECT_TRUE(throws_error([&] { svc.oracle_annotate(sid); }, ErrorCode::kConflict));
  EXPECT_TRUE(throws_error([&] { svc.finalize(sid, quick_options()); }, ErrorCode::kConflict));

  const Matrix after = svc.with_workspace(ws, [](const Workspace& w) { return w.space().current(); });
  EXPECT_NE(after, before);
  EXPECT_EQ(fingerprint(after), *svc.session(sid).refined_fingerprint);

  // Round two ranks and builds cards on the refined matrix.
  const auto round2 = svc.create_session(ws, 4, 3);
  EXPECT_EQ(round2, "w1-s0002");
  const auto s2 = svc.session(round2);
  EXPECT_EQ(s2.round, 2);
  const auto& card = s2.cards[0];
  for (const auto& entry : card.columns[1])
    EXPECT_NEAR(entry.cosine, cosine(after.row(card.keyword), after.row(entry.word)), 1e-12);
}

TEST_F(SessionTest, LogReplaysToLiveState) {
  const auto [kw, e] = first_neighbor();
  svc.submit_mark(sid, kw, e["word"], e["lang"], Mark::kAccept);
  svc.oracle_annotate(sid);
  const auto events = read_event_log(svc.log_path(sid));
  EXPECT_EQ(events.size(), svc.events(sid).size());
  EXPECT_EQ(replay(events), svc.session(sid));

  SessionService other;
  EXPECT_EQ(other.open_workspace(dir.path()), "w1");
  EXPECT_EQ(other.session(sid), svc.session(sid));
  EXPECT_EQ(svc.open_workspace(dir.path() / "."), "w1") << "an open directory is not reopened";
}

TEST_F(SessionTest, ReplayInFreshWorkspaceReproducesEverything) {
  svc.oracle_annotate(sid);
  const auto report = svc.finalize(sid, quick_options());
  const auto log = read_event_log(svc.log_path(sid));

  test::TempDir fresh;
  test::make_trained_workspace(fresh.path(), test::small_spec());
  SessionService replayer;
  const auto ws2 = replayer.open_workspace(fresh.path());
  const auto sid2 = replayer.import_session(ws2, log);
  EXPECT_EQ(replayer.session(sid2).feedback(), svc.session(sid).feedback());
  const auto report2 = replayer.finalize(sid2, quick_options());
  auto a = report.to_json(), b = report2.to_json();
  a.erase("timing");
  b.erase("timing");
  EXPECT_EQ(a, b);
  const Matrix m1 = svc.with_workspace(ws, [](const Workspace& w) { return w.space().current(); });
  const Matrix m2 = replayer.with_workspace(ws2, [](const Workspace& w) { return w.space().current(); });
  EXPECT_EQ(m1, m2);
}

TEST_F(SessionTest, ImportValidation) {
  auto log = svc.events(sid);
  EXPECT_TRUE(throws_error([&] { svc.import_session(ws, std::span(log).subspan(1)); },
                           ErrorCode::kFormat, "create"));
  auto bad = log;
  bad[0].payload["langs"] = {"en", "fr"};
  for (auto& c : bad[0].payload["cards"]) c["columns"] = json::array({json::array(), json::array()});
  EXPECT_TRUE(throws_error([&] { svc.import_session(ws, bad); }, ErrorCode::kInvalidArgument,
                           "languages"));
  EXPECT_EQ(svc.session_ids(ws).size(), 1u);
  const auto imported = svc.import_session(ws, log);
  EXPECT_EQ(imported, "w1-s0002");
}

TEST_F(SessionTest, CorruptLogIsAFormatError) {
  const auto path = svc.log_path(sid);
  std::ofstream(path, std::ios::app) << "{\"seq\": 2, \"kind\": \"teleport\"}\n";
  EXPECT_TRUE(throws_error([&] { replay(read_event_log(path)); }, ErrorCode::kFormat));
  SessionService other;
  EXPECT_TRUE(throws_error([&] { other.open_workspace(dir.path()); }, ErrorCode::kFormat));
}

TEST_F(SessionTest, AsyncFinalizeJob) {
  svc.oracle_annotate(sid);
  const auto job = svc.finalize_async(sid, quick_options());
  svc.wait_for_jobs();
  const auto st = svc.job(job);
  EXPECT_EQ(st.state, "done") << st.error;
  EXPECT_EQ(st.session, sid);
  EXPECT_TRUE(st.result.contains("report"));
  EXPECT_TRUE(throws_error([&] { svc.job("j999"); }, ErrorCode::kNotFound));
}

TEST(SessionService, UntrainedWorkspaceCannotStartSessions) {
  test::TempDir dir;
  write_task(generate_task(test::small_spec()), dir.path());
  SessionService svc;
  const auto ws = svc.open_workspace(dir.path());
  EXPECT_TRUE(throws_error([&] { svc.create_session(ws, 3, 3); }, ErrorCode::kInvalidArgument,
                           "no trained classifier"));
  EXPECT_TRUE(throws_error([&] { svc.create_session("w9", 3, 3); }, ErrorCode::kNotFound));
}

}  // namespace
}  // namespace clime
