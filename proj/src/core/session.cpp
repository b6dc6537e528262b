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

#include "clime/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace clime {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::kOpen: return "open";
    case SessionState::kFinalizing: return "finalizing";
    case SessionState::kClosed: return "closed";
  }
  return "open";
}

json SessionEvent::to_json() const {
  return {{"seq", seq}, {"ts", timestamp_ms}, {"session", session}, {"kind", kind},
          {"payload", payload}};
}

SessionEvent SessionEvent::from_json(const json& j) {
  try {
    SessionEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.timestamp_ms = j.value("ts", std::int64_t{0});
    e.session = j.at("session").get<std::string>();
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.value("payload", json::object());
    return e;
  } catch (const json::exception& ex) {
    fail(ErrorCode::kFormat, std::string("session event: ") + ex.what());
  }
}

std::optional<std::size_t> Session::card_of(WordId keyword) const {
  for (std::size_t i = 0; i < cards.size(); ++i)
    if (cards[i].keyword == keyword) return i;
  return std::nullopt;
}

FeedbackSet Session::feedback() const {
  FeedbackSet fb;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    KeywordFeedback kf;
    kf.keyword = cards[i].keyword;
    for (const auto& [word, mark] : marks[i]) {
      if (mark == Mark::kAccept) kf.positive.insert(word);
      if (mark == Mark::kReject) kf.negative.insert(word);
    }
    fb.keywords.push_back(std::move(kf));
  }
  return fb;
}

std::size_t Session::mark_count() const {
  std::size_t n = 0;
  for (const auto& m : marks) n += m.size();
  return n;
}

namespace {

std::size_t card_index(const Session& s, const json& payload) {
  const auto i = payload.at("card").get<std::size_t>();
  if (i >= s.cards.size()) fail(ErrorCode::kFormat, "session event: card index out of range");
  return i;
}

json card_to_payload(const NeighborCard& card) {
  json cols = json::array();
  for (const auto& col : card.columns) {
    json entries = json::array();
    for (const auto& e : col) entries.push_back({{"word", e.word}, {"cosine", e.cosine}});
    cols.push_back(entries);
  }
  return {{"keyword", card.keyword}, {"salience", card.salience}, {"columns", cols}};
}

NeighborCard card_from_payload(const json& j, const std::vector<std::string>& langs) {
  NeighborCard card;
  card.keyword = j.at("keyword").get<WordId>();
  card.salience = j.at("salience").get<double>();
  card.langs = langs;
  for (const auto& col : j.at("columns")) {
    std::vector<CardEntry> entries;
    for (const auto& e : col)
      entries.push_back({e.at("word").get<WordId>(), e.at("cosine").get<double>(), false});
    card.columns.push_back(std::move(entries));
  }
  if (card.columns.size() != langs.size())
    fail(ErrorCode::kFormat, "session event: card column count does not match languages");
  return card;
}

}  // namespace

void Session::apply(const SessionEvent& event) {
  const json& p = event.payload;
  try {
    if (event.kind == "create") {
      id = event.session;
      round = p.at("round").get<int>();
      s = p.at("s").get<std::size_t>();
      k = p.at("k").get<std::size_t>();
      const auto langs = p.at("langs").get<std::vector<std::string>>();
      cards.clear();
      for (const auto& c : p.at("cards")) cards.push_back(card_from_payload(c, langs));
      marks.assign(cards.size(), {});
      added.clear();
      state = SessionState::kOpen;
      refined_fingerprint.reset();
      report_file.clear();
      return;
    }
    if (event.kind == "mark" || event.kind == "unmark" || event.kind == "add_word") {
      if (state != SessionState::kOpen)
        fail(ErrorCode::kConflict, "session " + id + " is not open");
      const std::size_t i = card_index(*this, p);
      const auto word = p.at("word").get<WordId>();
      if (event.kind == "add_word") {
        cards[i].insert_added({word, p.at("cosine").get<double>(), true},
                              p.at("lang").get<std::string>());
        added.push_back({i, word});
        const Mark m = parse_mark(p.value("mark", std::string("clear")));
        if (m != Mark::kClear) marks[i][word] = m;
      } else if (event.kind == "mark") {
        const Mark m = parse_mark(p.at("mark").get<std::string>());
        if (m == Mark::kClear) fail(ErrorCode::kFormat, "session event: mark event with clear");
        marks[i][word] = m;
      } else {
        marks[i].erase(word);
      }
      return;
    }
    if (event.kind == "finalize") {
      if (state != SessionState::kOpen)
        fail(ErrorCode::kConflict, "session " + id + " is not open");
      state = SessionState::kFinalizing;
      return;
    }
    if (event.kind == "refine_done") {
      refined_fingerprint = p.at("fingerprint").get<std::uint64_t>();
      return;
    }
    if (event.kind == "retrain_done") {
      report_file = p.value("report", std::string());
      state = SessionState::kClosed;
      return;
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::kFormat, "session event " + event.kind + ": " + ex.what());
  }
  fail(ErrorCode::kFormat, "unknown session event kind: " + event.kind);
}

Session replay(std::span<const SessionEvent> events) {
  if (events.empty() || events.front().kind != "create")
    fail(ErrorCode::kFormat, "session log must start with a create event");
  Session s;
  for (const auto& e : events) s.apply(e);
  return s;
}

std::vector<SessionEvent> read_event_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kNotFound, "cannot open session log " + path.string());
  std::vector<SessionEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    events.push_back(SessionEvent::from_json(j));
  }
  return events;
}

struct SessionService::SessionHandle {
  std::string id;
  std::string local_id;
  std::shared_ptr<WorkspaceHandle> ws;
  fs::path log;
  std::mutex mu;
  Session session;
  std::vector<SessionEvent> events;
};

struct SessionService::JobHandle {
  std::mutex mu;
  JobStatus status;
};

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void require_open(const Session& s) {
  if (s.state != SessionState::kOpen)
    fail(ErrorCode::kConflict, "session " + s.id + " is " + std::string(to_string(s.state)));
}

WordId require_word(const Vocabulary& vocab, const std::string& surface, const std::string& lang) {
  const auto id = vocab.find(surface, lang);
  if (!id) fail(ErrorCode::kInvalidArgument, "not in vocabulary: " + lang + ":" + surface);
  return *id;
}

std::size_t require_card(const Session& s, const Vocabulary& vocab, const std::string& keyword,
                         const std::string& lang) {
  const auto id = vocab.find(keyword, lang);
  const auto card = id ? s.card_of(*id) : std::nullopt;
  if (!card) fail(ErrorCode::kInvalidArgument, "keyword " + keyword + " is not on this session");
  return *card;
}

}  // namespace

SessionService::SessionService() = default;

SessionService::~SessionService() { wait_for_jobs(); }

std::shared_ptr<SessionService::WorkspaceHandle> SessionService::find_workspace(
    const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = workspaces_.find(id);
  if (it == workspaces_.end()) fail(ErrorCode::kNotFound, "unknown workspace " + id);
  return it->second;
}

std::shared_ptr<SessionService::SessionHandle> SessionService::find_session(
    const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::kNotFound, "unknown session " + id);
  return it->second;
}

std::shared_ptr<SessionService::SessionHandle> SessionService::register_session(
    const std::shared_ptr<WorkspaceHandle>& ws, const std::string& local_id) {
  auto sh = std::make_shared<SessionHandle>();
  sh->id = ws->id + "-" + local_id;
  sh->local_id = local_id;
  sh->ws = ws;
  sh->log = ws->ws.sessions_dir() / (local_id + ".jsonl");
  std::lock_guard lock(mu_);
  sessions_[sh->id] = sh;
  return sh;
}

std::string SessionService::next_local_id(WorkspaceHandle& ws) {
  std::lock_guard lock(mu_);
  for (std::size_t n = 1;; ++n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%04zu", n);
    if (!sessions_.count(ws.id + "-" + buf) &&
        !fs::exists(ws.ws.sessions_dir() / (std::string(buf) + ".jsonl")))
      return buf;
  }
}

void SessionService::record(SessionHandle& sh, const std::string& kind, json payload) {
  SessionEvent e;
  e.seq = sh.events.size() + 1;
  e.timestamp_ms = now_ms();
  e.session = sh.local_id;
  e.kind = kind;
  e.payload = std::move(payload);

  Session next = sh.session;
  next.apply(e);

  fs::create_directories(sh.log.parent_path());
  std::ofstream out(sh.log, std::ios::app);
  if (!out) fail(ErrorCode::kIo, "cannot append to " + sh.log.string());
  out << e.to_json().dump() << '\n';
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write failed: " + sh.log.string());

  sh.session = std::move(next);
  sh.events.push_back(std::move(e));
}

std::string SessionService::open_workspace(const fs::path& dir) {
  const fs::path key = fs::weakly_canonical(dir);
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, ws] : workspaces_)
      if (ws->ws.dir() == key) return id;
  }
  auto ws = std::make_shared<WorkspaceHandle>();
  ws->ws = Workspace::open(key);

  // Load persisted sessions before publishing the workspace.
  std::vector<std::pair<std::string, std::vector<SessionEvent>>> persisted;
  if (fs::is_directory(ws->ws.sessions_dir())) {
    for (const auto& entry : fs::directory_iterator(ws->ws.sessions_dir()))
      if (entry.path().extension() == ".jsonl")
        persisted.emplace_back(entry.path().stem().string(), read_event_log(entry.path()));
    std::sort(persisted.begin(), persisted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  std::vector<Session> sessions;
  for (const auto& [local, events] : persisted) sessions.push_back(replay(events));

  {
    std::lock_guard lock(mu_);
    ws->id = "w" + std::to_string(workspaces_.size() + 1);
    workspaces_[ws->id] = ws;
  }
  for (std::size_t i = 0; i < persisted.size(); ++i) {
    auto sh = register_session(ws, persisted[i].first);
    sh->session = std::move(sessions[i]);
    sh->events = std::move(persisted[i].second);
  }
  return ws->id;
}

std::vector<std::string> SessionService::workspace_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, ws] : workspaces_) out.push_back(id);
  return out;
}

json SessionService::workspace_info(const std::string& workspace_id) const {
  const auto sessions = session_ids(workspace_id);
  return with_workspace(workspace_id, [&](const Workspace& ws) {
    return json{{"id", workspace_id},
                {"dir", ws.dir().string()},
                {"src_lang", ws.manifest().src_lang},
                {"tgt_lang", ws.manifest().tgt_lang},
                {"vocab_size", ws.space().size()},
                {"dim", ws.space().dim()},
                {"round", ws.manifest().round},
                {"trained", ws.params().has_value()},
                {"documents",
                 {{"train", ws.train_docs().size()},
                  {"test", ws.test_docs().size()},
                  {"unlabeled", ws.pool_docs().size()}}},
                {"sessions", sessions}};
  });
}

std::string SessionService::create_session(const std::string& workspace_id, std::size_t s,
                                           std::size_t k) {
  if (s == 0) fail(ErrorCode::kInvalidArgument, "s must be at least 1");
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be at least 1");
  auto ws = find_workspace(workspace_id);
  json payload;
  {
    std::shared_lock lock(ws->mu);
    const Workspace& w = ws->ws;
    if (!w.params()) fail(ErrorCode::kInvalidArgument, "workspace has no trained classifier");
    const auto cards = keyword_cards(*w.params(), TaskData::from(w), w.space().current(), s, k);
    if (cards.empty()) fail(ErrorCode::kInvalidArgument, "no keyword has positive salience");
    json list = json::array();
    for (const auto& c : cards) list.push_back(card_to_payload(c));
    payload = {{"round", w.manifest().round}, {"s", s},         {"k", k},
               {"langs", w.langs()},          {"cards", list}};
  }
  auto sh = register_session(ws, next_local_id(*ws));
  std::lock_guard lock(sh->mu);
  record(*sh, "create", std::move(payload));
  return sh->id;
}

std::string SessionService::import_session(const std::string& workspace_id,
                                           std::span<const SessionEvent> events) {
  if (events.empty() || events.front().kind != "create")
    fail(ErrorCode::kFormat, "session log must start with a create event");
  auto ws = find_workspace(workspace_id);
  {
    // Reject logs that cannot belong to this workspace before writing anything.
    std::shared_lock lock(ws->mu);
    const Session probe = replay(events.first(1));
    if (probe.cards.empty() || probe.cards.front().langs != ws->ws.langs())
      fail(ErrorCode::kInvalidArgument, "session log languages do not match workspace");
    const std::size_t n = ws->ws.space().size();
    for (const auto& card : probe.cards) {
      if (card.keyword >= n) fail(ErrorCode::kInvalidArgument, "session log word id out of range");
      for (const auto& col : card.columns)
        for (const auto& e : col)
          if (e.word >= n) fail(ErrorCode::kInvalidArgument, "session log word id out of range");
    }
  }
  auto sh = register_session(ws, next_local_id(*ws));
  std::lock_guard lock(sh->mu);
  for (const auto& e : events) {
    if (e.kind == "create" || e.kind == "mark" || e.kind == "unmark" || e.kind == "add_word")
      record(*sh, e.kind, e.payload);
  }
  return sh->id;
}

Session SessionService::session(const std::string& session_id) const {
  auto sh = find_session(session_id);
  std::lock_guard lock(sh->mu);
  return sh->session;
}

std::vector<std::string> SessionService::session_ids(const std::string& workspace_id) const {
  find_workspace(workspace_id);
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, sh] : sessions_)
    if (sh->ws->id == workspace_id) out.push_back(id);
  return out;
}

std::vector<SessionEvent> SessionService::events(const std::string& session_id) const {
  auto sh = find_session(session_id);
  std::lock_guard lock(sh->mu);
  return sh->events;
}

fs::path SessionService::log_path(const std::string& session_id) const {
  return find_session(session_id)->log;
}

json SessionService::session_json(const std::string& session_id) const {
  auto sh = find_session(session_id);
  std::lock_guard lock(sh->mu);
  std::shared_lock ws_lock(sh->ws->mu);
  const Vocabulary& vocab = sh->ws->ws.space().vocab();
  const Session& s = sh->session;
  json keywords = json::array();
  for (std::size_t i = 0; i < s.cards.size(); ++i) {
    std::size_t accepted = 0, rejected = 0;
    for (const auto& [w, m] : s.marks[i]) (m == Mark::kAccept ? accepted : rejected)++;
    const Word& kw = vocab.at(s.cards[i].keyword);
    keywords.push_back({{"index", i},
                        {"word", kw.surface},
                        {"lang", kw.lang},
                        {"salience", s.cards[i].salience},
                        {"accepted", accepted},
                        {"rejected", rejected}});
  }
  return {{"id", sh->id},
          {"workspace", sh->ws->id},
          {"state", to_string(s.state)},
          {"round", s.round},
          {"s", s.s},
          {"k", s.k},
          {"cards", s.cards.size()},
          {"marks", s.mark_count()},
          {"keywords", keywords},
          {"report", s.report_file.empty() ? json(nullptr) : json(s.report_file)}};
}

json SessionService::card_json_locked(const SessionHandle& sh, std::size_t index) const {
  const Session& s = sh.session;
  if (index >= s.cards.size())
    fail(ErrorCode::kNotFound, "session " + sh.id + " has no card " + std::to_string(index));
  std::shared_lock ws_lock(sh.ws->mu);
  const Vocabulary& vocab = sh.ws->ws.space().vocab();
  const NeighborCard& card = s.cards[index];
  json columns = json::array();
  for (std::size_t c = 0; c < card.columns.size(); ++c) {
    json entries = json::array();
    for (const auto& e : card.columns[c]) {
      const auto it = s.marks[index].find(e.word);
      entries.push_back({{"word", vocab.at(e.word).surface},
                         {"lang", vocab.at(e.word).lang},
                         {"cosine", e.cosine},
                         {"added", e.added},
                         {"mark", it == s.marks[index].end() ? "clear" : to_string(it->second)}});
    }
    columns.push_back({{"lang", card.langs[c]}, {"entries", entries}});
  }
  const Word& kw = vocab.at(card.keyword);
  return {{"session", sh.id},
          {"index", index},
          {"of", s.cards.size()},
          {"state", to_string(s.state)},
          {"keyword", {{"word", kw.surface}, {"lang", kw.lang}}},
          {"salience", card.salience},
          {"columns", columns}};
}

json SessionService::card_json(const std::string& session_id, std::size_t index) const {
  auto sh = find_session(session_id);
  std::lock_guard lock(sh->mu);
  return card_json_locked(*sh, index);
}

json SessionService::feedback_json(const std::string& session_id) const {
  auto sh = find_session(session_id);
  std::lock_guard lock(sh->mu);
  std::shared_lock ws_lock(sh->ws->mu);
  return feedback_to_json(sh->session.feedback(), sh->ws->ws.space().vocab());
}

json SessionService::submit_mark(const std::string& session_id, const std::string& keyword,
                                 const std::string& word, const std::string& lang, Mark mark) {
  auto sh = find_session(session_id);
  std::lock_guard lock(sh->mu);
  require_open(sh->session);
  json payload;
  std::size_t card = 0;
  {
    std::shared_lock ws_lock(sh->ws->mu);
    const Vocabulary& vocab = sh->ws->ws.space().vocab();
    card = require_card(sh->session, vocab, keyword, sh->ws->ws.manifest().src_lang);
    const WordId w = require_word(vocab, word, lang);
    if (w == sh->session.cards[card].keyword)
      fail(ErrorCode::kInvalidArgument, "a keyword cannot be marked against itself");
    if (!sh->session.cards[card].contains(w))
      fail(ErrorCode::kInvalidArgument, word + " is not on the card for " + keyword);
    payload = {{"card", card}, {"word", w}, {"surface", word}, {"lang", lang}};
  }
  if (mark == Mark::kClear) {
    record(*sh, "unmark", std::move(payload));
  } else {
    payload["mark"] = to_string(mark);
    record(*sh, "mark", std::move(payload));
  }
  return card_json_locked(*sh, card);
}

json SessionService::add_word(const std::string& session_id, const std::string& keyword,
                              const std::string& surface, const std::string& lang, Mark mark) {
  auto sh = find_session(session_id);
  std::lock_guard lock(sh->mu);
  require_open(sh->session);
  json payload;
  std::size_t card = 0;
  {
    std::shared_lock ws_lock(sh->ws->mu);
    const Workspace& ws = sh->ws->ws;
    const Vocabulary& vocab = ws.space().vocab();
    card = require_card(sh->session, vocab, keyword, ws.manifest().src_lang);
    const NeighborCard& c = sh->session.cards[card];
    if (!c.column_of(lang)) fail(ErrorCode::kInvalidArgument, "card has no column for " + lang);
    const WordId w = require_word(vocab, surface, lang);
    if (w == c.keyword) fail(ErrorCode::kInvalidArgument, "a keyword cannot be its own neighbor");
    if (c.contains(w))
      fail(ErrorCode::kInvalidArgument, surface + " is already a neighbor of " + keyword);
    const Matrix& e = ws.space().current();
    if (norm(e.row(w)) == 0.0) fail(ErrorCode::kInvalidArgument, surface + " has a zero vector");
    payload = {{"card", card},     {"word", w}, {"surface", surface}, {"lang", lang},
               {"cosine", cosine(e.row(c.keyword), e.row(w))}, {"mark", to_string(mark)}};
  }
  record(*sh, "add_word", std::move(payload));
  return card_json_locked(*sh, card);
}

std::vector<json> SessionService::concordance(const std::string& workspace_id,
                                              const std::string& word, const std::string& lang,
                                              std::size_t limit) const {
  return with_workspace(workspace_id, [&](const Workspace& ws) {
    const WordId w = require_word(ws.space().vocab(), word, lang);
    std::vector<const Document*> hits;
    for (const auto* docs : {&ws.train_docs(), &ws.pool_docs()})
      for (const auto& d : *docs)
        if (d.lang == lang && std::find(d.tokens.begin(), d.tokens.end(), w) != d.tokens.end())
          hits.push_back(&d);
    std::sort(hits.begin(), hits.end(),
              [](const Document* a, const Document* b) { return a->id < b->id; });
    if (hits.size() > limit) hits.resize(limit);
    std::vector<json> out;
    for (const auto* d : hits) out.push_back({{"doc", d->id}, {"lang", d->lang}, {"text", d->text}});
    return out;
  });
}

void SessionService::oracle_annotate(const std::string& session_id) {
  auto sh = find_session(session_id);
  std::lock_guard lock(sh->mu);
  require_open(sh->session);
  std::vector<json> payloads;
  {
    std::shared_lock ws_lock(sh->ws->mu);
    const auto& lexicon = sh->ws->ws.lexicon();
    if (!lexicon) fail(ErrorCode::kInvalidArgument, "workspace has no oracle lexicon");
    const Vocabulary& vocab = sh->ws->ws.space().vocab();
    for (std::size_t i = 0; i < sh->session.cards.size(); ++i)
      for (const auto& [w, m] : oracle_feedback(sh->session.cards[i], *lexicon))
        payloads.push_back({{"card", i},
                            {"word", w},
                            {"surface", vocab.at(w).surface},
                            {"lang", vocab.at(w).lang},
                            {"mark", to_string(m)}});
  }
  for (auto& p : payloads) record(*sh, "mark", std::move(p));
}

EvalReport SessionService::finalize(const std::string& session_id, const FinalizeOptions& options) {
  if (options.seeds == 0) fail(ErrorCode::kInvalidArgument, "seeds must be at least 1");
  auto sh = find_session(session_id);
  std::lock_guard lock(sh->mu);
  require_open(sh->session);
  const FeedbackSet fb = sh->session.feedback();
  if (fb.empty()) fail(ErrorCode::kInvalidArgument, "session has no marks to finalize");

  std::unique_lock ws_lock(sh->ws->mu);
  Workspace& ws = sh->ws->ws;
  const auto t0 = std::chrono::steady_clock::now();
  // A failed refinement leaves both the workspace and the session untouched.
  RefineResult refined = refine(ws.space().current(), ws.space().original(), fb, options.refine);

  record(*sh, "finalize",
         {{"lambda", options.refine.lambda},
          {"steps", options.refine.steps},
          {"seeds", options.seeds},
          {"marks", fb.size()}});
  const std::uint64_t fp = fingerprint(refined.embeddings);
  record(*sh, "refine_done",
         {{"fingerprint", fp},
          {"initial_cost", refined.trace.front()},
          {"final_cost", refined.trace.back()}});
  ws.install_current(std::move(refined.embeddings));
  const double t_refine =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const TrainConfig base = ws.train_config();
  EvalReport report;
  for (std::size_t i = 0; i < options.seeds; ++i) report.seeds.push_back(base.seed + 1 + i);
  if (!ws.test_docs().empty()) {
    for (const auto& [name, m] : {std::pair<std::string, const Matrix*>{"Base", &ws.space().original()},
                                  {"CLIME", &ws.space().current()}}) {
      ConditionResult c;
      c.name = name;
      c.accuracies = retrain_accuracies(ws.train_docs(), ws.test_docs(), *m, base, report.seeds);
      c.mean = mean(c.accuracies);
      c.delta_vs_base = report.conditions.empty() ? 0.0 : c.mean - report.conditions[0].mean;
      report.conditions.push_back(std::move(c));
    }
    try {
      report.ttests.push_back(
          {"CLIME vs Base", single_sample_ttest(report.conditions[1].accuracies,
                                                report.conditions[0].mean)});
    } catch (const Error& e) {
      report.details["ttest_skipped"].push_back(
          {{"comparison", "CLIME vs Base"}, {"reason", e.what()}});
    }
  }
  ws.set_params(train_model(ws.train_docs(), ws.space().current(), base), base);

  const Vocabulary& vocab = ws.space().vocab();
  const Matrix& anchor = ws.space().original();
  report.details["round"] = sh->session.round;
  report.details["marks"] = fb.size();
  report.details["feedback"] = feedback_to_json(fb, vocab);
  report.details["refine"] = {{"lambda", options.refine.lambda},
                              {"steps", options.refine.steps},
                              {"initial_cost", sh->events.back().payload["initial_cost"]},
                              {"final_cost", sh->events.back().payload["final_cost"]},
                              {"fingerprint", fp},
                              {"max_displacement", [&] {
                                 double worst = 0.0;
                                 const Matrix& cur = ws.space().current();
                                 for (WordId w : fb.touched_rows()) {
                                   double d = 0.0;
                                   for (std::size_t j = 0; j < cur.cols(); ++j)
                                     d += (cur(w, j) - anchor(w, j)) * (cur(w, j) - anchor(w, j));
                                   worst = std::max(worst, std::sqrt(d));
                                 }
                                 return worst;
                               }()}};
  report.timing["refine"] = t_refine;
  report.timing["total"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(ws.reports_dir());
  const std::string rel = "reports/" + sh->local_id + ".json";
  {
    std::ofstream out(ws.dir() / rel, std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write report " + rel);
    out << report.to_json().dump(2) << '\n';
  }
  json means = json::object();
  for (const auto& c : report.conditions) means[c.name] = c.mean;
  record(*sh, "retrain_done", {{"report", rel}, {"means", means}});
  return report;
}

std::string SessionService::finalize_async(const std::string& session_id,
                                           const FinalizeOptions& options) {
  auto sh = find_session(session_id);
  {
    std::lock_guard lock(sh->mu);
    require_open(sh->session);
    if (sh->session.feedback().empty())
      fail(ErrorCode::kInvalidArgument, "session has no marks to finalize");
  }
  auto job = std::make_shared<JobHandle>();
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = "j" + std::to_string(next_job_++);
    job->status = {id, session_id, "queued", "", nullptr};
    jobs_[id] = job;
    workers_.emplace_back([this, job, session_id, options] {
      {
        std::lock_guard jl(job->mu);
        job->status.state = "running";
      }
      try {
        const EvalReport report = finalize(session_id, options);
        std::lock_guard jl(job->mu);
        job->status.state = "done";
        job->status.result = {{"session", session_id}, {"report", report.to_json()}};
      } catch (const std::exception& e) {
        std::lock_guard jl(job->mu);
        job->status.state = "failed";
        job->status.error = e.what();
      }
    });
  }
  return id;
}

JobStatus SessionService::job(const std::string& job_id) const {
  std::shared_ptr<JobHandle> job;
  {
    std::lock_guard lock(mu_);
    const auto it = jobs_.find(job_id);
    if (it == jobs_.end()) fail(ErrorCode::kNotFound, "unknown job " + job_id);
    job = it->second;
  }
  std::lock_guard lock(job->mu);
  return job->status;
}

void SessionService::wait_for_jobs() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers)
    if (t.joinable()) t.join();
}

json SessionService::report(const std::string& session_id) const {
  auto sh = find_session(session_id);
  std::string rel;
  {
    std::lock_guard lock(sh->mu);
    rel = sh->session.report_file;
  }
  if (rel.empty()) fail(ErrorCode::kNotFound, "session " + session_id + " has no report yet");
  std::ifstream in(sh->ws->ws.dir() / rel);
  if (!in) fail(ErrorCode::kNotFound, "report file missing: " + rel);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, rel + ": " + e.what());
  }
}

}  // namespace clime
