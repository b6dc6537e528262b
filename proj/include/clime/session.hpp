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
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "clime/cards.hpp"
#include "clime/experiment.hpp"
#include "clime/refiner.hpp"
#include "clime/workspace.hpp"

namespace clime {

enum class SessionState { kOpen, kFinalizing, kClosed };

std::string_view to_string(SessionState s);

struct AddedWord {
  std::size_t card = 0;
  WordId word = 0;

  friend bool operator==(const AddedWord&, const AddedWord&) = default;
};

// One line of a session's append-only log.
struct SessionEvent {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  std::string session;
  std::string kind;  // create|mark|unmark|add_word|finalize|refine_done|retrain_done
  nlohmann::json payload;

  nlohmann::json to_json() const;
  static SessionEvent from_json(const nlohmann::json& j);
};

// Annotation state. Mutated only by apply(), so a replayed log and a live
// session are the same object.
struct Session {
  std::string id;
  int round = 1;
  std::size_t s = 0;
  std::size_t k = 0;
  std::vector<NeighborCard> cards;
  std::vector<std::map<WordId, Mark>> marks;  // per card: accept/reject only
  std::vector<AddedWord> added;
  SessionState state = SessionState::kOpen;
  std::optional<std::uint64_t> refined_fingerprint;
  std::string report_file;

  std::optional<std::size_t> card_of(WordId keyword) const;
  FeedbackSet feedback() const;
  std::size_t mark_count() const;

  void apply(const SessionEvent& event);

  friend bool operator==(const Session&, const Session&) = default;
};

Session replay(std::span<const SessionEvent> events);
std::vector<SessionEvent> read_event_log(const std::filesystem::path& path);

struct FinalizeOptions {
  RefineConfig refine;
  std::size_t seeds = 10;
};

struct JobStatus {
  std::string id;
  std::string session;
  std::string state;  // queued|running|done|failed
  std::string error;
  nlohmann::json result;
};

// Owns open workspaces and their sessions. Every mutation is validated,
// written to the session log, then applied. Thread-safe.
class SessionService {
 public:
  SessionService();
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  // Opens (or returns the id of an already open) workspace directory and
  // reloads its persisted sessions.
  std::string open_workspace(const std::filesystem::path& dir);
  std::vector<std::string> workspace_ids() const;
  nlohmann::json workspace_info(const std::string& workspace_id) const;

  std::string create_session(const std::string& workspace_id, std::size_t s, std::size_t k);
  // Rebuilds a session from another log's create/mark/unmark/add_word events
  // as a new open session of `workspace_id`.
  std::string import_session(const std::string& workspace_id,
                             std::span<const SessionEvent> events);

  Session session(const std::string& session_id) const;
  std::vector<std::string> session_ids(const std::string& workspace_id) const;
  std::vector<SessionEvent> events(const std::string& session_id) const;
  std::filesystem::path log_path(const std::string& session_id) const;
  nlohmann::json session_json(const std::string& session_id) const;
  nlohmann::json card_json(const std::string& session_id, std::size_t index) const;
  nlohmann::json feedback_json(const std::string& session_id) const;

  // `keyword` is the source-language surface of a card's keyword.
  nlohmann::json submit_mark(const std::string& session_id, const std::string& keyword,
                             const std::string& word, const std::string& lang, Mark mark);
  nlohmann::json add_word(const std::string& session_id, const std::string& keyword,
                          const std::string& surface, const std::string& lang, Mark mark);

  // Raw texts of training/unlabeled documents containing the word, by doc id.
  std::vector<nlohmann::json> concordance(const std::string& workspace_id,
                                          const std::string& word, const std::string& lang,
                                          std::size_t limit = 10) const;

  // Marks every card of the session with the workspace's oracle lexicon.
  void oracle_annotate(const std::string& session_id);

  // Refine, install, retrain over seeds, report. Synchronous.
  EvalReport finalize(const std::string& session_id, const FinalizeOptions& options = {});
  std::string finalize_async(const std::string& session_id, const FinalizeOptions& options = {});
  JobStatus job(const std::string& job_id) const;
  void wait_for_jobs();

  nlohmann::json report(const std::string& session_id) const;

  // Read access to a workspace under its shared lock.
  template <typename Fn>
  auto with_workspace(const std::string& workspace_id, Fn&& fn) const {
    auto ws = find_workspace(workspace_id);
    std::shared_lock lock(ws->mu);
    return fn(static_cast<const Workspace&>(ws->ws));
  }

 private:
  struct WorkspaceHandle {
    std::string id;
    Workspace ws;
    mutable std::shared_mutex mu;
  };
  struct SessionHandle;
  struct JobHandle;

  std::shared_ptr<WorkspaceHandle> find_workspace(const std::string& id) const;
  std::shared_ptr<SessionHandle> find_session(const std::string& id) const;
  std::shared_ptr<SessionHandle> register_session(const std::shared_ptr<WorkspaceHandle>& ws,
                                                  const std::string& local_id);
  void record(SessionHandle& sh, const std::string& kind, nlohmann::json payload);
  std::string next_local_id(WorkspaceHandle& ws);
  nlohmann::json card_json_locked(const SessionHandle& sh, std::size_t index) const;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<WorkspaceHandle>> workspaces_;
  std::map<std::string, std::shared_ptr<SessionHandle>> sessions_;
  std::map<std::string, std::shared_ptr<JobHandle>> jobs_;
  std::vector<std::thread> workers_;
  std::size_t next_job_ = 1;
};

}  // namespace clime
