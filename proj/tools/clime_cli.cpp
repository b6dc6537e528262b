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

// Command-line front end. Talks to the library only through the C API.

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clime/clime.h"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Thrown for any failed library call; carries the status for the error line.
struct Failure {
  clime_status status;
  std::string message;
};

void check(clime_status st) {
  if (st != CLIME_OK) throw Failure{st, clime_last_error()};
}

[[noreturn]] void precondition(const std::string& message) {
  throw Failure{CLIME_E_INVALID_ARGUMENT, message};
}

// Owns a string returned by the C API.
class Owned {
 public:
  Owned() = default;
  ~Owned() { clime_string_free(p_); }
  Owned(const Owned&) = delete;
  Owned& operator=(const Owned&) = delete;
  char** out() { return &p_; }
  std::string str() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

struct WorkspaceRef {
  std::string dir;
  std::string src_emb, tgt_emb, src_lang = "en", tgt_lang = "xx";
  std::string train, test, unlabeled;
};

void add_workspace_flags(CLI::App* cmd, WorkspaceRef& ref) {
  cmd->add_option("--src-emb", ref.src_emb, "Source-language embeddings (.vec)");
  cmd->add_option("--tgt-emb", ref.tgt_emb, "Target-language embeddings (.vec)");
  cmd->add_option("--src-lang", ref.src_lang, "Source language code")->capture_default_str();
  cmd->add_option("--tgt-lang", ref.tgt_lang, "Target language code")->capture_default_str();
  cmd->add_option("--train", ref.train, "Labeled source-language corpus (.jsonl)");
  cmd->add_option("--test", ref.test, "Labeled target-language corpus (.jsonl)");
  cmd->add_option("--unlabeled", ref.unlabeled, "Unlabeled target-language pool (.jsonl)");
}

std::string absolute(const std::string& p) { return p.empty() ? p : fs::absolute(p).string(); }

// Opens the workspace directory, or creates one there first when embedding
// files are given on the command line.
clime_workspace* open_workspace(const WorkspaceRef& ref) {
  clime_workspace* ws = nullptr;
  if (ref.src_emb.empty() && ref.tgt_emb.empty()) {
    check(clime_workspace_open(ref.dir.c_str(), &ws));
    return ws;
  }
  if (ref.src_emb.empty() || ref.tgt_emb.empty() || ref.train.empty())
    precondition("--src-emb, --tgt-emb and --train must be given together");
  json m = {{"version", 1},
            {"src_lang", ref.src_lang},
            {"tgt_lang", ref.tgt_lang},
            {"embeddings", {{"src", absolute(ref.src_emb)}, {"tgt", absolute(ref.tgt_emb)}}},
            {"corpora",
             {{"train", absolute(ref.train)},
              {"test", absolute(ref.test)},
              {"unlabeled", absolute(ref.unlabeled)}}}};
  check(clime_workspace_create(ref.dir.c_str(), m.dump().c_str(), &ws));
  return ws;
}

struct WorkspaceHandle {
  clime_workspace* ws;
  explicit WorkspaceHandle(const WorkspaceRef& ref) : ws(open_workspace(ref)) {}
  ~WorkspaceHandle() { clime_workspace_free(ws); }
};

struct ServiceHandle {
  clime_service* svc = nullptr;
  std::string workspace;
  explicit ServiceHandle(const std::string& dir) {
    check(clime_service_new(&svc));
    Owned id;
    check(clime_service_open(svc, dir.c_str(), id.out()));
    workspace = id.str();
  }
  ~ServiceHandle() { clime_service_free(svc); }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Failure{CLIME_E_IO, "cannot write " + path};
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string session_id(const ServiceHandle& s, const std::string& id) {
  // Accept both "s0001" and the service-wide "w1-s0001".
  return id.find('-') == std::string::npos ? s.workspace + "-" + id : id;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clime: interactive refinement of cross-lingual word embeddings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", clime_version());

  const char* env_dir = std::getenv("CLIME_DATA_DIR");
  WorkspaceRef ref;
  ref.dir = env_dir && *env_dir ? env_dir : ".";
  app.add_option("-w,--workspace", ref.dir, "Workspace directory (default $CLIME_DATA_DIR or .)");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic bilingual task workspace");
  std::string synth_out, synth_spec;
  std::optional<double> corruption;
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::size_t> synth_dim, words_per_group, train_docs, test_docs, pool_docs;
  synth->add_option("--out", synth_out, "Output directory (default: workspace)");
  synth->add_option("--spec", synth_spec, "JSON file with generator settings");
  synth->add_option("--corruption", corruption, "Fraction of target words misaligned")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--dim", synth_dim, "Embedding dimension");
  synth->add_option("--words-per-group", words_per_group, "Content words per topic");
  synth->add_option("--train-docs", train_docs, "Labeled source documents");
  synth->add_option("--test-docs", test_docs, "Labeled target documents");
  synth->add_option("--pool-docs", pool_docs, "Unlabeled target documents");

  // train
  auto* train = app.add_subcommand("train", "Train the workspace classifier");
  add_workspace_flags(train, ref);
  std::optional<std::uint64_t> train_seed;
  std::optional<int> epochs;
  std::string train_out;
  train->add_option("--seed", train_seed, "Training seed");
  train->add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);
  train->add_option("--out", train_out, "Write the result JSON here");

  // rank
  auto* rank = app.add_subcommand("rank", "Rank source-language keywords by salience");
  add_workspace_flags(rank, ref);
  std::size_t top = 50;
  std::string rank_out;
  rank->add_option("--top", top, "Number of keywords")->capture_default_str()->check(CLI::PositiveNumber);
  rank->add_option("--out", rank_out, "Write the TSV here");

  // session
  auto* session = app.add_subcommand("session", "Run an oracle-annotated session and finalize it");
  add_workspace_flags(session, ref);
  std::size_t keywords = 50, neighbors = 5, seeds = 10;
  double lambda = 1.0;
  int steps = 100;
  std::string replay, session_out;
  bool no_finalize = false;
  session->add_option("-s,--keywords", keywords, "Keyword cards")->capture_default_str()->check(CLI::PositiveNumber);
  session->add_option("-k,--neighbors", neighbors, "Neighbors per language")->capture_default_str()->check(CLI::PositiveNumber);
  session->add_option("--lambda", lambda, "Regularization strength")->capture_default_str()->check(CLI::NonNegativeNumber);
  session->add_option("--steps", steps, "Refinement steps")->capture_default_str()->check(CLI::NonNegativeNumber);
  session->add_option("--seeds", seeds, "Retraining seeds")->capture_default_str()->check(CLI::PositiveNumber);
  session->add_option("--replay", replay, "Rebuild the session from this event log instead of the oracle");
  session->add_flag("--no-finalize", no_finalize, "Stop after annotation");
  session->add_option("--out", session_out, "Write the result JSON here");

  // refine
  auto* refine = app.add_subcommand("refine", "Refine embeddings with a feedback file");
  add_workspace_flags(refine, ref);
  std::string feedback, refine_out;
  bool install = false;
  double refine_lambda = 1.0;
  int refine_steps = 100;
  refine->add_option("--feedback", feedback, "Feedback JSON")->required();
  refine->add_option("--lambda", refine_lambda, "Regularization strength")->capture_default_str()->check(CLI::NonNegativeNumber);
  refine->add_option("--steps", refine_steps, "Adam steps")->capture_default_str()->check(CLI::NonNegativeNumber);
  refine->add_option("--out", refine_out,
                     "refined.vec (writes refined.<lang>.vec per language) or a directory")
      ->required();
  refine->add_flag("--install", install, "Also make the result the workspace's current embeddings");

  // active
  auto* active = app.add_subcommand("active", "Select uncertain unlabeled documents");
  add_workspace_flags(active, ref);
  std::string pool, active_out;
  std::size_t n = 50;
  active->add_option("--pool", pool, "Unlabeled corpus (default: workspace pool)");
  active->add_option("--n", n, "Documents to select")->capture_default_str()->check(CLI::PositiveNumber);
  active->add_option("--out", active_out,
                     "Write the selected documents here as JSON lines (default: TSV to stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Compare Base, Active, CLIME and A+C");
  add_workspace_flags(eval, ref);
  std::optional<std::uint64_t> eval_seed;
  std::size_t eval_seeds = 10, jobs = 1;
  std::vector<std::size_t> curve{0, 10, 20, 30, 40, 50};
  bool no_curve = false;
  std::string eval_out, summary_out;
  eval->add_option("--seed", eval_seed, "Seed of the ranking model; retraining seeds follow it");
  eval->add_option("--seeds", eval_seeds, "Retraining seeds per condition")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--jobs", jobs, "Parallel retraining jobs")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--curve", curve, "Keyword counts for the curve")->delimiter(',');
  eval->add_flag("--no-curve", no_curve, "Skip the keyword curve");
  eval->add_option("--out", eval_out, "Write the JSON report here");
  eval->add_option("--summary", summary_out, "Write the TSV summary here (default: stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve annotation sessions over HTTP");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port, 0 for any free port")->capture_default_str()->check(CLI::Range(0, 65535));

  // report
  auto* report = app.add_subcommand("report", "Show session reports or neighbor movement");
  std::string report_session, report_feedback, report_out;
  std::size_t report_k = 5;
  report->add_option("--session", report_session, "Session id whose report to print");
  report->add_option("--feedback", report_feedback, "Feedback JSON: show neighbor shifts original -> current");
  report->add_option("--k", report_k, "Neighbors per language in shift reports")->capture_default_str()->check(CLI::PositiveNumber);
  report->add_option("--out", report_out, "Write the output here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      json spec = json::object();
      if (!synth_spec.empty()) {
        std::ifstream in(synth_spec);
        if (!in) throw Failure{CLIME_E_NOT_FOUND, "cannot open " + synth_spec};
        spec = json::parse(in, nullptr, false);
        if (spec.is_discarded()) throw Failure{CLIME_E_FORMAT, synth_spec + ": invalid JSON"};
      }
      if (corruption) spec["corruption"] = *corruption;
      if (synth_seed) spec["seed"] = *synth_seed;
      if (synth_dim) spec["dim"] = *synth_dim;
      if (words_per_group) spec["words_per_group"] = *words_per_group;
      if (train_docs) spec["train_docs"] = *train_docs;
      if (test_docs) spec["test_docs"] = *test_docs;
      if (pool_docs) spec["pool_docs"] = *pool_docs;
      const std::string out = synth_out.empty() ? ref.dir : synth_out;
      Owned manifest;
      check(clime_synth(spec.dump().c_str(), out.c_str(), manifest.out()));
      std::cout << "wrote " << (fs::path(out) / "manifest.json").string() << '\n';
    } else if (*train) {
      WorkspaceHandle ws(ref);
      json cfg = json::object();
      if (train_seed) cfg["seed"] = *train_seed;
      if (epochs) cfg["epochs"] = *epochs;
      Owned result;
      check(clime_train(ws.ws, cfg.dump().c_str(), result.out()));
      emit(result.str(), train_out);
    } else if (*rank) {
      WorkspaceHandle ws(ref);
      Owned tsv;
      check(clime_rank(ws.ws, top, tsv.out()));
      emit(tsv.str(), rank_out);
    } else if (*session) {
      { WorkspaceHandle ws(ref); }  // creates the manifest when files are given
      ServiceHandle svc(ref.dir);
      Owned id;
      if (replay.empty()) {
        check(clime_session_create(svc.svc, svc.workspace.c_str(), keywords, neighbors, id.out()));
        check(clime_session_oracle(svc.svc, id.str().c_str()));
      } else {
        check(clime_session_import(svc.svc, svc.workspace.c_str(), replay.c_str(), id.out()));
      }
      Owned state, log;
      check(clime_session_json(svc.svc, id.str().c_str(), state.out()));
      check(clime_session_log_path(svc.svc, id.str().c_str(), log.out()));
      json result = {{"session", json::parse(state.str())}, {"log", log.str()}};
      if (!no_finalize) {
        const json opts = {{"lambda", lambda}, {"steps", steps}, {"seeds", seeds}};
        Owned rep;
        check(clime_session_finalize(svc.svc, id.str().c_str(), opts.dump().c_str(), rep.out()));
        result["report"] = json::parse(rep.str());
      }
      emit(result.dump(2), session_out);
    } else if (*refine) {
      WorkspaceHandle ws(ref);
      Owned result;
      check(clime_refine(ws.ws, feedback.c_str(), refine_lambda, refine_steps, refine_out.c_str(),
                         install ? 1 : 0, result.out()));
      std::cout << result.str() << '\n';
    } else if (*active) {
      WorkspaceHandle ws(ref);
      Owned selection;
      check(clime_active(ws.ws, pool.empty() ? nullptr : pool.c_str(), n, selection.out()));
      std::ostringstream text;
      for (const auto& row : json::parse(selection.str())) {
        if (active_out.empty()) {
          text << row["rank"] << '\t' << row["id"].get<std::string>() << '\t' << row["entropy"]
               << '\t' << row["p1"] << '\n';
        } else {
          json doc = row;
          doc["label"] = nullptr;
          text << doc.dump() << '\n';
        }
      }
      emit(text.str(), active_out);
    } else if (*eval) {
      WorkspaceHandle ws(ref);
      json cfg = {{"seeds", eval_seeds}, {"jobs", jobs}, {"curve", no_curve ? std::vector<std::size_t>{} : curve}};
      if (eval_seed) cfg["seed"] = *eval_seed;
      Owned report_json, summary;
      check(clime_eval(ws.ws, cfg.dump().c_str(), report_json.out(), summary.out()));
      if (!eval_out.empty()) emit(report_json.str(), eval_out);
      emit(summary.str(), summary_out);
    } else if (*serve) {
      // Handle termination signals synchronously on this thread.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);

      clime_service* svc = nullptr;
      check(clime_service_new(&svc));
      std::unique_ptr<clime_service, void (*)(clime_service*)> owner(svc, clime_service_free);
      if (fs::exists(fs::path(ref.dir) / "manifest.json")) {
        Owned id;
        check(clime_service_open(svc, ref.dir.c_str(), id.out()));
        std::cerr << "opened workspace " << id.str() << " at " << ref.dir << '\n';
      }
      clime_server* server = nullptr;
      int bound = 0;
      check(clime_server_start(svc, host.c_str(), port, nullptr, &server, &bound));
      std::cout << "listening on http://" << host << ':' << bound << std::endl;
      int sig = 0;
      sigwait(&signals, &sig);
      clime_server_stop(server);
      clime_server_free(server);
    } else if (*report) {
      if (!report_feedback.empty()) {
        WorkspaceHandle ws(ref);
        Owned out;
        check(clime_shift_report(ws.ws, report_feedback.c_str(), report_k, out.out()));
        emit(out.str(), report_out);
      } else {
        ServiceHandle svc(ref.dir);
        if (!report_session.empty()) {
          Owned out;
          check(clime_session_report(svc.svc, session_id(svc, report_session).c_str(), out.out()));
          emit(out.str(), report_out);
        } else {
          Owned info;
          check(clime_service_workspace(svc.svc, svc.workspace.c_str(), info.out()));
          std::ostringstream tsv;
          tsv << "session\tstate\tround\tkeywords\tmarks\treport\n";
          const json parsed = json::parse(info.str());
          for (const auto& sid : parsed.at("sessions")) {
            Owned s;
            check(clime_session_json(svc.svc, sid.get<std::string>().c_str(), s.out()));
            const json j = json::parse(s.str());
            tsv << j["id"].get<std::string>() << '\t' << j["state"].get<std::string>() << '\t'
                << j["round"] << '\t' << j["cards"] << '\t' << j["marks"] << '\t'
                << (j["report"].is_null() ? "-" : j["report"].get<std::string>()) << '\n';
          }
          emit(tsv.str(), report_out);
        }
      }
    }
  } catch (const Failure& f) {
    std::cerr << json{{"error", {{"code", clime_status_name(f.status)}, {"message", f.message}}}}.dump()
              << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
