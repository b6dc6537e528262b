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

#include "clime/clime.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "clime/active_sampler.hpp"
#include "clime/experiment.hpp"
#include "clime/http_server.hpp"
#include "clime/salience.hpp"
#include "clime/session.hpp"
#include "clime/stats.hpp"
#include "clime/synth.hpp"
#include "clime/workspace.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

struct clime_workspace {
  clime::Workspace ws;
};

struct clime_service {
  clime::SessionService svc;
};

struct clime_server {
  std::unique_ptr<clime::HttpServer> server;
};

namespace {

thread_local std::string last_error;

clime_status status_of(clime::ErrorCode code) {
  switch (code) {
    case clime::ErrorCode::kInvalidArgument: return CLIME_E_INVALID_ARGUMENT;
    case clime::ErrorCode::kNotFound: return CLIME_E_NOT_FOUND;
    case clime::ErrorCode::kConflict: return CLIME_E_CONFLICT;
    case clime::ErrorCode::kFormat: return CLIME_E_FORMAT;
    case clime::ErrorCode::kIo: return CLIME_E_IO;
    case clime::ErrorCode::kNumeric: return CLIME_E_NUMERIC;
    case clime::ErrorCode::kInternal: return CLIME_E_INTERNAL;
  }
  return CLIME_E_INTERNAL;
}

template <typename Fn>
clime_status guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return CLIME_OK;
  } catch (const clime::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    last_error = e.what();
    return CLIME_E_FORMAT;
  } catch (const fs::filesystem_error& e) {
    last_error = e.what();
    return CLIME_E_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CLIME_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CLIME_E_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (!p) clime::fail(clime::ErrorCode::kInvalidArgument, std::string(name) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

json parse_optional(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    clime::fail(clime::ErrorCode::kInvalidArgument, std::string(what) + " must be a JSON object");
  return j;
}

clime::FinalizeOptions finalize_options(const json& j, const clime::Workspace& ws) {
  clime::FinalizeOptions o;
  o.refine = clime::refine_config_from_json(j, ws.refine_config());
  o.seeds = j.value("seeds", o.seeds);
  if (o.refine.steps < 1) clime::fail(clime::ErrorCode::kInvalidArgument, "steps must be >= 1");
  return o;
}

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

extern "C" {

const char* clime_version(void) { return "0.1.0"; }

const char* clime_status_name(clime_status status) {
  switch (status) {
    case CLIME_OK: return "ok";
    case CLIME_E_INVALID_ARGUMENT: return "invalid_argument";
    case CLIME_E_NOT_FOUND: return "not_found";
    case CLIME_E_CONFLICT: return "conflict";
    case CLIME_E_FORMAT: return "format";
    case CLIME_E_IO: return "io";
    case CLIME_E_NUMERIC: return "numeric";
    case CLIME_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* clime_last_error(void) { return last_error.c_str(); }

void clime_string_free(char* s) { std::free(s); }

clime_status clime_synth(const char* spec_json, const char* out_dir, char** manifest_json) {
  return guard([&] {
    require(out_dir, "out_dir");
    const auto spec = clime::SyntheticTaskSpec::from_json(parse_optional(spec_json, "spec"));
    clime::write_task(clime::generate_task(spec), out_dir);
    std::ifstream in(fs::path(out_dir) / "manifest.json");
    std::stringstream buf;
    buf << in.rdbuf();
    put(manifest_json, buf.str());
  });
}

clime_status clime_workspace_open(const char* dir, clime_workspace** out) {
  return guard([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new clime_workspace{clime::Workspace::open(dir)};
  });
}

clime_status clime_workspace_create(const char* dir, const char* manifest_json,
                                    clime_workspace** out) {
  return guard([&] {
    require(dir, "dir");
    require(out, "out");
    const auto m = clime::WorkspaceManifest::from_json(parse_optional(manifest_json, "manifest"));
    *out = new clime_workspace{clime::Workspace::create(dir, m)};
  });
}

void clime_workspace_free(clime_workspace* ws) { delete ws; }

clime_status clime_workspace_info(const clime_workspace* ws, char** info_json) {
  return guard([&] {
    require(ws, "workspace");
    const auto& w = ws->ws;
    json info = w.manifest().to_json();
    info["dir"] = w.dir().string();
    info["vocab_size"] = w.space().size();
    info["dim"] = w.space().dim();
    info["trained"] = w.params().has_value();
    info["documents"] = {{"train", w.train_docs().size()},
                         {"test", w.test_docs().size()},
                         {"unlabeled", w.pool_docs().size()}};
    put(info_json, info.dump(2));
  });
}

clime_status clime_train(clime_workspace* ws, const char* config_json, char** result_json) {
  return guard([&] {
    require(ws, "workspace");
    auto& w = ws->ws;
    const auto cfg =
        clime::train_config_from_json(parse_optional(config_json, "config"), w.train_config());
    const auto& e = w.space().current();
    auto params = clime::train_model(w.train_docs(), e, cfg);
    json result = {{"config", clime::train_config_to_json(cfg)},
                   {"train_accuracy", clime::evaluate(params, w.train_docs(), e)}};
    if (!w.test_docs().empty()) result["test_accuracy"] = clime::evaluate(params, w.test_docs(), e);
    w.set_params(params, cfg);
    result["params"] = (w.dir() / w.manifest().params).string();
    put(result_json, result.dump(2));
  });
}

clime_status clime_rank(const clime_workspace* ws, size_t top, char** tsv) {
  return guard([&] {
    require(ws, "workspace");
    const auto& w = ws->ws;
    if (top == 0) clime::fail(clime::ErrorCode::kInvalidArgument, "top must be at least 1");
    if (!w.params()) clime::fail(clime::ErrorCode::kInvalidArgument, "workspace has no trained classifier");
    const auto table = clime::global_salience(*w.params(), w.train_docs(), w.space().current());
    const auto ranking =
        clime::select_keywords(table, w.space().vocab(), top, w.manifest().src_lang);
    std::ostringstream out;
    for (std::size_t i = 0; i < ranking.words.size(); ++i) {
      const auto& rw = ranking.words[i];
      out << (i + 1) << '\t' << w.space().vocab().at(rw.id).surface << '\t'
          << format("%.9g", rw.score) << '\t' << table.doc_freq.at(rw.id) << '\n';
    }
    put(tsv, out.str());
  });
}

clime_status clime_refine(clime_workspace* ws, const char* feedback_path, double lambda,
                          int steps, const char* out_path, int install, char** result_json) {
  return guard([&] {
    require(ws, "workspace");
    require(feedback_path, "feedback_path");
    if (steps < 1) clime::fail(clime::ErrorCode::kInvalidArgument, "steps must be >= 1");
    auto& w = ws->ws;
    const auto fb = clime::read_feedback_file(feedback_path, w.space().vocab());
    clime::RefineConfig cfg = w.refine_config();
    cfg.lambda = lambda;
    cfg.steps = steps;
    auto r = clime::refine(w.space().current(), w.space().original(), fb, cfg);

    double max_disp = 0.0;
    for (auto row : fb.touched_rows()) {
      double d = 0.0;
      for (std::size_t j = 0; j < r.embeddings.cols(); ++j) {
        const double diff = r.embeddings(row, j) - w.space().current()(row, j);
        d += diff * diff;
      }
      max_disp = std::max(max_disp, std::sqrt(d));
    }
    json result = {{"keywords", fb.keywords.size()},
                   {"marks", fb.size()},
                   {"rows_touched", fb.touched_rows().size()},
                   {"lambda", lambda},
                   {"steps", steps},
                   {"initial_cost", r.trace.front()},
                   {"final_cost", r.trace.back()},
                   {"max_displacement", max_disp},
                   {"fingerprint", clime::fingerprint(r.embeddings)}};

    if (out_path && *out_path) {
      const fs::path out(out_path);
      const bool single = out.extension() == ".vec";
      auto target = [&](const std::string& name, const std::string& ext) {
        return single ? out.parent_path() / (out.stem().string() + "." + name + ext)
                      : out / (name + ext);
      };
      if (single) {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
      } else {
        fs::create_directories(out);
      }
      clime::EmbeddingSpace view = w.space();
      view.install_current(r.embeddings);
      json files = json::object();
      for (const auto& lang : w.langs()) {
        const fs::path p = target(lang, ".vec");
        std::ofstream f(p, std::ios::trunc);
        if (!f) clime::fail(clime::ErrorCode::kIo, "cannot write " + p.string());
        clime::save_embeddings(view, clime::Which::kCurrent, f, lang);
        files[lang] = p.string();
      }
      const fs::path trace_path = single ? target("trace", ".tsv") : out / "trace.tsv";
      std::ofstream trace(trace_path, std::ios::trunc);
      if (!trace) clime::fail(clime::ErrorCode::kIo, "cannot write " + trace_path.string());
      trace << "step\tcost\n";
      for (std::size_t i = 0; i < r.trace.size(); ++i)
        trace << i << '\t' << format("%.12g", r.trace[i]) << '\n';
      files["trace"] = trace_path.string();
      result["files"] = files;
    }
    if (install) {
      w.install_current(std::move(r.embeddings));
      result["installed_round"] = w.manifest().round;
    }
    put(result_json, result.dump(2));
  });
}

clime_status clime_active(const clime_workspace* ws, const char* pool_path, size_t n,
                          char** selection_json) {
  return guard([&] {
    require(ws, "workspace");
    const auto& w = ws->ws;
    if (!w.params()) clime::fail(clime::ErrorCode::kInvalidArgument, "workspace has no trained classifier");
    std::vector<clime::Document> own;
    if (pool_path) own = clime::read_corpus_file(pool_path, w.space().vocab());
    const auto& pool = pool_path ? own : w.pool_docs();
    if (pool.empty()) clime::fail(clime::ErrorCode::kInvalidArgument, "unlabeled pool is empty");
    const auto& e = w.space().current();
    const auto picked = clime::uncertainty_sample(*w.params(), pool, n, e);
    std::map<std::string, const clime::Document*> by_id;
    for (const auto& d : pool) by_id[d.id] = &d;
    json out = json::array();
    for (std::size_t i = 0; i < picked.size(); ++i) {
      const auto& doc = *by_id.at(picked[i]);
      const auto p = clime::predict_proba(*w.params(), doc.tokens, e);
      out.push_back({{"rank", i + 1},
                     {"id", doc.id},
                     {"lang", doc.lang},
                     {"text", doc.text},
                     {"entropy", clime::entropy(p)},
                     {"p1", p[1]}});
    }
    put(selection_json, out.dump());
  });
}

clime_status clime_eval(const clime_workspace* ws, const char* config_json, char** report_json,
                        char** summary_tsv) {
  return guard([&] {
    require(ws, "workspace");
    const auto& w = ws->ws;
    const json j = parse_optional(config_json, "config");
    clime::ExperimentConfig cfg;
    cfg.train = clime::train_config_from_json(j.value("train", json::object()), w.train_config());
    if (j.contains("seed")) cfg.train.seed = j.at("seed").get<std::uint64_t>();
    cfg.refine = clime::refine_config_from_json(j.value("refine", json::object()), w.refine_config());
    cfg.seeds = j.value("seeds", cfg.seeds);
    cfg.neighbors = j.value("neighbors", cfg.neighbors);
    cfg.active_docs = j.value("active_docs", cfg.active_docs);
    cfg.clime_keywords = j.value("clime_keywords", cfg.clime_keywords);
    cfg.combined_docs = j.value("combined_docs", cfg.combined_docs);
    cfg.combined_keywords = j.value("combined_keywords", cfg.combined_keywords);
    cfg.curve = j.value("curve", cfg.curve);
    cfg.jobs = j.value("jobs", cfg.jobs);
    if (cfg.seeds == 0) clime::fail(clime::ErrorCode::kInvalidArgument, "seeds must be at least 1");
    const auto report = clime::run_conditions(clime::TaskData::from(w), cfg);
    put(report_json, report.to_json().dump(2));
    put(summary_tsv, report.summary_tsv());
  });
}

clime_status clime_shift_report(const clime_workspace* ws, const char* feedback_path, size_t k,
                                char** report_json) {
  return guard([&] {
    require(ws, "workspace");
    require(feedback_path, "feedback_path");
    const auto& w = ws->ws;
    const auto fb = clime::read_feedback_file(feedback_path, w.space().vocab());
    const auto report = clime::neighbor_shift_report(
        w.space().vocab(), w.space().original(), w.space().current(), fb, w.langs(), k);
    put(report_json, clime::shift_report_to_json(report, w.space().vocab()).dump(2));
  });
}

clime_status clime_ttest(const double* samples, size_t n, double mu0, char** result_json) {
  return guard([&] {
    if (n > 0) require(samples, "samples");
    const auto r = clime::single_sample_ttest(std::span<const double>(samples, n), mu0);
    put(result_json, json{{"t", r.t}, {"df", r.df}, {"p", r.p}}.dump());
  });
}

clime_status clime_service_new(clime_service** out) {
  return guard([&] {
    require(out, "out");
    *out = new clime_service;
  });
}

void clime_service_free(clime_service* svc) { delete svc; }

clime_status clime_service_open(clime_service* svc, const char* dir, char** workspace_id) {
  return guard([&] {
    require(svc, "service");
    require(dir, "dir");
    put(workspace_id, svc->svc.open_workspace(dir));
  });
}

clime_status clime_service_workspace(clime_service* svc, const char* workspace_id,
                                     char** info_json) {
  return guard([&] {
    require(svc, "service");
    require(workspace_id, "workspace_id");
    put(info_json, svc->svc.workspace_info(workspace_id).dump(2));
  });
}

clime_status clime_session_create(clime_service* svc, const char* workspace_id, size_t s,
                                  size_t k, char** session_id) {
  return guard([&] {
    require(svc, "service");
    require(workspace_id, "workspace_id");
    put(session_id, svc->svc.create_session(workspace_id, s, k));
  });
}

clime_status clime_session_import(clime_service* svc, const char* workspace_id,
                                  const char* log_path, char** session_id) {
  return guard([&] {
    require(svc, "service");
    require(workspace_id, "workspace_id");
    require(log_path, "log_path");
    const auto events = clime::read_event_log(log_path);
    put(session_id, svc->svc.import_session(workspace_id, events));
  });
}

clime_status clime_session_json(clime_service* svc, const char* session_id, char** out) {
  return guard([&] {
    require(svc, "service");
    require(session_id, "session_id");
    put(out, svc->svc.session_json(session_id).dump(2));
  });
}

clime_status clime_session_card(clime_service* svc, const char* session_id, size_t index,
                                char** out) {
  return guard([&] {
    require(svc, "service");
    require(session_id, "session_id");
    put(out, svc->svc.card_json(session_id, index).dump(2));
  });
}

clime_status clime_session_feedback(clime_service* svc, const char* session_id, char** out) {
  return guard([&] {
    require(svc, "service");
    require(session_id, "session_id");
    put(out, svc->svc.feedback_json(session_id).dump(2));
  });
}

clime_status clime_session_log_path(clime_service* svc, const char* session_id, char** path) {
  return guard([&] {
    require(svc, "service");
    require(session_id, "session_id");
    put(path, svc->svc.log_path(session_id).string());
  });
}

clime_status clime_session_mark(clime_service* svc, const char* session_id, const char* keyword,
                                const char* word, const char* lang, const char* mark) {
  return guard([&] {
    require(svc, "service");
    require(session_id, "session_id");
    require(keyword, "keyword");
    require(word, "word");
    require(lang, "lang");
    require(mark, "mark");
    svc->svc.submit_mark(session_id, keyword, word, lang, clime::parse_mark(mark));
  });
}

clime_status clime_session_add_word(clime_service* svc, const char* session_id,
                                    const char* keyword, const char* surface, const char* lang,
                                    const char* mark) {
  return guard([&] {
    require(svc, "service");
    require(session_id, "session_id");
    require(keyword, "keyword");
    require(surface, "surface");
    require(lang, "lang");
    svc->svc.add_word(session_id, keyword, surface, lang,
                      mark ? clime::parse_mark(mark) : clime::Mark::kClear);
  });
}

clime_status clime_session_oracle(clime_service* svc, const char* session_id) {
  return guard([&] {
    require(svc, "service");
    require(session_id, "session_id");
    svc->svc.oracle_annotate(session_id);
  });
}

clime_status clime_session_finalize(clime_service* svc, const char* session_id,
                                    const char* options_json, char** report_json) {
  return guard([&] {
    require(svc, "service");
    require(session_id, "session_id");
    const json j = parse_optional(options_json, "options");
    const std::string ws_id = svc->svc.session_json(session_id).at("workspace");
    const auto opts = svc->svc.with_workspace(
        ws_id, [&](const clime::Workspace& w) { return finalize_options(j, w); });
    put(report_json, svc->svc.finalize(session_id, opts).to_json().dump(2));
  });
}

clime_status clime_session_report(clime_service* svc, const char* session_id, char** out) {
  return guard([&] {
    require(svc, "service");
    require(session_id, "session_id");
    put(out, svc->svc.report(session_id).dump(2));
  });
}

clime_status clime_server_start(clime_service* svc, const char* host, int port,
                                const char* options_json, clime_server** out, int* bound_port) {
  return guard([&] {
    require(svc, "service");
    require(out, "out");
    const json j = parse_optional(options_json, "options");
    clime::FinalizeOptions opts;
    opts.refine = clime::refine_config_from_json(j, opts.refine);
    opts.seeds = j.value("seeds", opts.seeds);
    auto server = std::make_unique<clime_server>();
    server->server = std::make_unique<clime::HttpServer>(svc->svc, opts);
    const int p = server->server->start(host ? host : "127.0.0.1", port);
    if (bound_port) *bound_port = p;
    *out = server.release();
  });
}

void clime_server_stop(clime_server* server) {
  if (server) server->server->stop();
}

void clime_server_free(clime_server* server) { delete server; }

}  // extern "C"
