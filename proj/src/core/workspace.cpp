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

#include "clime/workspace.hpp"

#include <fstream>

namespace clime {

using json = nlohmann::json;
namespace fs = std::filesystem;

json WorkspaceManifest::to_json() const {
  return {{"version", version},
          {"src_lang", src_lang},
          {"tgt_lang", tgt_lang},
          {"embeddings", {{"src", src_emb}, {"tgt", tgt_emb}}},
          {"corpora", {{"train", train}, {"test", test}, {"unlabeled", unlabeled}}},
          {"pool_truth", pool_truth},
          {"lexicon", lexicon},
          {"params", params},
          {"current", current},
          {"round", round},
          {"seed", seed},
          {"config", config}};
}

WorkspaceManifest WorkspaceManifest::from_json(const json& j) {
  WorkspaceManifest m;
  try {
    if (!j.contains("version")) fail(ErrorCode::kFormat, "manifest: missing version");
    m.version = j.at("version").get<int>();
    if (m.version != kManifestVersion)
      fail(ErrorCode::kFormat, "manifest: unsupported version " + std::to_string(m.version));
    m.src_lang = j.at("src_lang").get<std::string>();
    m.tgt_lang = j.at("tgt_lang").get<std::string>();
    m.src_emb = j.at("embeddings").at("src").get<std::string>();
    m.tgt_emb = j.at("embeddings").at("tgt").get<std::string>();
    const auto& corpora = j.at("corpora");
    m.train = corpora.at("train").get<std::string>();
    m.test = corpora.value("test", "");
    m.unlabeled = corpora.value("unlabeled", "");
    m.pool_truth = j.value("pool_truth", "");
    m.lexicon = j.value("lexicon", "");
    m.params = j.value("params", "");
    m.current = j.value("current", "");
    m.round = j.value("round", 1);
    m.seed = j.value("seed", std::uint64_t{0});
    m.config = j.value("config", json::object());
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("manifest: ") + e.what());
  }
  return m;
}

json train_config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"seed", c.seed},
          {"widths", c.widths},
          {"filters_per_width", c.filters_per_width},
          {"batch_size", c.batch_size},
          {"step_size", c.adam.step_size}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.widths = j.value("widths", c.widths);
  c.filters_per_width = j.value("filters_per_width", c.filters_per_width);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.adam.step_size = j.value("step_size", c.adam.step_size);
  return c;
}

json refine_config_to_json(const RefineConfig& c) {
  return {{"lambda", c.lambda}, {"steps", c.steps}, {"step_size", c.adam.step_size}};
}

RefineConfig refine_config_from_json(const json& j, RefineConfig c) {
  c.lambda = j.value("lambda", c.lambda);
  c.steps = j.value("steps", c.steps);
  c.adam.step_size = j.value("step_size", c.adam.step_size);
  return c;
}

Workspace Workspace::open(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::kNotFound, "no workspace manifest at " + manifest_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, manifest_path.string() + ": " + e.what());
  }

  Workspace ws;
  ws.dir_ = dir;
  ws.manifest_ = WorkspaceManifest::from_json(j);
  const auto& m = ws.manifest_;
  auto require = [&](const std::string& rel, const char* what) {
    if (rel.empty()) fail(ErrorCode::kFormat, std::string("manifest: missing ") + what);
    if (!fs::exists(ws.resolve(rel)))
      fail(ErrorCode::kNotFound, std::string("manifest: ") + what + " not found: " + rel);
  };
  auto optional_file = [&](const std::string& rel, const char* what) {
    if (!rel.empty()) require(rel, what);
    return !rel.empty();
  };
  require(m.src_emb, "source embeddings");
  require(m.tgt_emb, "target embeddings");
  require(m.train, "training corpus");

  ws.space_ = load_space(ws.resolve(m.src_emb).string(), m.src_lang,
                         ws.resolve(m.tgt_emb).string(), m.tgt_lang);
  const auto& vocab = ws.space_.vocab();
  ws.train_ = read_corpus_file(ws.resolve(m.train).string(), vocab);
  if (optional_file(m.test, "test corpus"))
    ws.test_ = read_corpus_file(ws.resolve(m.test).string(), vocab);
  if (optional_file(m.unlabeled, "unlabeled corpus"))
    ws.pool_ = read_corpus_file(ws.resolve(m.unlabeled).string(), vocab);
  if (optional_file(m.pool_truth, "pool labels"))
    ws.truth_ = read_truth_file(ws.resolve(m.pool_truth).string());
  if (optional_file(m.lexicon, "lexicon"))
    ws.lexicon_ = read_lexicon_file(ws.resolve(m.lexicon).string(), vocab);
  if (optional_file(m.params, "classifier params")) {
    ws.params_ = load_params(ws.resolve(m.params).string());
    if (ws.params_->dim() != ws.space_.dim())
      fail(ErrorCode::kFormat, "classifier dim does not match embeddings");
  }
  if (optional_file(m.current, "current embeddings"))
    ws.space_.install_current(read_matrix(ws.resolve(m.current).string()));
  return ws;
}

Workspace Workspace::create(const fs::path& dir, const WorkspaceManifest& manifest) {
  fs::create_directories(dir);
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write manifest in " + dir.string());
  out << manifest.to_json().dump(2) << '\n';
  out.close();
  return open(dir);
}

TrainConfig Workspace::train_config() const {
  TrainConfig c;
  c.seed = manifest_.seed;
  if (manifest_.config.contains("train")) c = train_config_from_json(manifest_.config["train"], c);
  return c;
}

RefineConfig Workspace::refine_config() const {
  if (manifest_.config.contains("refine"))
    return refine_config_from_json(manifest_.config["refine"]);
  return {};
}

void Workspace::save_manifest() const {
  const fs::path tmp = dir_ / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write manifest in " + dir_.string());
    out << manifest_.to_json().dump(2) << '\n';
    if (!out) fail(ErrorCode::kIo, "manifest write failed");
  }
  fs::rename(tmp, dir_ / "manifest.json");
}

void Workspace::set_params(const ClassifierParams& params, const TrainConfig& config) {
  if (params.dim() != space_.dim())
    fail(ErrorCode::kInvalidArgument, "classifier dim does not match embeddings");
  const std::string rel = manifest_.params.empty() ? "model.json" : manifest_.params;
  save_params(params, config, resolve(rel).string());
  manifest_.params = rel;
  manifest_.config["train"] = train_config_to_json(config);
  params_ = params;
  save_manifest();
}

void Workspace::install_current(Matrix next) {
  fs::create_directories(dir_ / "state");
  const std::string rel = "state/current-r" + std::to_string(manifest_.round) + ".bin";
  write_matrix(next, resolve(rel).string());
  space_.install_current(std::move(next));
  manifest_.current = rel;
  ++manifest_.round;
  save_manifest();
}

}  // namespace clime
