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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clime/corpus.hpp"
#include "clime/embed_store.hpp"
#include "clime/oracle.hpp"
#include "clime/refiner.hpp"
#include "clime/text_classifier.hpp"

namespace clime {

inline constexpr int kManifestVersion = 1;

// On-disk description of a workspace. Paths are relative to the workspace
// directory; empty means absent.
struct WorkspaceManifest {
  int version = kManifestVersion;
  std::string src_lang;
  std::string tgt_lang;
  std::string src_emb;
  std::string tgt_emb;
  std::string train;
  std::string test;
  std::string unlabeled;
  std::string pool_truth;
  std::string lexicon;
  std::string params;
  std::string current;
  int round = 1;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();

  nlohmann::json to_json() const;
  static WorkspaceManifest from_json(const nlohmann::json& j);
};

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
nlohmann::json train_config_to_json(const TrainConfig& c);
RefineConfig refine_config_from_json(const nlohmann::json& j, RefineConfig base = {});
nlohmann::json refine_config_to_json(const RefineConfig& c);

// Everything a session or experiment needs, loaded into memory.
class Workspace {
 public:
  static Workspace open(const std::filesystem::path& dir);
  // Writes `manifest` into `dir` and opens it.
  static Workspace create(const std::filesystem::path& dir, const WorkspaceManifest& manifest);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  const WorkspaceManifest& manifest() const noexcept { return manifest_; }

  EmbeddingSpace& space() noexcept { return space_; }
  const EmbeddingSpace& space() const noexcept { return space_; }
  std::vector<std::string> langs() const { return {manifest_.src_lang, manifest_.tgt_lang}; }

  const std::vector<Document>& train_docs() const noexcept { return train_; }
  const std::vector<Document>& test_docs() const noexcept { return test_; }
  const std::vector<Document>& pool_docs() const noexcept { return pool_; }
  const std::optional<OracleLexicon>& lexicon() const noexcept { return lexicon_; }
  const std::map<std::string, int>& pool_truth() const noexcept { return truth_; }
  const std::optional<ClassifierParams>& params() const noexcept { return params_; }

  TrainConfig train_config() const;
  RefineConfig refine_config() const;

  // Persist a trained model as the workspace classifier. `config` becomes the
  // workspace training config.
  void set_params(const ClassifierParams& params, const TrainConfig& config);
  // Persist a new working matrix (exact binary snapshot) and bump the round.
  void install_current(Matrix next);

  std::filesystem::path sessions_dir() const { return dir_ / "sessions"; }
  std::filesystem::path reports_dir() const { return dir_ / "reports"; }

  void save_manifest() const;

 private:
  std::filesystem::path resolve(const std::string& rel) const { return dir_ / rel; }

  std::filesystem::path dir_;
  WorkspaceManifest manifest_;
  EmbeddingSpace space_;
  std::vector<Document> train_;
  std::vector<Document> test_;
  std::vector<Document> pool_;
  std::optional<OracleLexicon> lexicon_;
  std::map<std::string, int> truth_;
  std::optional<ClassifierParams> params_;
};

}  // namespace clime
