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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "clime/cards.hpp"
#include "clime/oracle.hpp"
#include "clime/refiner.hpp"
#include "clime/salience.hpp"
#include "clime/stats.hpp"
#include "clime/text_classifier.hpp"
#include "clime/workspace.hpp"

namespace clime {

struct ExperimentConfig {
  std::size_t seeds = 10;
  TrainConfig train;  // train.seed seeds the ranking/sampling model
  RefineConfig refine;
  std::size_t neighbors = 5;
  std::size_t active_docs = 50;
  std::size_t clime_keywords = 50;
  std::size_t combined_docs = 25;
  std::size_t combined_keywords = 25;
  std::vector<std::size_t> curve{0, 10, 20, 30, 40, 50};
  // Retraining jobs run on this many threads; results do not depend on it.
  std::size_t jobs = 1;

  std::vector<std::uint64_t> seed_list() const;
  nlohmann::json to_json() const;
};

struct ConditionResult {
  std::string name;
  std::vector<double> accuracies;  // one per seed
  double mean = 0.0;
  double delta_vs_base = 0.0;
};

struct NamedTTest {
  std::string comparison;  // "<samples> vs <reference mean>"
  TTestResult result;
};

struct CurvePoint {
  std::size_t keywords = 0;
  std::vector<double> accuracies;
  double mean = 0.0;
};

struct EvalReport {
  std::vector<std::uint64_t> seeds;
  std::vector<ConditionResult> conditions;
  std::vector<NamedTTest> ttests;
  std::vector<CurvePoint> curve;
  nlohmann::json details = nlohmann::json::object();
  nlohmann::json timing = nlohmann::json::object();

  const ConditionResult& condition(const std::string& name) const;
  nlohmann::json to_json() const;
  // Summary rows: condition, mean, delta, per-seed accuracies.
  std::string summary_tsv() const;
};

// Read-only inputs of an experiment.
struct TaskData {
  const Vocabulary* vocab = nullptr;
  const Matrix* original = nullptr;
  std::vector<std::string> langs;  // {source, target}
  std::span<const Document> train;
  std::span<const Document> test;
  std::span<const Document> pool;
  const std::map<std::string, int>* pool_truth = nullptr;
  const OracleLexicon* lexicon = nullptr;

  static TaskData from(const Workspace& ws);
};

// Train one model per seed on `train` over `embeddings`; test accuracy each.
std::vector<double> retrain_accuracies(std::span<const Document> train,
                                       std::span<const Document> test, const Matrix& embeddings,
                                       const TrainConfig& base, std::span<const std::uint64_t> seeds,
                                       std::size_t jobs = 1);

double mean(std::span<const double> xs);

// Ranked cards for the top-s salient source words, as shown to an annotator.
std::vector<NeighborCard> keyword_cards(const ClassifierParams& params, const TaskData& task,
                                        const Matrix& embeddings, std::size_t s, std::size_t k);

// Oracle marks over `cards`, one entry per card (ranking order).
FeedbackSet oracle_session(std::span<const NeighborCard> cards, const OracleLexicon& lexicon);

// Base / Active / CLIME / A+C, each retrained over every seed.
EvalReport run_conditions(const TaskData& task, const ExperimentConfig& config);

// Mean accuracy after refining the original matrix with the top-s keywords'
// feedback, for each s. s = 0 trains on the original matrix.
std::vector<CurvePoint> keyword_curve(const TaskData& task, const FeedbackSet& feedback,
                                      std::span<const std::size_t> s_values,
                                      const ExperimentConfig& config);

struct MarkShift {
  WordId word;
  Mark mark;
  double before;
  double after;
  double delta;
  bool satisfied;  // positives moved closer, negatives moved away
};

struct KeywordShift {
  WordId keyword;
  std::vector<std::vector<Neighbor>> before;  // per language
  std::vector<std::vector<Neighbor>> after;
  std::vector<MarkShift> marks;
};

std::vector<KeywordShift> neighbor_shift_report(const Vocabulary& vocab, const Matrix& before,
                                                const Matrix& after, const FeedbackSet& feedback,
                                                const std::vector<std::string>& langs,
                                                std::size_t k = 5);
nlohmann::json shift_report_to_json(const std::vector<KeywordShift>& report,
                                    const Vocabulary& vocab);

}  // namespace clime
