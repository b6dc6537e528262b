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

#include "clime/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

#include "clime/active_sampler.hpp"

namespace clime {

using json = nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < seeds; ++i) out.push_back(train.seed + 1 + i);
  return out;
}

json ExperimentConfig::to_json() const {
  return {{"seeds", seeds},
          {"train", train_config_to_json(train)},
          {"refine", refine_config_to_json(refine)},
          {"neighbors", neighbors},
          {"budgets",
           {{"Active", {{"docs", active_docs}, {"keywords", 0}}},
            {"CLIME", {{"docs", 0}, {"keywords", clime_keywords}}},
            {"A+C", {{"docs", combined_docs}, {"keywords", combined_keywords}}}}},
          {"curve", curve}};
}

const ConditionResult& EvalReport::condition(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  fail(ErrorCode::kNotFound, "report has no condition " + name);
}

json EvalReport::to_json() const {
  json conds = json::array();
  for (const auto& c : conditions)
    conds.push_back({{"name", c.name},
                     {"accuracies", c.accuracies},
                     {"mean", c.mean},
                     {"delta_vs_base", c.delta_vs_base}});
  json tests = json::array();
  for (const auto& t : ttests)
    tests.push_back({{"comparison", t.comparison},
                     {"t", t.result.t},
                     {"p", t.result.p},
                     {"df", t.result.df}});
  json points = json::array();
  for (const auto& p : curve)
    points.push_back({{"keywords", p.keywords}, {"accuracies", p.accuracies}, {"mean", p.mean}});
  return {{"seeds", seeds},     {"conditions", conds}, {"ttests", tests},
          {"keyword_curve", points}, {"details", details}, {"timing", timing}};
}

std::string EvalReport::summary_tsv() const {
  std::ostringstream out;
  out << "condition\tmean\tdelta_vs_base\taccuracies\n";
  char buf[64];
  for (const auto& c : conditions) {
    std::snprintf(buf, sizeof(buf), "%.4f\t%+.4f", c.mean, c.delta_vs_base);
    out << c.name << '\t' << buf << '\t';
    for (std::size_t i = 0; i < c.accuracies.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.4f", c.accuracies[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof(buf), "%.4f", p.mean);
    out << "curve@" << p.keywords << '\t' << buf << "\t\t\n";
  }
  return out.str();
}

TaskData TaskData::from(const Workspace& ws) {
  TaskData t;
  t.vocab = &ws.space().vocab();
  t.original = &ws.space().original();
  t.langs = ws.langs();
  t.train = ws.train_docs();
  t.test = ws.test_docs();
  t.pool = ws.pool_docs();
  t.pool_truth = &ws.pool_truth();
  t.lexicon = ws.lexicon() ? &*ws.lexicon() : nullptr;
  return t;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::vector<double> retrain_accuracies(std::span<const Document> train,
                                       std::span<const Document> test, const Matrix& embeddings,
                                       const TrainConfig& base, std::span<const std::uint64_t> seeds,
                                       std::size_t jobs) {
  std::vector<double> acc(seeds.size());
  auto run = [&](std::size_t i) {
    TrainConfig cfg = base;
    cfg.seed = seeds[i];
    acc[i] = evaluate(train_model(train, embeddings, cfg), test, embeddings);
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, seeds.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run(i);
    return acc;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < seeds.size(); i += jobs) run(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : workers) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return acc;
}

std::vector<NeighborCard> keyword_cards(const ClassifierParams& params, const TaskData& task,
                                        const Matrix& embeddings, std::size_t s, std::size_t k) {
  const SalienceTable table = global_salience(params, task.train, embeddings);
  const KeywordRanking ranking = select_keywords(table, *task.vocab, s, task.langs.at(0));
  std::vector<NeighborCard> cards;
  for (const auto& rw : ranking.words)
    cards.push_back(build_card(embeddings, *task.vocab, rw.id, rw.score, task.langs, k));
  return cards;
}

FeedbackSet oracle_session(std::span<const NeighborCard> cards, const OracleLexicon& lexicon) {
  FeedbackSet fb;
  for (const auto& card : cards) {
    KeywordFeedback kf;
    kf.keyword = card.keyword;
    for (const auto& [word, mark] : oracle_feedback(card, lexicon)) {
      if (mark == Mark::kAccept) kf.positive.insert(word);
      if (mark == Mark::kReject) kf.negative.insert(word);
    }
    fb.keywords.push_back(std::move(kf));
  }
  return fb;
}

namespace {

Matrix refined_or_original(const Matrix& original, const FeedbackSet& fb,
                           const RefineConfig& cfg) {
  if (fb.empty()) return original;
  return refine(original, original, fb, cfg).embeddings;
}

ConditionResult make_condition(std::string name, std::vector<double> acc) {
  ConditionResult c;
  c.name = std::move(name);
  c.mean = mean(acc);
  c.accuracies = std::move(acc);
  return c;
}

void add_ttest(EvalReport& report, const std::string& sample_name,
               const std::string& reference_name) {
  const auto& sample = report.condition(sample_name);
  const auto& reference = report.condition(reference_name);
  try {
    report.ttests.push_back({sample_name + " vs " + reference_name,
                             single_sample_ttest(sample.accuracies, reference.mean)});
  } catch (const Error& e) {
    report.details["ttest_skipped"].push_back(
        {{"comparison", sample_name + " vs " + reference_name}, {"reason", e.what()}});
  }
}

}  // namespace

EvalReport run_conditions(const TaskData& task, const ExperimentConfig& config) {
  if (!task.vocab || !task.original || task.train.empty() || task.test.empty())
    fail(ErrorCode::kInvalidArgument, "eval: workspace needs embeddings, train and test corpora");
  if (!task.lexicon) fail(ErrorCode::kInvalidArgument, "eval: oracle lexicon missing");
  if (task.pool.empty() || !task.pool_truth)
    fail(ErrorCode::kInvalidArgument, "eval: unlabeled pool with held labels missing");

  const auto t_start = std::chrono::steady_clock::now();
  EvalReport report;
  report.seeds = config.seed_list();
  const Matrix& original = *task.original;

  const ClassifierParams ranker = train_model(task.train, original, config.train);
  const std::size_t max_keywords = std::max(config.clime_keywords, config.combined_keywords);
  const auto cards = keyword_cards(ranker, task, original, max_keywords, config.neighbors);
  const FeedbackSet feedback = oracle_session(cards, *task.lexicon);
  const double t_session = seconds_since(t_start);

  const std::size_t max_docs = std::max(config.active_docs, config.combined_docs);
  const auto picked = uncertainty_sample(ranker, task.pool, max_docs, original);
  auto first_docs = [&](std::size_t n) {
    const std::size_t m = std::min(n, picked.size());
    return label_from_truth(task.pool, std::span(picked).first(m), *task.pool_truth);
  };

  auto t0 = std::chrono::steady_clock::now();
  report.conditions.push_back(make_condition(
      "Base", retrain_accuracies(task.train, task.test, original, config.train, report.seeds,
                                 config.jobs)));
  report.timing["Base"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const auto active_train = augment_training_set(task.train, first_docs(config.active_docs));
  report.conditions.push_back(make_condition(
      "Active", retrain_accuracies(active_train, task.test, original, config.train, report.seeds,
                                   config.jobs)));
  report.timing["Active"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const FeedbackSet clime_fb = feedback.top(std::min(config.clime_keywords, cards.size()));
  const Matrix clime_e = refined_or_original(original, clime_fb, config.refine);
  report.conditions.push_back(make_condition(
      "CLIME", retrain_accuracies(task.train, task.test, clime_e, config.train, report.seeds,
                                  config.jobs)));
  report.timing["CLIME"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const FeedbackSet combined_fb = feedback.top(std::min(config.combined_keywords, cards.size()));
  const Matrix combined_e = refined_or_original(original, combined_fb, config.refine);
  const auto combined_train = augment_training_set(task.train, first_docs(config.combined_docs));
  report.conditions.push_back(make_condition(
      "A+C", retrain_accuracies(combined_train, task.test, combined_e, config.train, report.seeds,
                                config.jobs)));
  report.timing["A+C"] = seconds_since(t0);

  const double base_mean = report.conditions.front().mean;
  for (auto& c : report.conditions) c.delta_vs_base = c.mean - base_mean;
  add_ttest(report, "CLIME", "Base");
  add_ttest(report, "CLIME", "Active");
  add_ttest(report, "A+C", "Active");
  add_ttest(report, "A+C", "Base");

  if (!config.curve.empty()) {
    t0 = std::chrono::steady_clock::now();
    report.curve = keyword_curve(task, feedback, config.curve, config);
    report.timing["keyword_curve"] = seconds_since(t0);
  }

  json keywords = json::array();
  std::size_t marks = 0;
  for (const auto& kf : feedback.keywords) {
    keywords.push_back(task.vocab->at(kf.keyword).surface);
    marks += kf.positive.size() + kf.negative.size();
  }
  report.details["config"] = config.to_json();
  report.details["keywords"] = keywords;
  report.details["marks"] = marks;
  report.details["marks_per_keyword"] =
      feedback.keywords.empty() ? 0.0
                                : static_cast<double>(marks) / static_cast<double>(feedback.keywords.size());
  report.details["selected_docs"] = picked;
  report.timing["session"] = t_session;
  report.timing["total"] = seconds_since(t_start);
  return report;
}

std::vector<CurvePoint> keyword_curve(const TaskData& task, const FeedbackSet& feedback,
                                      std::span<const std::size_t> s_values,
                                      const ExperimentConfig& config) {
  const auto seeds = config.seed_list();
  std::vector<CurvePoint> points;
  for (std::size_t s : s_values) {
    // Each point refines the original matrix, never the previous point's.
    const Matrix e = refined_or_original(*task.original, feedback.top(s), config.refine);
    CurvePoint p;
    p.keywords = s;
    p.accuracies = retrain_accuracies(task.train, task.test, e, config.train, seeds, config.jobs);
    p.mean = mean(p.accuracies);
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<KeywordShift> neighbor_shift_report(const Vocabulary& vocab, const Matrix& before,
                                                const Matrix& after, const FeedbackSet& feedback,
                                                const std::vector<std::string>& langs,
                                                std::size_t k) {
  if (!before.same_shape(after)) fail(ErrorCode::kInvalidArgument, "report: shape mismatch");
  feedback.validate(before.rows());
  auto safe_cosine = [](std::span<const double> a, std::span<const double> b) {
    return (norm(a) == 0.0 || norm(b) == 0.0) ? 0.0 : cosine(a, b);
  };
  std::vector<KeywordShift> out;
  for (const auto& kf : feedback.keywords) {
    KeywordShift ks;
    ks.keyword = kf.keyword;
    for (const auto& lang : langs) {
      ks.before.push_back(nearest_neighbors(before, vocab, {kf.keyword, lang, k, {}}));
      ks.after.push_back(nearest_neighbors(after, vocab, {kf.keyword, lang, k, {}}));
    }
    auto add = [&](WordId w, Mark mark) {
      MarkShift m;
      m.word = w;
      m.mark = mark;
      m.before = safe_cosine(before.row(kf.keyword), before.row(w));
      m.after = safe_cosine(after.row(kf.keyword), after.row(w));
      m.delta = m.after - m.before;
      m.satisfied = mark == Mark::kAccept ? m.delta > 0.0 : m.delta < 0.0;
      ks.marks.push_back(m);
    };
    for (WordId w : kf.positive) add(w, Mark::kAccept);
    for (WordId w : kf.negative) add(w, Mark::kReject);
    out.push_back(std::move(ks));
  }
  return out;
}

json shift_report_to_json(const std::vector<KeywordShift>& report, const Vocabulary& vocab) {
  auto neighbors = [&](const std::vector<std::vector<Neighbor>>& cols) {
    json out = json::array();
    for (const auto& col : cols) {
      json c = json::array();
      for (const auto& nb : col)
        c.push_back({{"word", vocab.at(nb.id).surface},
                     {"lang", vocab.at(nb.id).lang},
                     {"cosine", nb.cosine}});
      out.push_back(c);
    }
    return out;
  };
  json list = json::array();
  std::size_t violated = 0;
  for (const auto& ks : report) {
    json marks = json::array();
    for (const auto& m : ks.marks) {
      if (!m.satisfied) ++violated;
      marks.push_back({{"word", vocab.at(m.word).surface},
                       {"lang", vocab.at(m.word).lang},
                       {"mark", to_string(m.mark)},
                       {"before", m.before},
                       {"after", m.after},
                       {"delta", m.delta},
                       {"satisfied", m.satisfied}});
    }
    list.push_back({{"keyword", vocab.at(ks.keyword).surface},
                    {"before", neighbors(ks.before)},
                    {"after", neighbors(ks.after)},
                    {"marks", marks}});
  }
  return {{"keywords", list}, {"violated_marks", violated}};
}

}  // namespace clime
