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

#include "clime/refiner.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>

namespace clime {

using json = nlohmann::json;

std::size_t FeedbackSet::size() const {
  std::size_t n = 0;
  for (const auto& k : keywords) n += k.positive.size() + k.negative.size();
  return n;
}

void FeedbackSet::validate(std::size_t vocab_size) const {
  std::set<WordId> seen;
  for (const auto& k : keywords) {
    if (k.keyword >= vocab_size) fail(ErrorCode::kNotFound, "feedback: invalid keyword id");
    if (!seen.insert(k.keyword).second)
      fail(ErrorCode::kInvalidArgument, "feedback: keyword listed twice");
    for (const auto* group : {&k.positive, &k.negative})
      for (WordId w : *group) {
        if (w >= vocab_size) fail(ErrorCode::kNotFound, "feedback: invalid word id");
        if (w == k.keyword) fail(ErrorCode::kInvalidArgument, "feedback: keyword marks itself");
      }
    for (WordId w : k.positive)
      if (k.negative.contains(w))
        fail(ErrorCode::kInvalidArgument, "feedback: word is both positive and negative");
  }
}

FeedbackSet FeedbackSet::top(std::size_t s) const {
  if (s > keywords.size())
    fail(ErrorCode::kInvalidArgument, "feedback: requested " + std::to_string(s) +
                                          " keywords, only " +
                                          std::to_string(keywords.size()) + " available");
  FeedbackSet out;
  out.keywords.assign(keywords.begin(), keywords.begin() + static_cast<std::ptrdiff_t>(s));
  return out;
}

std::vector<WordId> FeedbackSet::touched_rows() const {
  std::set<WordId> rows;
  for (const auto& k : keywords) {
    rows.insert(k.keyword);
    rows.insert(k.positive.begin(), k.positive.end());
    rows.insert(k.negative.begin(), k.negative.end());
  }
  return {rows.begin(), rows.end()};
}

namespace {

json word_json(const Vocabulary& vocab, WordId id) {
  const auto& w = vocab.at(id);
  return {{"word", w.surface}, {"lang", w.lang}};
}

WordId word_from_json(const json& j, const Vocabulary& vocab) {
  return vocab.require(j.at("word").get<std::string>(), j.at("lang").get<std::string>());
}

}  // namespace

json feedback_to_json(const FeedbackSet& fb, const Vocabulary& vocab) {
  json list = json::array();
  for (const auto& k : fb.keywords) {
    json pos = json::array();
    json neg = json::array();
    for (WordId w : k.positive) pos.push_back(word_json(vocab, w));
    for (WordId w : k.negative) neg.push_back(word_json(vocab, w));
    list.push_back({{"keyword", word_json(vocab, k.keyword)}, {"positive", pos}, {"negative", neg}});
  }
  return {{"keywords", list}};
}

FeedbackSet feedback_from_json(const json& j, const Vocabulary& vocab) {
  FeedbackSet fb;
  try {
    for (const auto& item : j.at("keywords")) {
      KeywordFeedback k;
      k.keyword = word_from_json(item.at("keyword"), vocab);
      if (item.contains("positive"))
        for (const auto& w : item.at("positive")) k.positive.insert(word_from_json(w, vocab));
      if (item.contains("negative"))
        for (const auto& w : item.at("negative")) k.negative.insert(word_from_json(w, vocab));
      fb.keywords.push_back(std::move(k));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("feedback: ") + e.what());
  }
  fb.validate(vocab.size());
  return fb;
}

FeedbackSet read_feedback_file(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, path + ": " + e.what());
  }
  return feedback_from_json(j, vocab);
}

double feedback_cost(const Matrix& e, const FeedbackSet& fb) {
  fb.validate(e.rows());
  double cost = 0.0;
  for (const auto& k : fb.keywords) {
    const auto ek = e.row(k.keyword);
    for (WordId n : k.negative) cost += dot(ek, e.row(n));
    for (WordId p : k.positive) cost -= dot(ek, e.row(p));
  }
  return cost;
}

double regularizer(const Matrix& e, const Matrix& anchor) {
  if (!e.same_shape(anchor)) fail(ErrorCode::kInvalidArgument, "regularizer: shape mismatch");
  double r = 0.0;
  const auto a = e.data();
  const auto b = anchor.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = b[i] - a[i];
    r += diff * diff;
  }
  return r;
}

double total_cost(const Matrix& e, const Matrix& anchor, const FeedbackSet& fb, double lambda) {
  return feedback_cost(e, fb) + lambda * regularizer(e, anchor);
}

Matrix cost_gradient(const Matrix& e, const Matrix& anchor, const FeedbackSet& fb,
                     double lambda) {
  if (!e.same_shape(anchor)) fail(ErrorCode::kInvalidArgument, "gradient: shape mismatch");
  fb.validate(e.rows());
  Matrix g(e.rows(), e.cols());
  for (std::size_t i = 0; i < g.data().size(); ++i)
    g.data()[i] = 2.0 * lambda * (e.data()[i] - anchor.data()[i]);
  const std::size_t d = e.cols();
  for (const auto& k : fb.keywords) {
    const auto ek = e.row(k.keyword);
    auto gk = g.row(k.keyword);
    for (WordId n : k.negative) {
      const auto en = e.row(n);
      auto gn = g.row(n);
      for (std::size_t c = 0; c < d; ++c) {
        gk[c] += en[c];
        gn[c] += ek[c];
      }
    }
    for (WordId p : k.positive) {
      const auto ep = e.row(p);
      auto gp = g.row(p);
      for (std::size_t c = 0; c < d; ++c) {
        gk[c] -= ep[c];
        gp[c] -= ek[c];
      }
    }
  }
  return g;
}

RefineResult refine(const Matrix& start, const Matrix& anchor, const FeedbackSet& fb,
                    const RefineConfig& config) {
  if (!start.same_shape(anchor)) fail(ErrorCode::kInvalidArgument, "refine: shape mismatch");
  if (config.lambda < 0.0) fail(ErrorCode::kInvalidArgument, "refine: lambda must be >= 0");
  if (config.steps < 1) fail(ErrorCode::kInvalidArgument, "refine: steps must be >= 1");
  fb.validate(start.rows());
  if (fb.empty()) fail(ErrorCode::kInvalidArgument, "refine: empty feedback");

  const std::size_t d = start.cols();
  const std::vector<WordId> rows = fb.touched_rows();
  std::unordered_map<WordId, std::size_t> local;
  for (std::size_t i = 0; i < rows.size(); ++i) local.emplace(rows[i], i);

  // Compact copy of the touched rows; x[i*d + c] is row rows[i].
  std::vector<double> x(rows.size() * d);
  std::vector<double> a(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(start.row(rows[i]).begin(), d, x.begin() + static_cast<std::ptrdiff_t>(i * d));
    std::copy_n(anchor.row(rows[i]).begin(), d, a.begin() + static_cast<std::ptrdiff_t>(i * d));
  }

  // Untouched rows never move, so their share of R is a constant.
  double fixed_reg = regularizer(start, anchor);
  for (WordId w : rows)
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = anchor(w, c) - start(w, c);
      fixed_reg -= diff * diff;
    }

  struct Pair {
    std::size_t keyword;
    std::size_t word;
    double sign;  // +1 negative, -1 positive
  };
  std::vector<Pair> pairs;
  for (const auto& k : fb.keywords) {
    for (WordId n : k.negative) pairs.push_back({local.at(k.keyword), local.at(n), 1.0});
    for (WordId p : k.positive) pairs.push_back({local.at(k.keyword), local.at(p), -1.0});
  }

  auto cost = [&]() {
    double cf = 0.0;
    for (const auto& pr : pairs) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += x[pr.keyword * d + c] * x[pr.word * d + c];
      cf += pr.sign * s;
    }
    double r = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r += (a[i] - x[i]) * (a[i] - x[i]);
    return cf + config.lambda * (r + fixed_reg);
  };

  RefineResult result;
  result.trace.reserve(static_cast<std::size_t>(config.steps) + 1);
  result.trace.push_back(cost());

  Adam adam(x.size(), config.adam);
  std::vector<double> grad(x.size());
  for (int step = 0; step < config.steps; ++step) {
    for (std::size_t i = 0; i < x.size(); ++i) grad[i] = 2.0 * config.lambda * (x[i] - a[i]);
    for (const auto& pr : pairs)
      for (std::size_t c = 0; c < d; ++c) {
        grad[pr.keyword * d + c] += pr.sign * x[pr.word * d + c];
        grad[pr.word * d + c] += pr.sign * x[pr.keyword * d + c];
      }
    adam.step(x, grad);
    const double c = cost();
    if (!std::isfinite(c))
      fail(ErrorCode::kNumeric, "refine: non-finite cost at step " + std::to_string(step + 1));
    result.trace.push_back(c);
  }

  result.embeddings = start;
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(i * d), d,
                result.embeddings.row(rows[i]).begin());
  return result;
}

RefineResult refine(EmbeddingSpace& space, const FeedbackSet& fb, const RefineConfig& config) {
  RefineResult result = refine(space.current(), space.original(), fb, config);
  space.install_current(result.embeddings);
  return result;
}

}  // namespace clime
