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

#include "clime/text_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "clime/rng.hpp"

namespace clime {

using json = nlohmann::json;

ClassifierParams::ClassifierParams(std::vector<int> widths, int filters_per_width,
                                   std::size_t dim)
    : widths_(std::move(widths)), filters_(filters_per_width), dim_(dim) {
  if (widths_.empty() || filters_ < 1 || dim_ == 0)
    fail(ErrorCode::kInvalidArgument, "classifier: need widths, filters >= 1 and dim >= 1");
  std::size_t offset = 0;
  for (int w : widths_) {
    if (w < 1) fail(ErrorCode::kInvalidArgument, "classifier: filter width must be >= 1");
    group_offsets_.push_back(offset);
    offset += static_cast<std::size_t>(filters_) * (static_cast<std::size_t>(w) * dim_ + 1);
  }
  output_offset_ = offset;
  offset += total_filters() * 2 + 2;
  values_.assign(offset, 0.0);
}

ClassifierParams ClassifierParams::initialized(std::vector<int> widths, int filters_per_width,
                                               std::size_t dim, std::uint64_t seed) {
  ClassifierParams p(std::move(widths), filters_per_width, dim);
  Rng rng = Rng(seed).split(0);
  for (double& v : p.values_) v = rng.uniform(-0.1, 0.1);
  return p;
}

int ClassifierParams::max_width() const noexcept {
  return widths_.empty() ? 0 : *std::max_element(widths_.begin(), widths_.end());
}

namespace {

struct Forward {
  std::vector<double> pooled;
  std::vector<double> best_z;
  std::vector<std::size_t> best_start;
  std::array<double, 2> logits{};
  Probabilities probs{};
};

void check_inputs(const ClassifierParams& p, std::span<const WordId> tokens, const Matrix& e) {
  if (tokens.empty()) fail(ErrorCode::kInvalidArgument, "empty document");
  if (e.cols() != p.dim())
    fail(ErrorCode::kInvalidArgument, "embedding dim does not match classifier");
  for (WordId t : tokens)
    if (t >= e.rows()) fail(ErrorCode::kNotFound, "token id out of range");
}

// Documents shorter than the widest filter are right-padded with zero vectors.
Forward forward(const ClassifierParams& p, std::span<const WordId> tokens, const Matrix& e) {
  check_inputs(p, tokens, e);
  const auto v = p.values();
  const std::size_t n = tokens.size();
  const std::size_t d = p.dim();
  const std::size_t padded = std::max<std::size_t>(n, static_cast<std::size_t>(p.max_width()));
  const std::size_t filters = static_cast<std::size_t>(p.filters_per_width());

  Forward fw;
  fw.pooled.resize(p.total_filters());
  fw.best_z.resize(p.total_filters());
  fw.best_start.resize(p.total_filters());

  for (std::size_t g = 0; g < p.widths().size(); ++g) {
    const std::size_t w = static_cast<std::size_t>(p.widths()[g]);
    const std::size_t windows = padded - w + 1;
    for (std::size_t f = 0; f < filters; ++f) {
      const double* kernel = v.data() + p.kernel_offset(g) + f * w * d;
      const double bias = v[p.bias_offset(g) + f];
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_t = 0;
      for (std::size_t t = 0; t < windows; ++t) {
        double z = bias;
        for (std::size_t j = 0; j < w && t + j < n; ++j) {
          const auto x = e.row(tokens[t + j]);
          const double* k = kernel + j * d;
          for (std::size_t c = 0; c < d; ++c) z += k[c] * x[c];
        }
        if (z > best) {
          best = z;
          best_t = t;
        }
      }
      const std::size_t idx = g * filters + f;
      fw.best_z[idx] = best;
      fw.best_start[idx] = best_t;
      fw.pooled[idx] = best > 0.0 ? best : 0.0;
    }
  }

  const double* out_w = v.data() + p.output_offset();
  const double* out_b = v.data() + p.output_bias_offset();
  for (int c = 0; c < 2; ++c) {
    double z = out_b[c];
    for (std::size_t f = 0; f < p.total_filters(); ++f) z += out_w[f * 2 + c] * fw.pooled[f];
    fw.logits[c] = z;
  }
  const double m = std::max(fw.logits[0], fw.logits[1]);
  const double e0 = std::exp(fw.logits[0] - m);
  const double e1 = std::exp(fw.logits[1] - m);
  fw.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
  return fw;
}

// Adds d(loss)/d(params) into `param_grad` (if non-null) and writes per-slot
// embedding gradients into `emb_grad` (if non-null). Returns the loss.
double backward(const ClassifierParams& p, std::span<const WordId> tokens, int label,
                const Matrix& e, const Forward& fw, double* param_grad,
                std::vector<std::vector<double>>* emb_grad) {
  if (label != 0 && label != 1) fail(ErrorCode::kInvalidArgument, "label must be 0 or 1");
  const auto v = p.values();
  const std::size_t n = tokens.size();
  const std::size_t d = p.dim();
  const std::size_t filters = static_cast<std::size_t>(p.filters_per_width());

  const double m = std::max(fw.logits[0], fw.logits[1]);
  const double lse = m + std::log(std::exp(fw.logits[0] - m) + std::exp(fw.logits[1] - m));
  const double loss = lse - fw.logits[label];

  const double dlogit[2] = {fw.probs[0] - (label == 0 ? 1.0 : 0.0),
                            fw.probs[1] - (label == 1 ? 1.0 : 0.0)};
  const double* out_w = v.data() + p.output_offset();
  if (param_grad) {
    double* g_out = param_grad + p.output_offset();
    for (std::size_t f = 0; f < p.total_filters(); ++f) {
      g_out[f * 2] += fw.pooled[f] * dlogit[0];
      g_out[f * 2 + 1] += fw.pooled[f] * dlogit[1];
    }
    param_grad[p.output_bias_offset()] += dlogit[0];
    param_grad[p.output_bias_offset() + 1] += dlogit[1];
  }
  if (emb_grad) emb_grad->assign(n, std::vector<double>(d, 0.0));

  for (std::size_t g = 0; g < p.widths().size(); ++g) {
    const std::size_t w = static_cast<std::size_t>(p.widths()[g]);
    for (std::size_t f = 0; f < filters; ++f) {
      const std::size_t idx = g * filters + f;
      if (!(fw.best_z[idx] > 0.0)) continue;  // ReLU closed
      const double gz = out_w[idx * 2] * dlogit[0] + out_w[idx * 2 + 1] * dlogit[1];
      const std::size_t t0 = fw.best_start[idx];
      const double* kernel = v.data() + p.kernel_offset(g) + f * w * d;
      if (param_grad) {
        param_grad[p.bias_offset(g) + f] += gz;
        double* gk = param_grad + p.kernel_offset(g) + f * w * d;
        for (std::size_t j = 0; j < w && t0 + j < n; ++j) {
          const auto x = e.row(tokens[t0 + j]);
          for (std::size_t c = 0; c < d; ++c) gk[j * d + c] += gz * x[c];
        }
      }
      if (emb_grad) {
        for (std::size_t j = 0; j < w && t0 + j < n; ++j) {
          auto& slot = (*emb_grad)[t0 + j];
          for (std::size_t c = 0; c < d; ++c) slot[c] += gz * kernel[j * d + c];
        }
      }
    }
  }
  return loss;
}

}  // namespace

Probabilities predict_proba(const ClassifierParams& params, std::span<const WordId> tokens,
                            const Matrix& embeddings) {
  return forward(params, tokens, embeddings).probs;
}

LossGradients loss_and_gradients(const ClassifierParams& params, std::span<const WordId> tokens,
                                 int label, const Matrix& embeddings, bool want_params,
                                 bool want_embedding) {
  const Forward fw = forward(params, tokens, embeddings);
  LossGradients out;
  out.probs = fw.probs;
  if (want_params) out.params.assign(params.values().size(), 0.0);
  out.loss = backward(params, tokens, label, embeddings, fw,
                      want_params ? out.params.data() : nullptr,
                      want_embedding ? &out.embedding : nullptr);
  return out;
}

ClassifierParams train_model(std::span<const Document> docs, const Matrix& embeddings,
                       const TrainConfig& config) {
  if (docs.empty()) fail(ErrorCode::kInvalidArgument, "train: empty corpus");
  if (config.epochs < 1) fail(ErrorCode::kInvalidArgument, "train: epochs must be >= 1");
  if (config.batch_size < 1) fail(ErrorCode::kInvalidArgument, "train: batch size must be >= 1");
  for (const auto& d : docs) {
    if (!d.label) fail(ErrorCode::kInvalidArgument, "train: unlabeled document " + d.id);
    if (d.tokens.empty()) fail(ErrorCode::kInvalidArgument, "train: empty document " + d.id);
  }

  ClassifierParams params = ClassifierParams::initialized(
      config.widths, config.filters_per_width, embeddings.cols(), config.seed);
  Adam adam(params.values().size(), config.adam);
  Rng order_rng = Rng(config.seed).split(1);

  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(params.values().size());
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const Document& doc = docs[order[i]];
        const Forward fw = forward(params, doc.tokens, embeddings);
        backward(params, doc.tokens, *doc.label, embeddings, fw, grad.data(), nullptr);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (double& g : grad) g *= scale;
      adam.step(params.values(), grad);
    }
  }
  return params;
}

int predict_label(const Probabilities& p) { return p[1] > p[0] ? 1 : 0; }

double evaluate(const ClassifierParams& params, std::span<const Document> docs,
                const Matrix& embeddings) {
  if (docs.empty()) fail(ErrorCode::kInvalidArgument, "evaluate: empty test set");
  std::size_t correct = 0;
  for (const auto& d : docs) {
    if (!d.label) fail(ErrorCode::kInvalidArgument, "evaluate: unlabeled document " + d.id);
    if (predict_label(predict_proba(params, d.tokens, embeddings)) == *d.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(docs.size());
}

void save_params(const ClassifierParams& params, const TrainConfig& config,
                 const std::string& path) {
  json obj;
  obj["format"] = "clime-classifier";
  obj["version"] = 1;
  obj["config"] = {{"widths", params.widths()},
                   {"filters_per_width", params.filters_per_width()},
                   {"dim", params.dim()},
                   {"epochs", config.epochs},
                   {"batch_size", config.batch_size},
                   {"seed", config.seed},
                   {"adam",
                    {{"step_size", config.adam.step_size},
                     {"beta1", config.adam.beta1},
                     {"beta2", config.adam.beta2},
                     {"epsilon", config.adam.epsilon}}}};
  obj["values"] = std::vector<double>(params.values().begin(), params.values().end());
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << obj.dump() << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

ClassifierParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  try {
    const json obj = json::parse(in);
    if (obj.at("format") != "clime-classifier" || obj.at("version") != 1)
      fail(ErrorCode::kFormat, "unsupported classifier checkpoint: " + path);
    const auto& cfg = obj.at("config");
    ClassifierParams p(cfg.at("widths").get<std::vector<int>>(),
                       cfg.at("filters_per_width").get<int>(),
                       cfg.at("dim").get<std::size_t>());
    const auto values = obj.at("values").get<std::vector<double>>();
    if (values.size() != p.values().size())
      fail(ErrorCode::kFormat, "classifier checkpoint size mismatch: " + path);
    std::copy(values.begin(), values.end(), p.values().begin());
    return p;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, path + ": " + e.what());
  }
}

}  // namespace clime
