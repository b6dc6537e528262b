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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clime/adam.hpp"
#include "clime/corpus.hpp"
#include "clime/matrix.hpp"

namespace clime {

struct TrainConfig {
  int epochs = 30;
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::vector<int> widths{2, 3};
  int filters_per_width = 25;
  int batch_size = 16;
};

// Convolution filters + softmax layer of a one-layer CNN over frozen word
// vectors. All weights live in one flat vector so the optimizer and gradient
// checks can treat them uniformly; the accessors below give the layout.
//
// Layout, per width group g (width w, F filters):
//   kernels  F * w * dim   (filter f, tap j, component c)
//   biases   F
// then output weights  total_filters * 2  (filter f, class c), output biases 2.
class ClassifierParams {
 public:
  ClassifierParams() = default;
  ClassifierParams(std::vector<int> widths, int filters_per_width, std::size_t dim);

  static ClassifierParams initialized(std::vector<int> widths, int filters_per_width,
                                      std::size_t dim, std::uint64_t seed);

  const std::vector<int>& widths() const noexcept { return widths_; }
  int filters_per_width() const noexcept { return filters_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t total_filters() const noexcept { return widths_.size() * filters_; }
  int max_width() const noexcept;

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::size_t kernel_offset(std::size_t group) const { return group_offsets_[group]; }
  std::size_t bias_offset(std::size_t group) const {
    return group_offsets_[group] + filters_ * widths_[group] * dim_;
  }
  std::size_t output_offset() const noexcept { return output_offset_; }
  std::size_t output_bias_offset() const noexcept { return output_offset_ + total_filters() * 2; }

  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;

 private:
  std::vector<int> widths_;
  int filters_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::size_t> group_offsets_;
  std::size_t output_offset_ = 0;
  std::vector<double> values_;
};

using Probabilities = std::array<double, 2>;

struct LossGradients {
  double loss = 0.0;
  Probabilities probs{};
  std::vector<double> params;                  // same layout as ClassifierParams
  std::vector<std::vector<double>> embedding;  // one d-vector per token slot
};

Probabilities predict_proba(const ClassifierParams& params, std::span<const WordId> tokens,
                            const Matrix& embeddings);

// Cross-entropy of the true label and its gradients. Gradient slots follow
// token positions; padding slots are never reported.
LossGradients loss_and_gradients(const ClassifierParams& params, std::span<const WordId> tokens,
                                 int label, const Matrix& embeddings, bool want_params = true,
                                 bool want_embedding = true);

ClassifierParams train_model(std::span<const Document> docs, const Matrix& embeddings,
                       const TrainConfig& config);

// Fraction of docs whose argmax matches the label; an exact 0.5/0.5 tie
// predicts 0.
double evaluate(const ClassifierParams& params, std::span<const Document> docs,
                const Matrix& embeddings);

int predict_label(const Probabilities& p);

void save_params(const ClassifierParams& params, const TrainConfig& config,
                 const std::string& path);
ClassifierParams load_params(const std::string& path);

}  // namespace clime
