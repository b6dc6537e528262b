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

#include "clime/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "clime/error.hpp"
#include "clime/rng.hpp"
#include "clime/workspace.hpp"

namespace clime {

using json = nlohmann::json;
namespace fs = std::filesystem;

void SyntheticTaskSpec::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidArgument, "synth: " + what); };
  if (!(corruption >= 0.0 && corruption <= 1.0)) bad("corruption must be in [0, 1]");
  if (!(purity > 0.5 && purity <= 1.0)) bad("purity must be in (0.5, 1]");
  if (words_per_group < 2) bad("need at least two words per group");
  if (dim < 1) bad("dim must be >= 1");
  if (content_tokens % 2 == 0) bad("content_tokens must be odd");
  if (src_lang.empty() || tgt_lang.empty() || src_lang == tgt_lang)
    bad("languages must be distinct and non-empty");
  if (train_docs == 0) bad("need training documents");
  if (center_scale < 0.0 || word_noise < 0.0 || translation_noise < 0.0)
    bad("scales must be non-negative");
}

json SyntheticTaskSpec::to_json() const {
  return {{"src_lang", src_lang},
          {"tgt_lang", tgt_lang},
          {"words_per_group", words_per_group},
          {"stop_words", stop_words},
          {"dim", dim},
          {"corruption", corruption},
          {"train_docs", train_docs},
          {"test_docs", test_docs},
          {"pool_docs", pool_docs},
          {"content_tokens", content_tokens},
          {"stop_tokens", stop_tokens},
          {"purity", purity},
          {"zipf_exponent", zipf_exponent},
          {"center_scale", center_scale},
          {"word_noise", word_noise},
          {"translation_noise", translation_noise},
          {"seed", seed}};
}

SyntheticTaskSpec SyntheticTaskSpec::from_json(const json& j) {
  SyntheticTaskSpec s;
  s.src_lang = j.value("src_lang", s.src_lang);
  s.tgt_lang = j.value("tgt_lang", s.tgt_lang);
  s.words_per_group = j.value("words_per_group", s.words_per_group);
  s.stop_words = j.value("stop_words", s.stop_words);
  s.dim = j.value("dim", s.dim);
  s.corruption = j.value("corruption", s.corruption);
  s.train_docs = j.value("train_docs", s.train_docs);
  s.test_docs = j.value("test_docs", s.test_docs);
  s.pool_docs = j.value("pool_docs", s.pool_docs);
  s.content_tokens = j.value("content_tokens", s.content_tokens);
  s.stop_tokens = j.value("stop_tokens", s.stop_tokens);
  s.purity = j.value("purity", s.purity);
  s.zipf_exponent = j.value("zipf_exponent", s.zipf_exponent);
  s.center_scale = j.value("center_scale", s.center_scale);
  s.word_noise = j.value("word_noise", s.word_noise);
  s.translation_noise = j.value("translation_noise", s.translation_noise);
  s.seed = j.value("seed", s.seed);
  return s;
}

namespace {

const char* const kEnglishStopWords[] = {"the", "of", "and", "a",  "to",   "in",
                                         "is",  "for", "on", "with", "that", "by"};

class WordMaker {
 public:
  WordMaker(std::string consonants, std::string vowels, Rng rng)
      : consonants_(std::move(consonants)), vowels_(std::move(vowels)), rng_(rng) {}

  std::string make(std::size_t min_syllables, std::size_t max_syllables) {
    for (;;) {
      const std::size_t n = min_syllables + rng_.below(max_syllables - min_syllables + 1);
      std::string w;
      for (std::size_t i = 0; i < n; ++i) {
        w += consonants_[rng_.below(consonants_.size())];
        w += vowels_[rng_.below(vowels_.size())];
      }
      if (used_.insert(w).second) return w;
    }
  }

  void reserve(const std::string& w) { used_.insert(w); }

 private:
  std::string consonants_;
  std::string vowels_;
  Rng rng_;
  std::set<std::string> used_;
};

std::vector<double> zipf_cdf(std::size_t n, double exponent) {
  std::vector<double> cdf(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
    cdf[i] = total;
  }
  for (double& c : cdf) c /= total;
  return cdf;
}

std::size_t sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

// Word layout inside a language: group 0 words, then group 1, then stop words.
struct Layout {
  std::size_t per_group;
  std::size_t content() const { return 2 * per_group; }
  std::size_t index(int group, std::size_t i) const {
    return static_cast<std::size_t>(group) * per_group + i;
  }
};

// Token indices (into the language's word list) and the majority label.
struct DocDraw {
  std::vector<std::size_t> tokens;
  int label;
};

DocDraw draw_doc(const SyntheticTaskSpec& spec, const Layout& layout,
                 const std::vector<double>& cdf, int topic, Rng& rng) {
  DocDraw draw;
  std::size_t relevant = 0;
  for (std::size_t i = 0; i < spec.content_tokens; ++i) {
    const int g = rng.uniform() < spec.purity ? topic : 1 - topic;
    if (g == 1) ++relevant;
    draw.tokens.push_back(layout.index(g, sample_cdf(cdf, rng)));
  }
  for (std::size_t i = 0; i < spec.stop_tokens && spec.stop_words > 0; ++i) {
    const std::size_t pos = rng.below(draw.tokens.size() + 1);
    const std::size_t stop = layout.content() + rng.below(spec.stop_words);
    draw.tokens.insert(draw.tokens.begin() + static_cast<std::ptrdiff_t>(pos), stop);
  }
  draw.label = 2 * relevant > spec.content_tokens ? 1 : 0;
  return draw;
}

std::string render(const std::vector<std::size_t>& tokens, const std::vector<SyntheticWord>& words) {
  std::string text;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string w = words[tokens[i]].surface;
    if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    if (i > 0) text += ' ';
    text += w;
  }
  text += '.';
  return text;
}

std::string doc_id(const std::string& lang, const char* split, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%s-%04zu", lang.c_str(), split, i + 1);
  return buf;
}

}  // namespace

SyntheticTask generate_task(const SyntheticTaskSpec& spec) {
  spec.validate();
  SyntheticTask task;
  task.spec = spec;
  const Rng root(spec.seed);
  Rng vec_rng = root.split(1);
  Rng doc_rng = root.split(2);
  const Layout layout{spec.words_per_group};
  const std::size_t d = spec.dim;

  WordMaker src_maker("bdfgklmnprstvz", "aeiou", root.split(3));
  WordMaker tgt_maker("hjklmnpqtwy", "aeiouy", root.split(4));
  for (const char* w : kEnglishStopWords) src_maker.reserve(w);

  // Group 1 center points along a random sign pattern, group 0 opposite.
  std::vector<double> axis(d);
  for (double& a : axis) a = vec_rng.uniform() < 0.5 ? -1.0 : 1.0;

  auto src_vector = [&](int group) {
    std::vector<double> v(d);
    const double sign = group == 1 ? 1.0 : (group == 0 ? -1.0 : 0.0);
    for (std::size_t c = 0; c < d; ++c)
      v[c] = sign * spec.center_scale * axis[c] + spec.word_noise * vec_rng.normal();
    return v;
  };

  for (int g = 0; g < 2; ++g)
    for (std::size_t i = 0; i < spec.words_per_group; ++i)
      task.src_words.push_back({src_maker.make(2, 3), spec.src_lang, g, src_vector(g)});
  for (std::size_t i = 0; i < spec.stop_words; ++i) {
    std::string surface = i < std::size(kEnglishStopWords) ? kEnglishStopWords[i] : src_maker.make(1, 1);
    task.src_words.push_back({surface, spec.src_lang, -1, src_vector(-1)});
  }

  // Which content translations are misaligned, equally often in both groups.
  std::set<std::size_t> corrupted;
  const auto per_group_corrupt = static_cast<std::size_t>(
      std::llround(spec.corruption * static_cast<double>(spec.words_per_group)));
  for (int g = 0; g < 2; ++g) {
    std::vector<std::size_t> idx(spec.words_per_group);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    vec_rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t i = 0; i < per_group_corrupt; ++i) corrupted.insert(layout.index(g, idx[i]));
  }

  for (std::size_t i = 0; i < task.src_words.size(); ++i) {
    const auto& src = task.src_words[i];
    std::size_t anchor = i;
    if (corrupted.contains(i)) {
      const int other = 1 - src.group;
      anchor = layout.index(other, vec_rng.below(spec.words_per_group));
    }
    std::vector<double> v = task.src_words[anchor].vector;
    for (double& x : v) x += spec.translation_noise * vec_rng.normal();
    const bool stop = src.group < 0;
    task.tgt_words.push_back({tgt_maker.make(stop ? 1 : 2, stop ? 2 : 3), spec.tgt_lang,
                              src.group, std::move(v)});
  }
  task.corrupted.assign(corrupted.begin(), corrupted.end());

  const auto cdf = zipf_cdf(spec.words_per_group, spec.zipf_exponent);
  auto make_docs = [&](std::size_t count, const char* split,
                       const std::vector<SyntheticWord>& words, const std::string& lang) {
    std::vector<SyntheticDoc> docs;
    for (std::size_t i = 0; i < count; ++i) {
      const DocDraw draw = draw_doc(spec, layout, cdf, static_cast<int>(i % 2), doc_rng);
      docs.push_back({doc_id(lang, split, i), lang, render(draw.tokens, words), draw.label});
    }
    return docs;
  };
  task.train = make_docs(spec.train_docs, "train", task.src_words, spec.src_lang);
  task.test = make_docs(spec.test_docs, "test", task.tgt_words, spec.tgt_lang);
  task.pool = make_docs(spec.pool_docs, "pool", task.tgt_words, spec.tgt_lang);
  return task;
}

namespace {

void write_vectors(const fs::path& path, const std::vector<SyntheticWord>& words, std::size_t dim) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << words.size() << ' ' << dim << '\n';
  char buf[64];
  for (const auto& w : words) {
    out << w.surface;
    for (double x : w.vector) {
      std::snprintf(buf, sizeof(buf), " %.6f", x);
      out << buf;
    }
    out << '\n';
  }
}

void write_docs(const fs::path& path, const std::vector<SyntheticDoc>& docs, bool with_labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& d : docs) {
    json obj = {{"id", d.id}, {"lang", d.lang}, {"text", d.text}};
    obj["label"] = with_labels ? json(d.label) : json(nullptr);
    out << obj.dump() << '\n';
  }
}

}  // namespace

void write_task(const SyntheticTask& task, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& spec = task.spec;
  write_vectors(dir / "src.vec", task.src_words, spec.dim);
  write_vectors(dir / "tgt.vec", task.tgt_words, spec.dim);
  write_docs(dir / "train.jsonl", task.train, true);
  write_docs(dir / "test.jsonl", task.test, true);
  write_docs(dir / "unlabeled.jsonl", task.pool, false);

  json truth = json::object();
  for (const auto& d : task.pool) truth[d.id] = d.label;
  std::ofstream(dir / "unlabeled.truth.json", std::ios::trunc) << truth.dump(1) << '\n';

  json entries = json::array();
  for (const auto* words : {&task.src_words, &task.tgt_words})
    for (const auto& w : *words)
      if (w.group >= 0) entries.push_back({{"word", w.surface}, {"lang", w.lang}, {"group", w.group}});
  json translations = json::array();
  for (std::size_t i = 0; i < task.src_words.size(); ++i)
    translations.push_back({task.src_words[i].surface, task.tgt_words[i].surface});
  std::ofstream(dir / "lexicon.json", std::ios::trunc)
      << json{{"entries", entries}, {"translations", translations}}.dump(1) << '\n';

  WorkspaceManifest m;
  m.src_lang = spec.src_lang;
  m.tgt_lang = spec.tgt_lang;
  m.src_emb = "src.vec";
  m.tgt_emb = "tgt.vec";
  m.train = "train.jsonl";
  m.test = "test.jsonl";
  m.unlabeled = "unlabeled.jsonl";
  m.pool_truth = "unlabeled.truth.json";
  m.lexicon = "lexicon.json";
  m.seed = spec.seed;
  m.config = {{"synth", spec.to_json()}};
  std::ofstream(dir / "manifest.json", std::ios::trunc) << m.to_json().dump(2) << '\n';
}

}  // namespace clime
