#pragma once

// Independent brute-force reference implementations and random instance
// builders shared by the unit and acceptance tests. Nothing here calls into
// the code under test except for tokenize(), which the oracles need to agree
// on what a term is.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "r3/autodiff/tensor.hpp"
#include "r3/model/reader.hpp"
#include "r3/retrieval/corpus.hpp"
#include "r3/text/tokenizer.hpp"
#include "r3/train/example.hpp"

namespace r3::oracle {

struct DocScore {
  std::string id;
  double score = 0.0;
};

// BM25 by rescanning every document for every term. Terms are visited in
// sorted order so the floating-point sum matches any implementation that does
// the same; ties go to the lexicographically smaller id.
inline std::vector<DocScore> bm25(std::vector<retrieval::Document> docs, const text::Tokens& query,
                                  std::size_t top, double k1 = 1.2, double b = 0.75) {
  std::sort(docs.begin(), docs.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  std::vector<text::Tokens> toks;
  for (const auto& d : docs) toks.push_back(text::tokenize(d.title + " " + d.text));
  double total = 0.0;
  for (const auto& t : toks) total += static_cast<double>(t.size());
  const double avg = total / static_cast<double>(docs.size());
  const std::set<std::string> terms(query.begin(), query.end());

  std::vector<DocScore> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    double score = 0.0;
    bool matched = false;
    for (const auto& term : terms) {
      std::size_t df = 0;
      for (const auto& t : toks) df += std::find(t.begin(), t.end(), term) != t.end() ? 1 : 0;
      const double tf = static_cast<double>(std::count(toks[i].begin(), toks[i].end(), term));
      if (tf == 0.0) continue;
      matched = true;
      const double n = static_cast<double>(docs.size());
      const double idf = std::log(1.0 + (n - static_cast<double>(df) + 0.5) / (static_cast<double>(df) + 0.5));
      const double norm = k1 * (1.0 - b + b * static_cast<double>(toks[i].size()) / avg);
      score += idf * tf * (k1 + 1.0) / (tf + norm);
    }
    if (matched) out.push_back({docs[i].id, score});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.score > y.score; });
  if (out.size() > top) out.resize(top);
  return out;
}

struct SentenceScore {
  std::size_t index = 0;
  double score = 0.0;
};

// tf-idf over a sentence pool with idf ln((1+n)/(1+df)) + 1; ties keep pool order.
inline std::vector<SentenceScore> tfidf(const std::vector<text::Tokens>& pool, const text::Tokens& query,
                                        std::size_t top) {
  const std::set<std::string> terms(query.begin(), query.end());
  const double n = static_cast<double>(pool.size());
  std::vector<SentenceScore> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    double score = 0.0;
    for (const auto& term : terms) {
      const double tf = static_cast<double>(std::count(pool[i].begin(), pool[i].end(), term));
      if (tf == 0.0) continue;
      std::size_t df = 0;
      for (const auto& s : pool) df += std::find(s.begin(), s.end(), term) != s.end() ? 1 : 0;
      score += tf * (std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0);
    }
    out.push_back({i, score});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.score > y.score; });
  if (out.size() > top) out.resize(top);
  return out;
}

struct SpanChoice {
  std::size_t passage = 0;
  std::size_t start = 0;  // within the passage
  std::size_t end = 0;
  double prob = -1.0;
};

// Every (i, j) with i <= j < i + max_len inside one segment; strict '>' keeps
// the first maximum in (i, j) order.
inline SpanChoice best_span(const std::vector<double>& start, const std::vector<double>& end,
                            const std::vector<std::size_t>& offsets, const std::vector<std::size_t>& lengths,
                            std::size_t max_len) {
  SpanChoice best;
  for (std::size_t p = 0; p < offsets.size(); ++p) {
    for (std::size_t i = 0; i < lengths[p]; ++i) {
      for (std::size_t j = i; j < lengths[p]; ++j) {
        if (j - i + 1 > max_len) continue;
        const double prob = start[offsets[p] + i] * end[offsets[p] + j];
        if (prob > best.prob) best = {p, i, j, prob};
      }
    }
  }
  return best;
}

inline ad::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  ad::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

inline std::vector<double> random_simplex(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> ed(1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& x : p) s += (x = ed(rng));
  for (auto& x : p) x /= s;
  return p;
}

// A toy example with random word vectors: `n` passages of random length in
// [min_len, max_len], the first `positives` of which hold the answer token
// "ans" at a random position. Other tokens come from a small pool so that
// extraction produces a mix of rewards.
inline train::QaExample random_example(std::mt19937_64& rng, int embed_dim, std::size_t question_len, std::size_t n,
                                       std::size_t positives, std::size_t min_len, std::size_t max_len) {
  static const std::vector<std::string> pool = {"red", "blue", "green", "ans", "of", "the"};
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> word(0, pool.size() - 1);
  train::QaExample ex;
  ex.id = "toy";
  ex.answers = {"ans"};
  ex.question.assign(question_len, "q");
  ex.question_embedded = random_matrix(embed_dim, static_cast<Eigen::Index>(question_len), rng);
  for (std::size_t k = 0; k < n; ++k) {
    train::PassageInput p;
    const std::size_t length = len(rng);
    for (std::size_t t = 0; t < length; ++t) {
      std::string w = pool[word(rng)];
      if (w == "ans") w = "of";
      p.tokens.push_back(w);
    }
    if (k < positives) {
      const std::size_t at = std::uniform_int_distribution<std::size_t>(0, length - 1)(rng);
      p.tokens[at] = "ans";
      p.answer_spans = {{at, at}};
      p.positive = true;
    }
    p.embedded = random_matrix(embed_dim, static_cast<Eigen::Index>(length), rng);
    p.doc_id = "d" + std::to_string(k);
    p.ir_rank = static_cast<int>(k) + 1;
    ex.passages.push_back(std::move(p));
  }
  return ex;
}

// Random token string over a tiny vocabulary, sometimes empty.
inline std::string random_phrase(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"new", "york", "city", "the", "a", "area", "red", "Blue", "x,", "."};
  const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
  }
  return s;
}

}  // namespace r3::oracle
