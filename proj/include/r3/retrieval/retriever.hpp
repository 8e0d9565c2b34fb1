#pragma once

#include <string>
#include <vector>

#include "r3/retrieval/corpus.hpp"
#include "r3/retrieval/index.hpp"
#include "r3/text/tokenizer.hpp"

namespace r3::retrieval {

enum class QueryMode { Train, Test };

/// Splits at '.', '!' or '?' when followed by whitespace and then an
/// uppercase letter or an opening character. A '.' ending a known
/// abbreviation or a single-letter initial does not split.
std::vector<std::string> split_sentences(const std::string& text);

struct ScoredSentence {
  std::size_t index = 0;  // position in the candidate pool
  double score = 0.0;
};

/// tf-idf idf over a pool of n sentences: ln((1 + n) / (1 + df)) + 1.
double tfidf_idf(std::size_t pool_size, std::size_t df);

/// Score = sum over distinct query terms of tf(term, sentence) * idf(term),
/// idf taken over `pool`. Descending score, ties by pool order, at most top_s.
std::vector<ScoredSentence> rank_sentences_tfidf(const std::vector<text::Tokens>& pool, const text::Tokens& query,
                                                 std::size_t top_s);

/// Training queries with exactly one distinct answer get the answer tokens
/// appended; everything else queries with the question alone.
text::Tokens make_training_query(const std::string& question, const std::vector<std::string>& answers, QueryMode mode);

/// True iff the tokens of some answer occur contiguously in `sentence`.
bool contains_answer(const text::Tokens& sentence, const std::vector<std::string>& answers);

struct Passage {
  std::string text;
  std::string doc_id;
  int ir_rank = 0;  // 1-based
  double ir_score = 0.0;
  bool positive = false;
};

struct RetrievedSet {
  std::string question_id;
  std::vector<Passage> passages;

  std::size_t positive_count() const;
};

struct RetrieveOptions {
  std::size_t top_passages = 10;  // N
  std::size_t top_articles = 20;  // top_a
  std::size_t top_sentences = 50; // top_s
  QueryMode mode = QueryMode::Test;
  Bm25Params bm25;
};

/// search_bm25 -> split_sentences -> dedup -> rank_sentences_tfidf -> top N.
/// Positive flags are computed against the question's answers whenever any
/// are present. Throws std::invalid_argument unless N <= top_s.
RetrievedSet retrieve(const InvertedIndex& index, const Question& question, const RetrieveOptions& options);

std::vector<RetrievedSet> read_retrieved(const std::string& path);
void write_retrieved(const std::string& path, const std::vector<RetrievedSet>& sets);

}  // namespace r3::retrieval
