#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "r3/retrieval/corpus.hpp"
#include "r3/text/tokenizer.hpp"

namespace r3::retrieval {

struct Posting {
  std::uint32_t doc = 0;  // ordinal; ordinals follow ascending document id
  std::uint32_t tf = 0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct ScoredDoc {
  std::uint32_t doc = 0;
  double score = 0.0;
};

/// Document-level inverted index over the tokenized title and text of each
/// document. Documents are stored (like Lucene stored fields) so retrieved
/// articles can later be split into sentences.
class InvertedIndex {
 public:
  static constexpr int kFormatVersion = 1;

  /// Throws std::invalid_argument on an empty corpus, a duplicate id, or a
  /// document with no tokens.
  static InvertedIndex build(std::vector<Document> docs);

  static InvertedIndex load(const std::string& path);
  void save(const std::string& path) const;
  std::string serialize() const;

  std::size_t doc_count() const { return docs_.size(); }
  double average_length() const { return avg_length_; }
  std::uint32_t length(std::uint32_t doc) const { return lengths_.at(doc); }
  const Document& document(std::uint32_t doc) const { return docs_.at(doc); }

  /// Empty when the term is absent.
  const std::vector<Posting>& postings(const std::string& term) const;
  std::size_t document_frequency(const std::string& term) const { return postings(term).size(); }
  const std::map<std::string, std::vector<Posting>>& all_postings() const { return postings_; }

 private:
  void finalize_stats();

  std::vector<Document> docs_;
  std::vector<std::uint32_t> lengths_;
  std::map<std::string, std::vector<Posting>> postings_;
  double avg_length_ = 0.0;
};

/// Okapi BM25 idf with the non-negative form ln(1 + (n - df + 0.5) / (df + 0.5)).
double bm25_idf(std::size_t doc_count, std::size_t df);

/// Scores documents matching at least one distinct query term; descending
/// score, ties by ascending document id; at most `top_a` results.
std::vector<ScoredDoc> search_bm25(const InvertedIndex& index, const text::Tokens& query, std::size_t top_a,
                                   const Bm25Params& params = {});

}  // namespace r3::retrieval
