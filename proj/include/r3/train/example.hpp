#pragma once

#include <string>
#include <vector>

#include "r3/autodiff/tensor.hpp"
#include "r3/retrieval/corpus.hpp"
#include "r3/retrieval/retriever.hpp"
#include "r3/text/embeddings.hpp"

namespace r3::train {

/// Token span [start, end], inclusive, inside one passage.
struct Occurrence {
  std::size_t start = 0;
  std::size_t end = 0;
};

struct PassageInput {
  text::Tokens tokens;
  ad::Matrix embedded;  // d x tokens.size()
  std::string doc_id;
  int ir_rank = 0;
  double ir_score = 0.0;
  bool positive = false;
  /// Every exact token-level match of any gold answer. Non-empty iff positive.
  std::vector<Occurrence> answer_spans;
};

/// A question with its retrieved passages, tokenized and embedded.
struct QaExample {
  std::string id;
  text::Tokens question;
  ad::Matrix question_embedded;
  std::vector<std::string> answers;
  std::vector<PassageInput> passages;

  std::size_t positive_count() const;
};

/// Joins a question with its retrieved set. Passages that tokenize to nothing
/// are dropped and at most `max_passages` are kept (0 keeps all).
QaExample build_example(const retrieval::Question& question, const retrieval::RetrievedSet& retrieved,
                        const text::EmbeddingTable& table, std::size_t max_passages = 0);

struct DatasetStats {
  std::size_t questions = 0;
  std::size_t kept = 0;
  std::size_t missing_retrieval = 0;
  std::size_t without_positive = 0;
  std::size_t without_passages = 0;
};

/// Builds examples for every question with a retrieved set. With
/// `require_positive` (training) questions lacking any positive passage are
/// dropped; otherwise only questions with no passages at all are.
std::vector<QaExample> build_dataset(const std::vector<retrieval::Question>& questions,
                                     const std::vector<retrieval::RetrievedSet>& retrieved,
                                     const text::EmbeddingTable& table, bool require_positive,
                                     std::size_t max_passages = 0, DatasetStats* stats = nullptr);

}  // namespace r3::train
