#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "r3/retrieval/corpus.hpp"

namespace r3::app {

/// Shape of a generated open-domain QA task. Each question "who is the R of
/// S ?" owns one article holding:
///   - one sentence that states the fact ("A is the R of S ."),
///   - `positives - 1` sentences that mention A next to another name without
///     stating the fact ("B met A in S near the R of S ."),
///   - `lexical_decoys` sentences that repeat the question words but name
///     someone else ("B saw S near the R of S ."), placed first,
///   - `wrong_relation` sentences stating someone else holds another
///     relation of S ("B is the R2 of S ."),
///   - same-template sentences without A to fill `sentences_per_article`.
/// Articles of other questions about the same S or R supply further
/// distractors at retrieval time.
struct SyntheticSpec {
  std::size_t vocab_size = 120;
  std::size_t relations = 10;
  std::size_t train_questions = 300;
  std::size_t test_questions = 100;
  std::size_t sentences_per_article = 8;
  std::size_t positives = 3;
  std::size_t lexical_decoys = 2;
  std::size_t wrong_relation = 2;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument when the sizes cannot be met.
  void validate() const;
};

struct SyntheticTask {
  std::vector<retrieval::Document> corpus;
  std::vector<retrieval::Question> train;
  std::vector<retrieval::Question> test;
  std::vector<std::string> vocabulary;
};

SyntheticTask generate_synthetic(const SyntheticSpec& spec);

}  // namespace r3::app
