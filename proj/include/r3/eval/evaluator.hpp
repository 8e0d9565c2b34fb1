#pragma once

#include <string>
#include <vector>

#include "r3/eval/metrics.hpp"
#include "r3/model/model.hpp"
#include "r3/train/example.hpp"

namespace r3::eval {

/// The reader's best span in one passage, weighted by the policy.
struct Candidate {
  std::size_t passage = 0;  // index into the example's passages
  std::string answer;
  model::SpanLabel span;
  double span_log_prob = 0.0;
  double policy_prob = 0.0;
  double score = 0.0;  // exp(span_log_prob) * policy_prob
  int ir_rank = 0;
  std::string doc_id;
};

struct Prediction {
  std::string question_id;
  std::string answer;  // empty for the no-answer sentinel
  bool no_answer = true;
  std::size_t passage = 0;
  int ir_rank = 0;
  std::string doc_id;
  double score = 0.0;
  double span_log_prob = 0.0;
  double policy_prob = 0.0;
};

/// Where pi comes from at prediction time. A model trained without a ranker
/// (SR) scores every passage with the uniform policy.
enum class PolicySource { Ranker, Uniform };

struct PredictOptions {
  std::size_t max_span_len = 15;
  std::size_t top_passages = 50;
  PolicySource policy = PolicySource::Ranker;
};

/// Per-passage candidates (in passage order) and gamma over the candidate set.
struct ScoredExample {
  std::vector<Candidate> candidates;
  std::vector<double> gamma;
};

/// Scores the first `top_passages` passages: the reader runs on each passage
/// alone, the ranker over all of them at once. Read-only on the model.
ScoredExample score_example(model::RankerReader& model, const train::QaExample& example,
                            const PredictOptions& options);

/// Candidates ordered by score, ties to the lower IR rank.
std::vector<std::size_t> rank_candidates(const std::vector<Candidate>& candidates);

/// Highest-scoring candidate; the sentinel when there are none.
Prediction select_prediction(const std::string& question_id, const std::vector<Candidate>& candidates);

Prediction predict(model::RankerReader& model, const train::QaExample& example, const PredictOptions& options);

struct EvalRecord {
  std::string id;
  Prediction prediction;
  double f1 = 0.0;
  double em = 0.0;
};

struct EvalReport {
  double f1 = 0.0;  // means over questions
  double em = 0.0;
  std::vector<EvalRecord> records;  // dataset order
  std::vector<ScoredExample> scored;

  std::string to_json() const;
};

/// predict + f1_em over a dataset, fanned out over `threads` workers.
EvalReport evaluate(model::RankerReader& model, const std::vector<train::QaExample>& dataset,
                    const PredictOptions& options, std::size_t threads = 1);

/// Fraction of questions whose first k ranked passages include a positive;
/// `ranked_positive[q]` holds the positive flags in ranked order.
std::vector<double> topk_recall(const std::vector<std::vector<bool>>& ranked_positive,
                                const std::vector<std::size_t>& ks);

/// Passage indices ordered by descending score, ties to the lower index.
std::vector<std::size_t> order_by_score(const std::vector<double>& scores);

struct TopK {
  std::size_t k = 0;
  double f1 = 0.0;
  double em = 0.0;
};

/// For each k, the best F1 (and, separately, EM) among the k highest-scoring
/// candidates of each question, averaged over questions.
std::vector<TopK> oracle_topk(const std::vector<std::vector<Candidate>>& candidates,
                              const std::vector<std::vector<std::string>>& golds, const std::vector<std::size_t>& ks);

}  // namespace r3::eval
