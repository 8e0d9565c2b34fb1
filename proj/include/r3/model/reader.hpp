#pragma once

#include <span>
#include <vector>

#include "r3/autodiff/graph.hpp"

namespace r3::model {

/// W, b, w of one pointer head (start or end).
struct SpanHeadVars {
  ad::Var w_matrix;  // l x l
  ad::Var bias;      // l x 1
  ad::Var w_row;     // 1 x l
};

/// Graph handles for start/end distributions over V concatenated words.
struct SpanVars {
  ad::Var start_logits;  // V x 1
  ad::Var end_logits;
  ad::Var start;  // softmax over all V words
  ad::Var end;
  std::vector<std::size_t> offsets;  // first concatenated index of each passage
  std::vector<std::size_t> lengths;
};

/// Span endpoints, both inclusive, relative to one passage.
struct SpanLabel {
  std::size_t passage = 0;
  std::size_t start = 0;
  std::size_t end = 0;
};

/// Plain-value copy of a SpanVars, with the segment map.
struct SpanDistribution {
  std::vector<double> start;
  std::vector<double> end;
  std::vector<double> log_start;
  std::vector<double> log_end;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> lengths;

  std::size_t size() const { return start.size(); }
  /// (passage, offset within passage) of concatenated word `v`.
  std::pair<std::size_t, std::size_t> locate(std::size_t v) const;
};

/// F = tanh(W [H_1 .. H_n] + b ⊗ e_V); beta = softmax(w F), once per head.
/// Throws std::invalid_argument when there are no words.
SpanVars span_distributions(ad::Graph& g, std::span<const ad::Var> h_read, const SpanHeadVars& start,
                            const SpanHeadVars& end);

SpanDistribution to_distribution(const ad::Graph& g, const SpanVars& spans);

/// -log beta_start[label start] - log beta_end[label end]. Throws
/// std::invalid_argument when the label does not fit inside its passage.
ad::Var span_loss(ad::Graph& g, const SpanVars& spans, const SpanLabel& label);

struct BestSpan {
  SpanLabel label;
  double log_prob = 0.0;  // log beta_start + log beta_end
};

/// argmax of beta_start[i] * beta_end[j] over i <= j < i + max_len inside one
/// passage; ties go to the smaller i, then the smaller j.
BestSpan extract_best_span(const SpanDistribution& dist, std::size_t max_len);

}  // namespace r3::model
