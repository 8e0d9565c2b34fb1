#include "r3/model/reader.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace r3::model {

namespace {

ad::Var head_logits(ad::Graph& g, ad::Var h, const SpanHeadVars& head) {
  const ad::Var f = g.tanh(g.add_column(g.matmul(head.w_matrix, h), head.bias));
  return g.transpose(g.matmul(head.w_row, f));
}

std::vector<double> column(const ad::Matrix& m) { return {m.data(), m.data() + m.size()}; }

}  // namespace

std::pair<std::size_t, std::size_t> SpanDistribution::locate(std::size_t v) const {
  for (std::size_t p = 0; p < offsets.size(); ++p) {
    if (v >= offsets[p] && v < offsets[p] + lengths[p]) return {p, v - offsets[p]};
  }
  throw std::out_of_range("word index " + std::to_string(v) + " outside every segment");
}

SpanVars span_distributions(ad::Graph& g, std::span<const ad::Var> h_read, const SpanHeadVars& start,
                            const SpanHeadVars& end) {
  SpanVars out;
  std::size_t total = 0;
  for (ad::Var h : h_read) {
    const auto len = static_cast<std::size_t>(g.value(h).cols());
    out.offsets.push_back(total);
    out.lengths.push_back(len);
    total += len;
  }
  if (total == 0) throw std::invalid_argument("span_distributions: no words");
  const ad::Var h = h_read.size() == 1 ? h_read[0] : g.concat_cols(h_read);
  out.start_logits = head_logits(g, h, start);
  out.end_logits = head_logits(g, h, end);
  out.start = g.softmax_cols(out.start_logits);
  out.end = g.softmax_cols(out.end_logits);
  return out;
}

SpanDistribution to_distribution(const ad::Graph& g, const SpanVars& spans) {
  SpanDistribution d;
  d.start = column(g.value(spans.start));
  d.end = column(g.value(spans.end));
  const ad::Matrix& zs = g.value(spans.start_logits);
  const ad::Matrix& ze = g.value(spans.end_logits);
  auto log_softmax = [](const ad::Matrix& z) {
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    std::vector<double> out(static_cast<std::size_t>(z.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) out[static_cast<std::size_t>(i)] = z(i) - lse;
    return out;
  };
  d.log_start = log_softmax(zs);
  d.log_end = log_softmax(ze);
  d.offsets = spans.offsets;
  d.lengths = spans.lengths;
  return d;
}

ad::Var span_loss(ad::Graph& g, const SpanVars& spans, const SpanLabel& label) {
  if (label.passage >= spans.offsets.size() || label.start > label.end ||
      label.end >= spans.lengths[label.passage]) {
    throw std::invalid_argument("span_loss: label [" + std::to_string(label.start) + ", " +
                                std::to_string(label.end) + "] outside passage " + std::to_string(label.passage));
  }
  const auto base = spans.offsets[label.passage];
  const ad::Var ls = g.nll_pick(spans.start_logits, static_cast<Eigen::Index>(base + label.start));
  const ad::Var le = g.nll_pick(spans.end_logits, static_cast<Eigen::Index>(base + label.end));
  return g.add(ls, le);
}

BestSpan extract_best_span(const SpanDistribution& dist, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("extract_best_span: max_len must be at least 1");
  if (dist.size() == 0) throw std::invalid_argument("extract_best_span: empty distribution");
  BestSpan best;
  double best_score = -1.0;
  for (std::size_t p = 0; p < dist.offsets.size(); ++p) {
    const std::size_t base = dist.offsets[p];
    const std::size_t len = dist.lengths[p];
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t last = std::min(len, i + max_len);
      for (std::size_t j = i; j < last; ++j) {
        const double score = dist.start[base + i] * dist.end[base + j];
        if (score > best_score) {
          best_score = score;
          best.label = {p, i, j};
          best.log_prob = dist.log_start[base + i] + dist.log_end[base + j];
        }
      }
    }
  }
  return best;
}

}  // namespace r3::model
