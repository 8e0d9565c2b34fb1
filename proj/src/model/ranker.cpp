#include "r3/model/ranker.hpp"

#include <stdexcept>

namespace r3::model {

PolicyVars score_passages(ad::Graph& g, std::span<const ad::Var> h_rank, ad::Var wc_matrix, ad::Var bc,
                          ad::Var wc_row) {
  if (h_rank.empty()) throw std::invalid_argument("score_passages: no passages");
  std::vector<ad::Var> pooled;
  pooled.reserve(h_rank.size());
  for (ad::Var h : h_rank) pooled.push_back(g.max_cols(h));
  const ad::Var u = g.concat_cols(std::span<const ad::Var>(pooled));
  const ad::Var c = g.tanh(g.add_column(g.matmul(wc_matrix, u), bc));
  PolicyVars out;
  out.logits = g.transpose(g.matmul(wc_row, c));
  out.gamma = g.softmax_cols(out.logits);
  return out;
}

PolicyDistribution to_distribution(const ad::Graph& g, const PolicyVars& policy) {
  const auto& v = g.value(policy.gamma);
  PolicyDistribution d;
  d.gamma.assign(v.data(), v.data() + v.size());
  d.passage_ids.resize(d.gamma.size());
  for (std::size_t i = 0; i < d.passage_ids.size(); ++i) d.passage_ids[i] = i;
  return d;
}

std::size_t sample_passage(const std::vector<double>& gamma, const std::vector<bool>& positives, SampleMode mode,
                           std::mt19937_64& rng) {
  if (gamma.empty()) throw std::invalid_argument("sample_passage: empty policy");
  if (mode == SampleMode::Inference) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < gamma.size(); ++i) {
      if (gamma[i] > gamma[best]) best = i;
    }
    return best;
  }
  if (positives.size() != gamma.size()) throw std::invalid_argument("sample_passage: flag count mismatch");
  double positive_mass = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (positives[i]) positive_mass += gamma[i];
  }
  if (positive_mass <= 0.0) throw std::invalid_argument("sample_passage: no positive passage to sample");

  std::discrete_distribution<std::size_t> draw(gamma.begin(), gamma.end());
  constexpr int kMaxRejections = 10000;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const std::size_t tau = draw(rng);
    if (positives[tau]) return tau;
  }
  // Same law as the rejection loop, drawn directly.
  std::vector<double> restricted(gamma.size(), 0.0);
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (positives[i]) restricted[i] = gamma[i];
  }
  std::discrete_distribution<std::size_t> direct(restricted.begin(), restricted.end());
  return direct(rng);
}

ad::Var log_policy(ad::Graph& g, const PolicyVars& policy, std::size_t tau, const std::vector<bool>* restrict_to) {
  const ad::Var log_gamma = g.scale(g.nll_pick(policy.logits, static_cast<Eigen::Index>(tau)), -1.0);
  if (restrict_to == nullptr) return log_gamma;
  const auto n = g.value(policy.gamma).rows();
  if (static_cast<Eigen::Index>(restrict_to->size()) != n) {
    throw std::invalid_argument("log_policy: restriction mask has the wrong length");
  }
  if (!(*restrict_to)[tau]) throw std::invalid_argument("log_policy: tau is outside the restriction");
  ad::Matrix mask = ad::Matrix::Zero(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) mask(i, 0) = (*restrict_to)[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  const ad::Var mass = g.sum(g.mul(policy.gamma, g.constant(std::move(mask))));
  return g.sub(log_gamma, g.log(mass));
}

}  // namespace r3::model
