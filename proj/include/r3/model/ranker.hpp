#pragma once

#include <random>
#include <span>
#include <vector>

#include "r3/autodiff/graph.hpp"

namespace r3::model {

/// Graph handles of the selection policy over N passages.
struct PolicyVars {
  ad::Var logits;  // N x 1, w_c C
  ad::Var gamma;   // N x 1, softmax(logits)
};

/// gamma over passages; entries aligned with the input passage order.
struct PolicyDistribution {
  std::vector<double> gamma;
  std::vector<std::size_t> passage_ids;
};

/// u_i = max-pool(H_rank_i); C = tanh(Wc [u_1 .. u_N] + bc ⊗ e_N);
/// gamma = softmax(wc C). `wc` is a 1 x l row. Throws for N = 0.
PolicyVars score_passages(ad::Graph& g, std::span<const ad::Var> h_rank, ad::Var wc_matrix, ad::Var bc,
                          ad::Var wc_row);

PolicyDistribution to_distribution(const ad::Graph& g, const PolicyVars& policy);

enum class SampleMode { Train, Inference };

/// Train mode draws from gamma until a positive passage comes up, which has
/// the law of gamma restricted to `positives` and renormalized. Inference
/// mode returns the argmax of gamma (lowest index on ties); it is not used to
/// pick passages at prediction time, where the whole gamma is scored.
/// Throws std::invalid_argument in train mode without positives.
std::size_t sample_passage(const std::vector<double>& gamma, const std::vector<bool>& positives, SampleMode mode,
                           std::mt19937_64& rng);

/// log pi(tau | q) = log gamma_tau. With `restrict_to` set, the policy is
/// renormalized over the flagged passages first.
ad::Var log_policy(ad::Graph& g, const PolicyVars& policy, std::size_t tau,
                   const std::vector<bool>* restrict_to = nullptr);

}  // namespace r3::model
