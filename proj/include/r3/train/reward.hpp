#pragma once

#include <string>
#include <vector>

#include "r3/text/tokenizer.hpp"

namespace r3::train {

enum class RewardKind { Exact, Overlap, Miss };

struct RewardValue {
  double value = -1.0;
  RewardKind kind = RewardKind::Miss;
};

/// Bag-of-tokens F1 between two token lists (0 when either is empty).
double token_f1(const text::Tokens& gold, const text::Tokens& pred);

/// 2 for an identical token sequence, word-level F1 when the two share a
/// token, -1 otherwise (including an empty prediction).
RewardValue reward(const std::string& gold, const std::string& pred);

/// Best reward over several gold answers.
RewardValue best_reward(const std::vector<std::string>& golds, const std::string& pred);

}  // namespace r3::train
