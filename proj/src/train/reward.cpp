#include "r3/train/reward.hpp"

#include <algorithm>
#include <map>

namespace r3::train {

double token_f1(const text::Tokens& gold, const text::Tokens& pred) {
  if (gold.empty() || pred.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : gold) ++counts[t];
  int common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

RewardValue reward(const std::string& gold, const std::string& pred) {
  const auto g = text::tokenize(gold);
  const auto p = text::tokenize(pred);
  if (p.empty()) return {-1.0, RewardKind::Miss};
  if (g == p) return {2.0, RewardKind::Exact};
  const double f1 = token_f1(g, p);
  if (f1 > 0.0) return {f1, RewardKind::Overlap};
  return {-1.0, RewardKind::Miss};
}

RewardValue best_reward(const std::vector<std::string>& golds, const std::string& pred) {
  RewardValue best{-1.0, RewardKind::Miss};
  for (const auto& g : golds) {
    const auto r = reward(g, pred);
    if (r.value > best.value) best = r;
  }
  return best;
}

}  // namespace r3::train
