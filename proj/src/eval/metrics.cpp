#include "r3/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace r3::eval {

namespace {

std::vector<std::string> normalized_tokens(const std::string& s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (unsigned char c : s) {
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  std::istringstream in(cleaned);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) {
    if (w == "a" || w == "an" || w == "the") continue;
    out.push_back(w);
  }
  return out;
}

std::string joined(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

double overlap_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return pred == gold ? 1.0 : 0.0;
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
  const double p = static_cast<double>(common) / static_cast<double>(pred.size());
  const double r = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * p * r / (p + r);
}

}  // namespace

std::string normalize_answer(const std::string& s) { return joined(normalized_tokens(s)); }

F1Em f1_em(const std::string& prediction, const std::vector<std::string>& golds) {
  F1Em best;
  const auto pred = normalized_tokens(prediction);
  for (const auto& g : golds) {
    const auto gold = normalized_tokens(g);
    best.f1 = std::max(best.f1, overlap_f1(pred, gold));
    if (pred == gold) best.em = 1.0;
  }
  return best;
}

}  // namespace r3::eval
