#pragma once

#include <string>
#include <vector>

namespace r3::eval {

/// Lowercase, drop ASCII punctuation, drop the words a/an/the, collapse
/// whitespace.
std::string normalize_answer(const std::string& s);

struct F1Em {
  double f1 = 0.0;
  double em = 0.0;
};

/// Best F1 and EM of `prediction` against any gold answer. An empty gold list
/// scores (0, 0). When either side normalizes to nothing, F1 equals EM.
F1Em f1_em(const std::string& prediction, const std::vector<std::string>& golds);

}  // namespace r3::eval
