#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "r3/autodiff/tensor.hpp"
#include "r3/text/tokenizer.hpp"

namespace r3::text {

/// Tokens paired with their row in an EmbeddingTable; kUnknown for OOV.
struct TokenSequence {
  static constexpr std::int64_t kUnknown = -1;
  Tokens tokens;
  std::vector<std::int64_t> ids;
};

/// Fixed word vectors. Immutable once constructed, so concurrent lookups are
/// safe. Absent tokens map to the all-zero vector, unless the table is
/// synthetic, in which case every token has a deterministic pseudo-random
/// vector derived from a hash of the token and the seed.
class EmbeddingTable {
 public:
  struct LoadStats {
    std::size_t loaded = 0;
    std::size_t malformed = 0;
    std::size_t duplicates = 0;
  };

  /// One token followed by `dimension` reals per line. Malformed lines are
  /// skipped and counted; duplicates keep their first occurrence. Throws if
  /// the file is unreadable or yields no usable line.
  static EmbeddingTable load(const std::string& path, int dimension, LoadStats* stats = nullptr);

  static EmbeddingTable synthetic(int dimension, std::uint64_t seed);

  int dimension() const { return dimension_; }
  std::size_t size() const { return ids_.size(); }
  bool is_synthetic() const { return synthetic_seed_.has_value(); }

  bool contains(const std::string& token) const;
  Eigen::VectorXd vector(const std::string& token) const;
  TokenSequence index(const Tokens& tokens) const;

 private:
  int dimension_ = 0;
  std::unordered_map<std::string, std::int64_t> ids_;
  ad::Matrix vectors_;  // dimension x size
  std::optional<std::uint64_t> synthetic_seed_;
};

/// d x T matrix whose column t is the vector of token t. Throws
/// std::invalid_argument for an empty sequence.
ad::Matrix embed(const TokenSequence& seq, const EmbeddingTable& table);

}  // namespace r3::text
