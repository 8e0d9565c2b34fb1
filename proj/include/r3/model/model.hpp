#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "r3/autodiff/graph.hpp"
#include "r3/autodiff/tensor.hpp"
#include "r3/model/matcher.hpp"
#include "r3/model/ranker.hpp"
#include "r3/model/reader.hpp"

namespace r3::model {

struct ModelConfig {
  int embed_dim = 16;
  int hidden = 16;  // l; each LSTM direction has l / 2 units
  int reader_layers = 3;
  int ranker_layers = 1;
  double init_range = 0.1;
  double forget_bias = 1.0;

  /// Throws std::invalid_argument if l is odd or any size is non-positive.
  void validate() const;
};

/// Parameter blocks, by name prefix.
namespace block {
inline constexpr const char* kEncoder = "encoder.";
inline constexpr const char* kAttend = "attend.";
inline constexpr const char* kMatch = "match.";
inline constexpr const char* kRankAggregate = "rank_agg.";
inline constexpr const char* kReadAggregate = "read_agg.";
inline constexpr const char* kRanker = "ranker.";
inline constexpr const char* kReader = "reader.";
}  // namespace block

/// The shared Match-LSTM encoder with separate ranker and reader stacks.
/// Owns its parameters; the word embeddings are outside the model and fixed.
class RankerReader {
 public:
  RankerReader(const ModelConfig& config, std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }

  /// Re-draws every parameter from the initialization distribution.
  void initialize(std::uint64_t seed);

 private:
  void add_bilstm(const std::string& prefix, int input_dim);

  ModelConfig config_;
  ad::ParameterStore params_;
};

/// Inverted dropout on encoder outputs and on M. Inactive when `rng` is null
/// or `rate` is zero (evaluation).
struct Dropout {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;
};

/// Binds a model to one Graph and builds the forward computation. Each
/// parameter is entered into the graph once, on first use.
class Forward {
 public:
  Forward(RankerReader& model, ad::Graph& graph, Dropout dropout = {});

  ad::Graph& graph() { return graph_; }
  ad::Var param(const std::string& name);

  /// BiLSTM encoding of an embedded sequence (d x T) -> l x T.
  ad::Var encode(const ad::Matrix& embedded);
  /// Attention + matching for one passage against an encoded question.
  MatchRepresentation match(ad::Var hq, ad::Var hp);
  void add_rank_view(MatchRepresentation& rep);
  void add_read_view(MatchRepresentation& rep);

  PolicyVars policy(std::span<const ad::Var> h_rank);
  SpanVars spans(std::span<const ad::Var> h_read);

  BiLstmVars bilstm(const std::string& prefix);
  SpanHeadVars head(const std::string& prefix);

 private:
  ad::Var dropout(ad::Var x);

  RankerReader& model_;
  ad::Graph& graph_;
  Dropout dropout_;
  std::unordered_map<std::string, ad::Var> bound_;
};

}  // namespace r3::model
