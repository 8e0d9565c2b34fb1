#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "r3/eval/evaluator.hpp"
#include "r3/model/model.hpp"
#include "r3/retrieval/retriever.hpp"
#include "r3/train/trainer.hpp"

namespace r3::app {

/// Every tunable of a run. Stored as flat `key = value` text; each key can
/// also be overridden from the command line.
struct Config {
  int hidden = 16;
  int embed_dim = 16;
  int reader_layers = 3;
  int ranker_layers = 1;
  double lr = 0.002;
  std::size_t batch_size = 8;
  double dropout = 0.2;
  std::size_t sample_k = 10;
  std::size_t min_negatives = 2;
  std::size_t test_top = 50;
  std::size_t max_span_len = 15;
  std::uint64_t seed = 1;
  std::string mode = "r3";
  std::string precision = "f64";
  std::size_t epochs = 6;
  std::size_t pretrain_epochs = 2;
  double clip_norm = 5.0;
  double kl_weight = 1.0;
  bool restricted_policy = false;
  std::size_t top_articles = 20;
  std::size_t top_sentences = 50;
  std::size_t top_passages = 10;
  std::size_t threads = 1;
  std::uint64_t embed_seed = 7;
  std::string embeddings;       // word-vector file; empty = synthetic vectors
  std::string init_checkpoint;  // r3 starts from here instead of pretraining

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;

  /// Sets one key from its text form; throws on an unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  std::string to_text() const;
  static Config parse(const std::string& text);
  static Config load(const std::string& path);
  void save(const std::string& path) const;

  model::ModelConfig model_config() const;
  train::TrainOptions train_options() const;
  retrieval::RetrieveOptions retrieve_options(retrieval::QueryMode mode) const;
  eval::PredictOptions predict_options() const;
};

}  // namespace r3::app
