#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "r3/app/config.hpp"
#include "r3/eval/evaluator.hpp"
#include "r3/retrieval/index.hpp"
#include "r3/retrieval/retriever.hpp"
#include "r3/text/embeddings.hpp"
#include "r3/train/trainer.hpp"

namespace r3::app {

/// Vectors from `config.embeddings`, or synthetic ones when it is empty.
text::EmbeddingTable make_embeddings(const Config& config);

/// retrieve() for every question, spread over `threads` workers; output in
/// question order.
std::vector<retrieval::RetrievedSet> retrieve_all(const retrieval::InvertedIndex& index,
                                                  const std::vector<retrieval::Question>& questions,
                                                  const retrieval::RetrieveOptions& options, std::size_t threads);

using StepSink = std::function<void(const train::StepRecord&)>;

/// Trains a fresh model in `config.mode`. For r3 the model starts from `init`
/// when given, otherwise from `config.pretrain_epochs` of SR2 training, and
/// then runs `config.epochs` of reinforced training.
std::unique_ptr<model::RankerReader> train_model(const Config& config, const std::vector<train::QaExample>& data,
                                                 const StepSink& on_step = {},
                                                 const ad::ParameterStore* init = nullptr);

/// Checkpoint metadata is the config text, so a checkpoint alone rebuilds
/// the model.
void save_model(const std::string& path, const Config& config, const model::RankerReader& model,
                const ad::AdamaxState* optimizer = nullptr);

struct LoadedModel {
  Config config;
  std::unique_ptr<model::RankerReader> model;
};

LoadedModel load_model(const std::string& path);

/// Ranker analysis: TOP-k recall under the IR order and under gamma, plus the
/// oracle TOP-k F1/EM table.
struct Analysis {
  std::vector<std::size_t> ks;
  std::vector<double> ir_recall;
  std::vector<double> ranker_recall;  // empty for a model without a ranker
  std::vector<eval::TopK> oracle;
  eval::EvalReport report;

  std::string to_json() const;
};

Analysis analyze(model::RankerReader& model, const std::vector<train::QaExample>& dataset,
                 const eval::PredictOptions& options, const std::vector<std::size_t>& ks, std::size_t threads);

/// Positive flags of each example in IR order.
std::vector<std::vector<bool>> ir_ranking(const std::vector<train::QaExample>& dataset, std::size_t top);

/// Positive flags of each example ordered by gamma.
std::vector<std::vector<bool>> gamma_ranking(const std::vector<train::QaExample>& dataset,
                                             const std::vector<eval::ScoredExample>& scored);

}  // namespace r3::app
