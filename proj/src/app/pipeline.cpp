#include "r3/app/pipeline.hpp"

#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "r3/autodiff/checkpoint.hpp"

namespace r3::app {

text::EmbeddingTable make_embeddings(const Config& config) {
  if (config.embeddings.empty()) return text::EmbeddingTable::synthetic(config.embed_dim, config.embed_seed);
  return text::EmbeddingTable::load(config.embeddings, config.embed_dim);
}

std::vector<retrieval::RetrievedSet> retrieve_all(const retrieval::InvertedIndex& index,
                                                  const std::vector<retrieval::Question>& questions,
                                                  const retrieval::RetrieveOptions& options, std::size_t threads) {
  std::vector<retrieval::RetrievedSet> out(questions.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < questions.size() && !failed; i = next++) {
        out[i] = retrieval::retrieve(index, questions[i], options);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, questions.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::unique_ptr<model::RankerReader> train_model(const Config& config, const std::vector<train::QaExample>& data,
                                                 const StepSink& on_step, const ad::ParameterStore* init) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("no training examples");
  const auto mode = train::parse_train_mode(config.mode);
  auto model = std::make_unique<model::RankerReader>(config.model_config(), config.seed);
  train::Trainer trainer(*model, config.train_options());
  if (mode == train::TrainMode::R3) {
    if (init != nullptr) {
      train::pretrain_init(*model, *init, &trainer);
    } else {
      trainer.train(data, train::TrainMode::SR2, config.pretrain_epochs, on_step);
      trainer.reset_optimizer();
    }
  }
  trainer.train(data, mode, config.epochs, on_step);
  return model;
}

void save_model(const std::string& path, const Config& config, const model::RankerReader& model,
                const ad::AdamaxState* optimizer) {
  ad::Checkpoint ckpt;
  ckpt.metadata = config.to_text();
  ckpt.params = model.params();
  if (optimizer != nullptr) ckpt.optimizer = *optimizer;
  ad::save_checkpoint(path, ckpt);
}

LoadedModel load_model(const std::string& path) {
  auto ckpt = ad::load_checkpoint(path);
  LoadedModel out;
  out.config = Config::parse(ckpt.metadata);
  out.config.validate();
  out.model = std::make_unique<model::RankerReader>(out.config.model_config(), out.config.seed);
  ad::copy_parameters(ckpt.params, out.model->params());
  return out;
}

std::vector<std::vector<bool>> ir_ranking(const std::vector<train::QaExample>& dataset, std::size_t top) {
  std::vector<std::vector<bool>> out;
  for (const auto& ex : dataset) {
    std::vector<double> scores;
    const std::size_t n = std::min(top, ex.passages.size());
    // Passages are stored in IR order already; sort by rank to be explicit.
    for (std::size_t i = 0; i < n; ++i) scores.push_back(-static_cast<double>(ex.passages[i].ir_rank));
    std::vector<bool> flags;
    for (auto i : eval::order_by_score(scores)) flags.push_back(ex.passages[i].positive);
    out.push_back(std::move(flags));
  }
  return out;
}

std::vector<std::vector<bool>> gamma_ranking(const std::vector<train::QaExample>& dataset,
                                             const std::vector<eval::ScoredExample>& scored) {
  std::vector<std::vector<bool>> out;
  for (std::size_t q = 0; q < dataset.size(); ++q) {
    std::vector<bool> flags;
    for (auto i : eval::order_by_score(scored[q].gamma)) flags.push_back(dataset[q].passages[i].positive);
    out.push_back(std::move(flags));
  }
  return out;
}

Analysis analyze(model::RankerReader& model, const std::vector<train::QaExample>& dataset,
                 const eval::PredictOptions& options, const std::vector<std::size_t>& ks, std::size_t threads) {
  Analysis a;
  a.ks = ks;
  a.report = eval::evaluate(model, dataset, options, threads);
  a.ir_recall = eval::topk_recall(ir_ranking(dataset, options.top_passages), ks);
  if (options.policy == eval::PolicySource::Ranker) {
    a.ranker_recall = eval::topk_recall(gamma_ranking(dataset, a.report.scored), ks);
  }
  std::vector<std::vector<eval::Candidate>> candidates;
  std::vector<std::vector<std::string>> golds;
  for (std::size_t q = 0; q < dataset.size(); ++q) {
    candidates.push_back(a.report.scored[q].candidates);
    golds.push_back(dataset[q].answers);
  }
  a.oracle = eval::oracle_topk(candidates, golds, ks);
  return a;
}

std::string Analysis::to_json() const {
  nlohmann::ordered_json j;
  j["questions"] = report.records.size();
  j["f1"] = report.f1;
  j["em"] = report.em;
  auto recall = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    nlohmann::ordered_json row;
    row["k"] = ks[i];
    row["ir"] = ir_recall[i];
    if (!ranker_recall.empty()) row["ranker"] = ranker_recall[i];
    recall.push_back(std::move(row));
  }
  j["topk_recall"] = std::move(recall);
  auto oracle_rows = nlohmann::ordered_json::array();
  for (const auto& t : oracle) oracle_rows.push_back({{"k", t.k}, {"f1", t.f1}, {"em", t.em}});
  j["oracle_topk"] = std::move(oracle_rows);
  return j.dump(2);
}

}  // namespace r3::app
