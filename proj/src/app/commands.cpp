#include "r3/app/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "r3/app/pipeline.hpp"
#include "r3/autodiff/checkpoint.hpp"

namespace r3::app {

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::vector<train::QaExample> load_eval_set(const Config& config, const std::string& questions_path,
                                            const std::string& retrieved_path) {
  const auto questions = retrieval::read_questions(questions_path);
  const auto retrieved = retrieval::read_retrieved(retrieved_path);
  const auto table = make_embeddings(config);
  auto data = train::build_dataset(questions, retrieved, table, false);
  if (data.empty()) throw std::invalid_argument("evaluation set is empty: no question has retrieved passages");
  return data;
}

}  // namespace

Config resolve_config(const std::string& config_path, const std::map<std::string, std::string>& overrides) {
  Config c = config_path.empty() ? Config{} : Config::load(config_path);
  for (const auto& [k, v] : overrides) c.set(k, v);
  c.validate();
  return c;
}

void cmd_build_index(const std::string& corpus_path, const std::string& out_path) {
  auto index = retrieval::InvertedIndex::build(retrieval::read_corpus(corpus_path));
  index.save(out_path);
  std::cerr << "indexed " << index.doc_count() << " documents into " << out_path << "\n";
}

void cmd_retrieve(const Config& config, const std::string& index_path, const std::string& questions_path,
                  const std::string& mode, const std::string& out_path) {
  retrieval::QueryMode qm;
  if (mode == "train") qm = retrieval::QueryMode::Train;
  else if (mode == "test") qm = retrieval::QueryMode::Test;
  else throw std::invalid_argument("retrieval mode must be train or test, got '" + mode + "'");
  const auto index = retrieval::InvertedIndex::load(index_path);
  const auto questions = retrieval::read_questions(questions_path);
  const auto sets = retrieve_all(index, questions, config.retrieve_options(qm), config.threads);
  retrieval::write_retrieved(out_path, sets);
  std::size_t with_positive = 0;
  for (const auto& s : sets) with_positive += s.positive_count() > 0 ? 1 : 0;
  std::cerr << "retrieved " << sets.size() << " questions, " << with_positive << " with a positive passage\n";
}

void cmd_train(const Config& config, const std::string& questions_path, const std::string& retrieved_path,
               const std::string& checkpoint_out, const std::string& log_path) {
  const auto questions = retrieval::read_questions(questions_path);
  const auto retrieved = retrieval::read_retrieved(retrieved_path);
  const auto table = make_embeddings(config);
  train::DatasetStats stats;
  const auto data = train::build_dataset(questions, retrieved, table, true, config.top_passages, &stats);
  std::cerr << "training on " << stats.kept << " of " << stats.questions << " questions (" << stats.without_positive
            << " without a positive passage)\n";

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw std::runtime_error("cannot write " + log_path);
  }
  auto sink = [&](const train::StepRecord& r) {
    if (log.is_open()) log << r.to_json() << '\n';
  };

  std::unique_ptr<model::RankerReader> model;
  if (config.mode == "r3" && !config.init_checkpoint.empty()) {
    const auto init = ad::load_checkpoint(config.init_checkpoint);
    model = train_model(config, data, sink, &init.params);
  } else {
    model = train_model(config, data, sink);
  }
  save_model(checkpoint_out, config, *model);
  std::cerr << "saved " << checkpoint_out << "\n";
}

void cmd_evaluate(const std::string& checkpoint, const std::string& questions_path, const std::string& retrieved_path,
                  const std::string& out_path, std::size_t threads) {
  auto loaded = load_model(checkpoint);
  const auto data = load_eval_set(loaded.config, questions_path, retrieved_path);
  const auto report = eval::evaluate(*loaded.model, data, loaded.config.predict_options(), threads);
  write_text(out_path, report.to_json());
  std::cerr << "F1 " << report.f1 << " EM " << report.em << " over " << data.size() << " questions\n";
}

void cmd_analyze(const std::string& checkpoint, const std::string& questions_path, const std::string& retrieved_path,
                 const std::vector<std::size_t>& ks, const std::string& out_path, std::size_t threads) {
  if (ks.empty()) throw std::invalid_argument("analyze needs at least one k");
  for (auto k : ks) {
    if (k == 0) throw std::invalid_argument("k must be positive");
  }
  auto loaded = load_model(checkpoint);
  const auto data = load_eval_set(loaded.config, questions_path, retrieved_path);
  const auto analysis = analyze(*loaded.model, data, loaded.config.predict_options(), ks, threads);
  write_text(out_path, analysis.to_json());
}

void cmd_synth(const SyntheticSpec& spec, const std::string& out_dir) {
  const auto task = generate_synthetic(spec);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  retrieval::write_corpus((dir / "corpus.jsonl").string(), task.corpus);
  retrieval::write_questions((dir / "train.jsonl").string(), task.train);
  retrieval::write_questions((dir / "test.jsonl").string(), task.test);
  std::cerr << "wrote " << task.corpus.size() << " documents, " << task.train.size() << " train and "
            << task.test.size() << " test questions, vocabulary " << task.vocabulary.size() << "\n";
}

}  // namespace r3::app
