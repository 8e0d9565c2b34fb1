// r3qa: command-line driver for indexing, retrieval, training and evaluation.

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "r3/app/commands.hpp"

namespace {

// Adds --<key> for every config key; only keys given on the command line are
// recorded.
void add_config_flags(CLI::App* cmd, std::string& config_path, std::map<std::string, std::string>& overrides) {
  cmd->add_option("--config", config_path, "flat key = value config file");
  for (const auto& key : r3::app::Config::keys()) {
    cmd->add_option_function<std::string>(
        "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; }, "override config key " + key);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-domain QA with a passage ranker and span reader"};
  app.require_subcommand(1);

  std::string corpus, out, index, questions, retrieved, checkpoint, log, mode = "test", config_path, out_dir;
  std::map<std::string, std::string> overrides;
  std::vector<std::size_t> ks = {1, 3, 5};
  std::size_t threads = 1;
  r3::app::SyntheticSpec spec;

  auto* build = app.add_subcommand("build-index", "index a JSON-lines corpus");
  build->add_option("--corpus", corpus)->required();
  build->add_option("--out", out)->required();

  auto* ret = app.add_subcommand("retrieve", "retrieve passages for each question");
  ret->add_option("--index", index)->required();
  ret->add_option("--questions", questions)->required();
  ret->add_option("--query-mode", mode, "train (answer-augmented query) or test")->capture_default_str();
  ret->add_option("--out", out)->required();
  add_config_flags(ret, config_path, overrides);

  auto* tr = app.add_subcommand("train", "train a model (sr, sr2 or r3)");
  tr->add_option("--questions", questions)->required();
  tr->add_option("--retrieved", retrieved)->required();
  tr->add_option("--out", out, "checkpoint path")->required();
  tr->add_option("--log", log, "JSON-lines training log");
  add_config_flags(tr, config_path, overrides);

  auto* ev = app.add_subcommand("evaluate", "F1/EM report for a checkpoint");
  ev->add_option("--checkpoint", checkpoint)->required();
  ev->add_option("--questions", questions)->required();
  ev->add_option("--retrieved", retrieved)->required();
  ev->add_option("--out", out)->required();
  ev->add_option("--threads", threads)->capture_default_str();

  auto* an = app.add_subcommand("analyze", "TOP-k recall and oracle TOP-k F1/EM");
  an->add_option("--checkpoint", checkpoint)->required();
  an->add_option("--questions", questions)->required();
  an->add_option("--retrieved", retrieved)->required();
  an->add_option("--k", ks)->delimiter(',')->capture_default_str();
  an->add_option("--out", out)->required();
  an->add_option("--threads", threads)->capture_default_str();

  auto* sy = app.add_subcommand("synth", "generate the synthetic task");
  sy->add_option("--out-dir", out_dir)->required();
  sy->add_option("--seed", spec.seed)->capture_default_str();
  sy->add_option("--vocab", spec.vocab_size)->capture_default_str();
  sy->add_option("--relations", spec.relations)->capture_default_str();
  sy->add_option("--train", spec.train_questions)->capture_default_str();
  sy->add_option("--test", spec.test_questions)->capture_default_str();
  sy->add_option("--sentences", spec.sentences_per_article)->capture_default_str();
  sy->add_option("--positives", spec.positives)->capture_default_str();
  sy->add_option("--decoys", spec.lexical_decoys)->capture_default_str();
  sy->add_option("--wrong-relation", spec.wrong_relation)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) {
      r3::app::cmd_build_index(corpus, out);
    } else if (*ret) {
      r3::app::cmd_retrieve(r3::app::resolve_config(config_path, overrides), index, questions, mode, out);
    } else if (*tr) {
      r3::app::cmd_train(r3::app::resolve_config(config_path, overrides), questions, retrieved, out, log);
    } else if (*ev) {
      r3::app::cmd_evaluate(checkpoint, questions, retrieved, out, threads);
    } else if (*an) {
      r3::app::cmd_analyze(checkpoint, questions, retrieved, ks, out, threads);
    } else if (*sy) {
      r3::app::cmd_synth(spec, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
