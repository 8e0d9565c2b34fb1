#pragma once

#include <map>
#include <string>
#include <vector>

#include "r3/app/config.hpp"
#include "r3/app/synthetic.hpp"

namespace r3::app {

/// Config file (optional) with per-key overrides applied on top, validated.
Config resolve_config(const std::string& config_path, const std::map<std::string, std::string>& overrides);

/// Each command throws on a rejected precondition; the CLI turns that into a
/// nonzero exit status.
void cmd_build_index(const std::string& corpus_path, const std::string& out_path);

void cmd_retrieve(const Config& config, const std::string& index_path, const std::string& questions_path,
                  const std::string& mode, const std::string& out_path);

void cmd_train(const Config& config, const std::string& questions_path, const std::string& retrieved_path,
               const std::string& checkpoint_out, const std::string& log_path);

void cmd_evaluate(const std::string& checkpoint, const std::string& questions_path, const std::string& retrieved_path,
                  const std::string& out_path, std::size_t threads);

void cmd_analyze(const std::string& checkpoint, const std::string& questions_path, const std::string& retrieved_path,
                 const std::vector<std::size_t>& ks, const std::string& out_path, std::size_t threads);

/// Writes corpus.jsonl, train.jsonl and test.jsonl into `out_dir`.
void cmd_synth(const SyntheticSpec& spec, const std::string& out_dir);

}  // namespace r3::app
