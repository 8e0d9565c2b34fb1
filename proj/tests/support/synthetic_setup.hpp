#pragma once

#include <vector>

#include "r3/app/config.hpp"
#include "r3/app/pipeline.hpp"
#include "r3/app/synthetic.hpp"
#include "r3/retrieval/index.hpp"
#include "r3/train/example.hpp"

namespace r3::oracle {

struct SyntheticData {
  std::vector<train::QaExample> train;
  std::vector<train::QaExample> test;
};

// Generated task -> index -> retrieval -> embedded examples, the same path
// the command-line tool takes.
inline SyntheticData prepare_synthetic(const app::SyntheticSpec& spec, const app::Config& config) {
  const auto task = app::generate_synthetic(spec);
  const auto index = retrieval::InvertedIndex::build(task.corpus);
  const auto train_sets =
      app::retrieve_all(index, task.train, config.retrieve_options(retrieval::QueryMode::Train), 1);
  const auto test_sets = app::retrieve_all(index, task.test, config.retrieve_options(retrieval::QueryMode::Test), 1);
  const auto table = app::make_embeddings(config);
  SyntheticData out;
  out.train = train::build_dataset(task.train, train_sets, table, true, config.top_passages);
  out.test = train::build_dataset(task.test, test_sets, table, false, config.test_top);
  return out;
}

}  // namespace r3::oracle
