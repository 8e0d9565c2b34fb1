#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "r3/app/commands.hpp"
#include "r3/app/config.hpp"
#include "r3/app/pipeline.hpp"
#include "r3/app/synthetic.hpp"
#include "r3/retrieval/retriever.hpp"
#include "r3/text/tokenizer.hpp"
#include "support/synthetic_setup.hpp"

using namespace r3;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("r3_unit_app_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config text round trip and errors") {
  app::Config c;
  c.lr = 0.1 + 0.2;  // not exactly representable in short decimal
  c.mode = "sr2";
  c.restricted_policy = true;
  const auto back = app::Config::parse(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.lr == c.lr);
  CHECK(back.restricted_policy);
  for (const auto& key : app::Config::keys()) CHECK(back.get(key) == c.get(key));

  const auto parsed = app::Config::parse("# comment\nhidden = 8  # trailing\n\nmode=sr\n");
  CHECK(parsed.hidden == 8);
  CHECK(parsed.mode == "sr");
  try {
    app::Config::parse("hidden = 8\nbogus = 1\n");
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS(app::Config::parse("hidden 8\n"));
  app::Config bad;
  CHECK_THROWS(bad.set("hidden", "eight"));
  bad.precision = "f32";
  CHECK_THROWS(bad.validate());
  bad = {};
  bad.hidden = 7;
  CHECK_THROWS(bad.validate());
  bad = {};
  bad.mode = "rl";
  CHECK_THROWS(bad.validate());
}

TEST_CASE("config converters") {
  app::Config c;
  c.mode = "sr";
  CHECK(c.predict_options().policy == eval::PolicySource::Uniform);
  c.mode = "r3";
  CHECK(c.predict_options().policy == eval::PolicySource::Ranker);
  CHECK(c.retrieve_options(retrieval::QueryMode::Train).mode == retrieval::QueryMode::Train);
  CHECK(c.model_config().hidden == c.hidden);
  CHECK(c.train_options().sample_k == c.sample_k);
}

TEST_CASE("synthetic task structure") {
  app::SyntheticSpec spec;
  const auto task = app::generate_synthetic(spec);
  CHECK(task.train.size() == 300);
  CHECK(task.test.size() == 100);
  CHECK(task.corpus.size() == 400);
  CHECK(task.vocabulary.size() <= spec.vocab_size);
  std::set<std::string> vocab(task.vocabulary.begin(), task.vocabulary.end());
  std::set<std::string> used;
  for (const auto& d : task.corpus)
    for (const auto& t : text::tokenize(d.title + " " + d.text)) used.insert(t);
  for (const auto& t : used) CHECK(vocab.count(t) == 1);
  // Each article states its own fact exactly once and the answer occurs in
  // `positives` sentences.
  for (std::size_t q = 0; q < 5; ++q) {
    const auto& question = task.train[q];
    const auto& doc = task.corpus[q];
    std::size_t with_answer = 0;
    for (const auto& s : retrieval::split_sentences(doc.text))
      with_answer += retrieval::contains_answer(text::tokenize(s), question.answers);
    CHECK(with_answer == spec.positives);
  }
  CHECK(app::generate_synthetic(spec).corpus[7].text == task.corpus[7].text);
  app::SyntheticSpec bad;
  bad.vocab_size = 20;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("command pipeline end to end") {
  const auto dir = scratch_dir("cli");
  app::SyntheticSpec spec;
  spec.train_questions = 40;
  spec.test_questions = 10;
  app::cmd_synth(spec, dir.string());
  app::cmd_build_index((dir / "corpus.jsonl").string(), (dir / "index.json").string());
  app::Config c;
  c.hidden = 4;
  c.embed_dim = 4;
  c.epochs = 1;
  c.pretrain_epochs = 1;
  c.reader_layers = 1;
  app::cmd_retrieve(c, (dir / "index.json").string(), (dir / "train.jsonl").string(), "train",
                    (dir / "train_ret.jsonl").string());
  app::cmd_retrieve(c, (dir / "index.json").string(), (dir / "test.jsonl").string(), "test",
                    (dir / "test_ret.jsonl").string());
  CHECK_THROWS(app::cmd_retrieve(c, (dir / "index.json").string(), (dir / "test.jsonl").string(), "dev",
                                 (dir / "x.jsonl").string()));
  app::cmd_train(c, (dir / "train.jsonl").string(), (dir / "train_ret.jsonl").string(), (dir / "m.ckpt").string(),
                 (dir / "log.jsonl").string());
  std::ifstream log(dir / "log.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(log, line);) {
    ++lines;
    CHECK(nlohmann::json::accept(line));
  }
  CHECK(lines == 80);  // one SR2 pretraining epoch and one R3 epoch over 40 questions

  app::cmd_evaluate((dir / "m.ckpt").string(), (dir / "test.jsonl").string(), (dir / "test_ret.jsonl").string(),
                    (dir / "eval.json").string(), 2);
  const auto report = nlohmann::json::parse(slurp(dir / "eval.json"));
  CHECK(report.at("records").size() == 10);
  app::cmd_analyze((dir / "m.ckpt").string(), (dir / "test.jsonl").string(), (dir / "test_ret.jsonl").string(),
                   {1, 3}, (dir / "analysis.json").string(), 1);
  CHECK(nlohmann::json::parse(slurp(dir / "analysis.json")).contains("oracle_topk"));
  CHECK_THROWS(app::cmd_analyze((dir / "m.ckpt").string(), (dir / "test.jsonl").string(),
                                (dir / "test_ret.jsonl").string(), {0}, (dir / "a.json").string(), 1));

  const auto loaded = app::load_model((dir / "m.ckpt").string());
  CHECK(loaded.config.to_text() == c.to_text());

  std::ofstream(dir / "empty.jsonl") << "";
  CHECK_THROWS(app::cmd_evaluate((dir / "m.ckpt").string(), (dir / "empty.jsonl").string(),
                                 (dir / "test_ret.jsonl").string(), (dir / "e.json").string(), 1));
  CHECK_THROWS(app::cmd_build_index((dir / "empty.jsonl").string(), (dir / "i.json").string()));
  fs::remove_all(dir);
}

TEST_CASE("resolve_config applies overrides over the file") {
  const auto dir = scratch_dir("cfg");
  std::ofstream(dir / "run.cfg") << "hidden = 8\nlr = 0.01\n";
  const auto c = app::resolve_config((dir / "run.cfg").string(), {{"lr", "0.5"}});
  CHECK(c.hidden == 8);
  CHECK(c.lr == 0.5);
  CHECK_THROWS(app::resolve_config((dir / "missing.cfg").string(), {}));
  CHECK_THROWS(app::resolve_config("", {{"hidden", "3"}}));
  fs::remove_all(dir);
}

TEST_CASE("training retrieval finds the fact sentence for most questions") {
  app::SyntheticSpec spec;
  spec.train_questions = 50;
  spec.test_questions = 10;
  app::Config c;
  c.hidden = 4;
  c.embed_dim = 4;
  const auto data = oracle::prepare_synthetic(spec, c);
  CHECK(data.train.size() >= 45);
  for (const auto& ex : data.train) CHECK(ex.passages.size() <= c.top_passages);
}
