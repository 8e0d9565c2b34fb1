#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "r3/text/embeddings.hpp"
#include "r3/train/example.hpp"
#include "r3/train/reward.hpp"
#include "r3/train/trainer.hpp"
#include "support/oracles.hpp"

using namespace r3;

namespace {

model::ModelConfig tiny_config() {
  model::ModelConfig mc;
  mc.hidden = 4;
  mc.embed_dim = 3;
  mc.reader_layers = 1;
  mc.init_range = 0.5;
  return mc;
}

std::vector<train::QaExample> toy_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<train::QaExample> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(oracle::random_example(rng, 3, 3, 5, 2, 3, 6));
  return out;
}

ad::ParameterStore snapshot(const model::RankerReader& m) { return m.params(); }

bool block_changed(const ad::ParameterStore& before, const model::RankerReader& m, const std::string& prefix) {
  for (const auto& p : m.params()) {
    if (p->name.rfind(prefix, 0) == 0 && p->value != before.at(p->name).value) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("reward values") {
  CHECK(train::reward("New York City", "new york city").value == 2.0);
  CHECK(train::reward("new york city", "york city area").value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(train::reward("a b", "b a").value == 1.0);
  CHECK(train::reward("a b", "b a").kind == train::RewardKind::Overlap);
  CHECK(train::reward("abc", "xyz").value == -1.0);
  CHECK(train::reward("abc", "").value == -1.0);
  CHECK(train::best_reward({"xyz", "ab c"}, "ab c").value == 2.0);
  CHECK(train::best_reward({}, "x").value == -1.0);
  CHECK(train::token_f1({"a", "a", "b"}, {"a", "c"}) == doctest::Approx(0.4));
}

TEST_CASE("build_example labels every answer occurrence") {
  const auto table = text::EmbeddingTable::synthetic(4, 1);
  retrieval::Question q{"q", "Who won?", {"Ann Lee", "Bo"}};
  retrieval::RetrievedSet set;
  set.question_id = "q";
  set.passages = {{"Ann Lee met Bo and Ann Lee.", "d1", 1, 2.0, true},
                  {"   ", "d2", 2, 1.0, false},
                  {"Nobody here.", "d3", 3, 0.5, false}};
  const auto ex = train::build_example(q, set, table);
  REQUIRE(ex.passages.size() == 2);  // the blank passage is dropped
  const auto& p = ex.passages[0];
  CHECK(p.positive);
  REQUIRE(p.answer_spans.size() == 3);
  CHECK(p.answer_spans[0].start == 0);
  CHECK(p.answer_spans[0].end == 1);
  CHECK(p.answer_spans[1].start == 3);
  CHECK(p.answer_spans[1].end == 3);
  CHECK(p.answer_spans[2].start == 5);
  CHECK(p.embedded.cols() == static_cast<Eigen::Index>(p.tokens.size()));
  CHECK_FALSE(ex.passages[1].positive);
  CHECK(ex.passages[1].ir_rank == 3);
  CHECK(train::build_example(q, set, table, 1).passages.size() == 1);

  train::DatasetStats stats;
  retrieval::Question other{"r", "Where?", {"Mars"}};
  retrieval::Question lost{"s", "Lost?", {"x"}};
  retrieval::RetrievedSet rset{"r", {{"Nothing relevant.", "d9", 1, 1.0, false}}};
  const auto data = train::build_dataset({q, other, lost}, {set, rset}, table, true, 0, &stats);
  CHECK(data.size() == 1);
  CHECK(stats.missing_retrieval == 1);
  CHECK(stats.without_positive == 1);
  CHECK(train::build_dataset({q, other}, {set, rset}, table, false).size() == 2);
}

TEST_CASE("sample_subset invariants over random examples") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    train::QaExample ex;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    std::size_t npos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      train::PassageInput p;
      p.positive = std::bernoulli_distribution(0.4)(rng);
      npos += p.positive;
      ex.passages.push_back(p);
    }
    if (npos == 0) ex.passages[0].positive = true, npos = 1;
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const std::size_t min_neg = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
    const auto s = train::sample_subset(ex, k, min_neg, rng);
    const std::size_t nneg_avail = n - npos;
    std::size_t pos = 0, neg = 0;
    for (auto i : s) (ex.passages[i].positive ? pos : neg) += 1;
    INFO("n=" << n << " npos=" << npos << " k=" << k << " min_neg=" << min_neg);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
    CHECK(pos >= 1);
    CHECK(s.size() == std::min(k, n));
    CHECK(neg >= std::min({min_neg, nneg_avail, k - 1}));
  }
  train::QaExample none;
  none.passages.resize(3);
  CHECK(train::sample_subset(none, 2, 1, rng).size() == 2);
  CHECK_THROWS(train::sample_subset(none, 0, 1, rng));
}

TEST_CASE("kl_rank_loss equals the closed form") {
  ad::Graph g;
  ad::Matrix logits(3, 1);
  logits << 0.3, -1.0, 2.0;
  model::PolicyVars pv;
  pv.logits = g.constant(logits);
  pv.gamma = g.softmax_cols(pv.logits);
  const auto gamma = g.value(pv.gamma);
  const auto loss = train::kl_rank_loss(g, pv, {true, false, true});
  const double want = 0.5 * (std::log(0.5) - std::log(gamma(0, 0))) + 0.5 * (std::log(0.5) - std::log(gamma(2, 0)));
  CHECK(g.scalar(loss) == doctest::Approx(want).epsilon(1e-14));
  CHECK_THROWS_AS(train::kl_rank_loss(g, pv, {false, false, false}), std::invalid_argument);
}

TEST_CASE("step records serialize in a fixed key order") {
  train::StepRecord r;
  r.step = 3;
  r.mode = train::TrainMode::R3;
  r.reward = 2.0;
  r.reader_loss = 0.25;
  r.tau = 1;
  const auto s = r.to_json();
  CHECK(s.find("\"step\"") < s.find("\"mode\""));
  const auto j = nlohmann::json::parse(s);
  CHECK(j.at("mode") == "r3");
  CHECK(j.at("reward") == 2.0);
  CHECK_FALSE(j.contains("kl_loss"));
  CHECK(train::parse_train_mode("sr2") == train::TrainMode::SR2);
  CHECK_THROWS(train::parse_train_mode("rl"));
}

TEST_CASE("each mode updates the blocks it should") {
  const auto data = toy_data(4, 11);
  for (auto mode : {train::TrainMode::SR, train::TrainMode::SR2, train::TrainMode::R3}) {
    model::RankerReader m(tiny_config(), 1);
    train::TrainOptions opt;
    opt.batch_size = 2;
    opt.sample_k = 4;
    train::Trainer trainer(m, opt);
    const auto before = snapshot(m);
    const auto log = trainer.train(data, mode, 1);
    CHECK(log.size() == data.size());
    CHECK(trainer.updates() == 2);
    CAPTURE(train::to_string(mode));
    CHECK(block_changed(before, m, model::block::kReader));
    CHECK(block_changed(before, m, model::block::kEncoder));
    CHECK(block_changed(before, m, model::block::kRanker) == (mode != train::TrainMode::SR));
    for (const auto& r : log) {
      CHECK(r.reward.has_value() == (mode == train::TrainMode::R3));
      CHECK(r.kl_loss.has_value() == (mode == train::TrainMode::SR2));
      CHECK(data[0].passages.size() > r.tau);
      CHECK(std::isfinite(r.reader_loss));
    }
  }
}

TEST_CASE("training is reproducible from the seed") {
  const auto data = toy_data(3, 12);
  auto run = [&](std::uint64_t seed) {
    model::RankerReader m(tiny_config(), 1);
    train::TrainOptions opt;
    opt.seed = seed;
    train::Trainer t(m, opt);
    std::vector<std::string> lines;
    t.train(data, train::TrainMode::R3, 2, [&](const train::StepRecord& r) { lines.push_back(r.to_json()); });
    return lines;
  };
  CHECK(run(3) == run(3));
  CHECK(run(3) != run(4));
}

TEST_CASE("pretrain_init copies parameters and resets the optimizer") {
  model::RankerReader source(tiny_config(), 1), target(tiny_config(), 2);
  train::Trainer trainer(target, {});
  trainer.train(toy_data(2, 13), train::TrainMode::SR2, 1);
  CHECK(trainer.optimizer_state().step > 0);
  train::pretrain_init(target, source.params(), &trainer);
  CHECK(trainer.optimizer_state().step == 0);
  for (const auto& p : target.params()) CHECK(p->value == source.params().at(p->name).value);

  auto bigger = tiny_config();
  bigger.hidden = 6;
  model::RankerReader other(bigger, 1);
  CHECK_THROWS_AS(train::pretrain_init(target, other.params()), ad::ShapeError);
}

TEST_CASE("build_r3_terms rewards the span extracted from tau") {
  model::RankerReader m(tiny_config(), 4);
  auto data = toy_data(1, 14);
  auto& ex = data[0];
  ad::Graph g;
  model::Forward fwd(m, g);
  const std::vector<std::size_t> subset = {0, 1, 2, 3, 4};
  const auto terms = train::build_r3_terms(fwd, ex, subset, 1, ex.passages[1].answer_spans[0], 15, false);
  CHECK(terms.reward.value == train::best_reward(ex.answers, terms.extracted).value);
  const auto gamma = model::to_distribution(g, terms.policy).gamma;
  CHECK(gamma.size() == subset.size());
  CHECK(g.scalar(terms.policy_term) == doctest::Approx(std::log(gamma[1])));
  const auto restricted = train::build_r3_terms(fwd, ex, subset, 1, ex.passages[1].answer_spans[0], 15, true);
  CHECK(g.scalar(restricted.policy_term) == doctest::Approx(std::log(gamma[1] / (gamma[0] + gamma[1]))));
}
