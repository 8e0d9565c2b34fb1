#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "r3/eval/evaluator.hpp"
#include "r3/eval/metrics.hpp"
#include "support/oracles.hpp"

using namespace r3;

namespace {

eval::Candidate cand(std::size_t passage, const std::string& answer, double score, int ir_rank) {
  eval::Candidate c;
  c.passage = passage;
  c.answer = answer;
  c.score = score;
  c.ir_rank = ir_rank;
  return c;
}

}  // namespace

TEST_CASE("normalize_answer") {
  CHECK(eval::normalize_answer("The  Quick, brown FOX!") == "quick brown fox");
  CHECK(eval::normalize_answer("an apple a day") == "apple day");
  CHECK(eval::normalize_answer("theatre") == "theatre");
  CHECK(eval::normalize_answer("...") == "");
}

TEST_CASE("f1_em edge cases") {
  CHECK(eval::f1_em("x", {}).f1 == 0.0);
  CHECK(eval::f1_em("the", {"a"}).em == 1.0);
  CHECK(eval::f1_em("the", {"a"}).f1 == 1.0);
  CHECK(eval::f1_em("the", {"cat"}).f1 == 0.0);
  const auto r = eval::f1_em("blue cat", {"red dog", "cat"});
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.em == 0.0);
}

TEST_CASE("f1 is symmetric and in [0, 1]") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 2000; ++k) {
    const auto a = oracle::random_phrase(rng);
    const auto b = oracle::random_phrase(rng);
    const auto ab = eval::f1_em(a, {b});
    const auto ba = eval::f1_em(b, {a});
    CHECK(ab.f1 == doctest::Approx(ba.f1));
    CHECK(ab.em == ba.em);
    CHECK(ab.f1 >= 0.0);
    CHECK(ab.f1 <= 1.0);
    if (ab.em == 1.0) CHECK(ab.f1 == 1.0);
  }
}

TEST_CASE("rank_candidates breaks score ties by IR rank") {
  const std::vector<eval::Candidate> c = {cand(0, "a", 0.2, 3), cand(1, "b", 0.5, 2), cand(2, "c", 0.5, 1)};
  CHECK(eval::rank_candidates(c) == std::vector<std::size_t>{2, 1, 0});
  const auto p = eval::select_prediction("q", c);
  CHECK(p.answer == "c");
  CHECK_FALSE(p.no_answer);
  CHECK(eval::select_prediction("q", {}).no_answer);
}

TEST_CASE("topk_recall and order_by_score") {
  const std::vector<std::vector<bool>> ranked = {{false, true, false}, {true}, {false, false, false, true}};
  const auto r = eval::topk_recall(ranked, {1, 2, 5});
  CHECK(r[0] == doctest::Approx(1.0 / 3.0));
  CHECK(r[1] == doctest::Approx(2.0 / 3.0));
  CHECK(r[2] == doctest::Approx(1.0));
  CHECK(eval::order_by_score({0.1, 0.3, 0.3, 0.2}) == std::vector<std::size_t>{1, 2, 3, 0});
}

TEST_CASE("oracle_topk takes the best answer among the k highest scored") {
  const std::vector<std::vector<eval::Candidate>> c = {
      {cand(0, "wrong", 0.9, 1), cand(1, "right answer", 0.5, 2), cand(2, "right", 0.1, 3)},
      {cand(0, "yes", 0.7, 1)}};
  const std::vector<std::vector<std::string>> golds = {{"right answer"}, {"yes"}};
  const auto t = eval::oracle_topk(c, golds, {1, 2, 3});
  CHECK(t[0].em == doctest::Approx(0.5));
  CHECK(t[1].em == doctest::Approx(1.0));
  CHECK(t[0].f1 == doctest::Approx(0.5));
  CHECK(t[2].f1 == doctest::Approx(1.0));
  CHECK_THROWS(eval::oracle_topk(c, {{"x"}}, {1}));
}

TEST_CASE("scoring combines span probability with the policy") {
  model::ModelConfig mc;
  mc.hidden = 4;
  mc.embed_dim = 3;
  mc.reader_layers = 1;
  mc.init_range = 0.7;
  model::RankerReader m(mc, 3);
  std::mt19937_64 rng(3);
  auto ex = oracle::random_example(rng, 3, 3, 4, 2, 3, 6);
  eval::PredictOptions opt;
  const auto scored = eval::score_example(m, ex, opt);
  REQUIRE(scored.candidates.size() == 4);
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& c = scored.candidates[i];
    total += scored.gamma[i];
    CHECK(c.passage == i);
    CHECK(c.policy_prob == scored.gamma[i]);
    CHECK(c.score == doctest::Approx(std::exp(c.span_log_prob) * c.policy_prob));
    CHECK(c.span.end - c.span.start + 1 <= opt.max_span_len);
  }
  CHECK(total == doctest::Approx(1.0));

  opt.policy = eval::PolicySource::Uniform;
  opt.top_passages = 2;
  const auto uniform = eval::score_example(m, ex, opt);
  REQUIRE(uniform.candidates.size() == 2);
  CHECK(uniform.gamma[0] == 0.5);

  const auto report = eval::evaluate(m, {ex, ex}, opt, 2);
  REQUIRE(report.records.size() == 2);
  CHECK(report.records[0].prediction.answer == report.records[1].prediction.answer);
  const auto j = nlohmann::json::parse(report.to_json());
  CHECK(j.at("records").size() == 2);
  CHECK(j.at("records")[0].contains("passage_id"));
  CHECK(j.at("aggregate").contains("f1"));
}

TEST_CASE("evaluate is independent of the thread count") {
  model::ModelConfig mc;
  mc.hidden = 4;
  mc.embed_dim = 3;
  mc.reader_layers = 1;
  model::RankerReader m(mc, 8);
  std::mt19937_64 rng(8);
  std::vector<train::QaExample> data;
  for (int k = 0; k < 7; ++k) data.push_back(oracle::random_example(rng, 3, 3, 3, 1, 2, 5));
  const auto one = eval::evaluate(m, data, {}, 1);
  const auto many = eval::evaluate(m, data, {}, 3);
  CHECK(one.to_json() == many.to_json());
}
