#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "r3/autodiff/fd_check.hpp"
#include "r3/model/matcher.hpp"
#include "r3/model/model.hpp"
#include "r3/model/ranker.hpp"
#include "r3/model/reader.hpp"
#include "support/oracles.hpp"

using namespace r3;

namespace {

model::ModelConfig tiny_config() {
  model::ModelConfig mc;
  mc.hidden = 4;
  mc.embed_dim = 3;
  mc.reader_layers = 2;
  mc.ranker_layers = 1;
  mc.init_range = 0.8;
  return mc;
}

}  // namespace

TEST_CASE("model config validation") {
  auto mc = tiny_config();
  CHECK_NOTHROW(mc.validate());
  mc.hidden = 5;
  CHECK_THROWS_AS(mc.validate(), std::invalid_argument);
  mc = tiny_config();
  mc.reader_layers = 0;
  CHECK_THROWS_AS(mc.validate(), std::invalid_argument);
}

TEST_CASE("initialization is deterministic and sets the forget bias") {
  const auto mc = tiny_config();
  model::RankerReader a(mc, 5), b(mc, 5), c(mc, 6);
  CHECK(a.params().at("match.wm").value == b.params().at("match.wm").value);
  CHECK(a.params().at("match.wm").value != c.params().at("match.wm").value);
  const auto& bias = a.params().at("encoder.fw.b").value;
  CHECK(bias.rows() == 4 * (mc.hidden / 2));
  CHECK(bias(mc.hidden / 2, 0) == mc.forget_bias);  // first forget-gate row
  CHECK(bias(0, 0) == 0.0);
  CHECK(a.params().at("encoder.fw.wx").value.cwiseAbs().maxCoeff() <= mc.init_range);
}

TEST_CASE("forward shapes") {
  const auto mc = tiny_config();
  model::RankerReader m(mc, 1);
  std::mt19937_64 rng(1);
  auto ex = oracle::random_example(rng, mc.embed_dim, 3, 2, 1, 4, 4);
  ad::Graph g;
  model::Forward fwd(m, g);
  const auto hq = fwd.encode(ex.question_embedded);
  CHECK(g.value(hq).rows() == mc.hidden);
  CHECK(g.value(hq).cols() == 3);
  auto rep = fwd.match(hq, fwd.encode(ex.passages[0].embedded));
  CHECK(g.value(rep.m).rows() == 2 * mc.hidden);
  CHECK(g.value(rep.m).cols() == 4);
  CHECK((g.value(rep.m).array() >= 0.0).all());
  fwd.add_rank_view(rep);
  fwd.add_read_view(rep);
  CHECK(g.value(rep.h_rank).rows() == mc.hidden);
  CHECK(g.value(rep.h_read).cols() == 4);
}

TEST_CASE("the backward LSTM state at t only sees positions t and later") {
  const auto mc = tiny_config();
  model::RankerReader m(mc, 2);
  std::mt19937_64 rng(2);
  const auto x = oracle::random_matrix(mc.embed_dim, 5, rng);
  auto y = x;
  y.col(0).setConstant(3.0);  // perturb the first word only
  ad::Graph g;
  model::Forward fwd(m, g);
  const auto a = g.value(fwd.encode(x));
  const auto b = g.value(fwd.encode(y));
  const int h = mc.hidden / 2;
  CHECK(a.block(h, 1, h, 4) == b.block(h, 1, h, 4));  // backward half unaffected after t = 0
  CHECK(a.block(0, 1, h, 4) != b.block(0, 1, h, 4));  // forward half carries it on
}

TEST_CASE("span distributions and segment map") {
  const auto mc = tiny_config();
  model::RankerReader m(mc, 3);
  std::mt19937_64 rng(3);
  auto ex = oracle::random_example(rng, mc.embed_dim, 3, 3, 1, 2, 5);
  ad::Graph g;
  model::Forward fwd(m, g);
  const auto hq = fwd.encode(ex.question_embedded);
  std::vector<ad::Var> read;
  std::size_t total = 0;
  for (const auto& p : ex.passages) {
    auto rep = fwd.match(hq, fwd.encode(p.embedded));
    fwd.add_read_view(rep);
    read.push_back(rep.h_read);
    total += p.tokens.size();
  }
  const auto spans = fwd.spans(read);
  const auto dist = model::to_distribution(g, spans);
  CHECK(dist.size() == total);
  CHECK(dist.offsets[1] == ex.passages[0].tokens.size());
  const auto [p, off] = dist.locate(dist.offsets[2] + 1);
  CHECK(p == 2);
  CHECK(off == 1);
  for (std::size_t v = 0; v < dist.size(); ++v) CHECK(dist.log_start[v] == doctest::Approx(std::log(dist.start[v])));

  const model::SpanLabel label{1, 0, 1};
  const auto loss = model::span_loss(g, spans, label);
  CHECK(g.scalar(loss) == doctest::Approx(-dist.log_start[dist.offsets[1]] - dist.log_end[dist.offsets[1] + 1]));
  CHECK_THROWS_AS(model::span_loss(g, spans, {1, 0, 9}), std::invalid_argument);
  CHECK_THROWS_AS(model::span_loss(g, spans, {1, 1, 0}), std::invalid_argument);
}

TEST_CASE("extract_best_span respects max_len and the tie rule") {
  model::SpanDistribution d;
  d.start = {0.25, 0.25, 0.25, 0.25};
  d.end = {0.25, 0.25, 0.25, 0.25};
  for (double x : d.start) d.log_start.push_back(std::log(x));
  d.log_end = d.log_start;
  d.offsets = {0, 2};
  d.lengths = {2, 2};
  auto best = model::extract_best_span(d, 15);
  CHECK(best.label.passage == 0);
  CHECK(best.label.start == 0);
  CHECK(best.label.end == 0);

  d.start = {0.1, 0.1, 0.7, 0.1};
  d.end = {0.1, 0.1, 0.1, 0.7};
  for (std::size_t i = 0; i < 4; ++i) d.log_start[i] = std::log(d.start[i]), d.log_end[i] = std::log(d.end[i]);
  best = model::extract_best_span(d, 2);
  CHECK(best.label.passage == 1);
  CHECK(best.label.start == 0);
  CHECK(best.label.end == 1);
  best = model::extract_best_span(d, 1);
  CHECK(best.label.end == best.label.start);
  CHECK_THROWS(model::extract_best_span(d, 0));
}

TEST_CASE("policy sampling follows gamma restricted to positives") {
  const std::vector<double> gamma = {0.1, 0.2, 0.3, 0.4};
  const std::vector<bool> pos = {false, true, false, true};
  std::mt19937_64 rng(7);
  int hits[4] = {0, 0, 0, 0};
  const int n = 60000;
  for (int k = 0; k < n; ++k) ++hits[model::sample_passage(gamma, pos, model::SampleMode::Train, rng)];
  CHECK(hits[0] == 0);
  CHECK(hits[2] == 0);
  const double p1 = static_cast<double>(hits[1]) / n;
  CHECK(std::abs(p1 - 1.0 / 3.0) < 4.0 * std::sqrt(2.0 / 9.0 / n));
  CHECK(model::sample_passage(gamma, pos, model::SampleMode::Inference, rng) == 3);
  CHECK(model::sample_passage({0.5, 0.5}, {false, false}, model::SampleMode::Inference, rng) == 0);
  CHECK_THROWS_AS(model::sample_passage(gamma, {false, false, false, false}, model::SampleMode::Train, rng),
                  std::invalid_argument);
}

TEST_CASE("log_policy, plain and restricted") {
  ad::Graph g;
  ad::Matrix logits(3, 1);
  logits << 0.0, std::log(2.0), std::log(3.0);
  model::PolicyVars pv;
  pv.logits = g.constant(logits);
  pv.gamma = g.softmax_cols(pv.logits);
  CHECK(g.scalar(model::log_policy(g, pv, 2)) == doctest::Approx(std::log(0.5)));
  const std::vector<bool> only = {true, false, true};
  CHECK(g.scalar(model::log_policy(g, pv, 2, &only)) == doctest::Approx(std::log(0.75)));
}

TEST_CASE("score_passages gradient is correct through max pooling") {
  const auto mc = tiny_config();
  model::RankerReader m(mc, 9);
  std::mt19937_64 rng(9);
  auto ex = oracle::random_example(rng, mc.embed_dim, 3, 3, 1, 3, 5);
  auto params = m.params().with_prefix(model::block::kRanker);
  const auto r = ad::fd_check(
      [&](ad::Graph& g) {
        model::Forward fwd(m, g);
        const auto hq = fwd.encode(ex.question_embedded);
        std::vector<ad::Var> rank;
        for (const auto& p : ex.passages) {
          auto rep = fwd.match(hq, fwd.encode(p.embedded));
          fwd.add_rank_view(rep);
          rank.push_back(rep.h_rank);
        }
        return model::log_policy(g, fwd.policy(rank), 1);
      },
      params);
  CHECK(r.max_rel_error < 1e-5);
}
