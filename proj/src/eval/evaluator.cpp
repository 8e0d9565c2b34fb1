#include "r3/eval/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "r3/text/tokenizer.hpp"

namespace r3::eval {

ScoredExample score_example(model::RankerReader& model, const train::QaExample& example,
                            const PredictOptions& options) {
  ScoredExample out;
  const std::size_t n = std::min(example.passages.size(), options.top_passages);
  if (n == 0 || example.question.empty()) return out;

  ad::Graph g;
  model::Forward fwd(model, g);
  const ad::Var hq = fwd.encode(example.question_embedded);
  std::vector<ad::Var> h_rank;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = example.passages[i];
    auto rep = fwd.match(hq, fwd.encode(p.embedded));
    fwd.add_read_view(rep);
    const ad::Var single[] = {rep.h_read};
    const auto dist = model::to_distribution(g, fwd.spans(single));
    const auto best = model::extract_best_span(dist, options.max_span_len);

    Candidate c;
    c.passage = i;
    c.span = best.label;
    c.span.passage = i;
    c.answer = text::join(p.tokens, best.label.start, best.label.end + 1);
    c.span_log_prob = best.log_prob;
    c.ir_rank = p.ir_rank;
    c.doc_id = p.doc_id;
    out.candidates.push_back(std::move(c));

    if (options.policy == PolicySource::Ranker) {
      fwd.add_rank_view(rep);
      h_rank.push_back(rep.h_rank);
    }
  }
  if (options.policy == PolicySource::Ranker) {
    out.gamma = model::to_distribution(g, fwd.policy(h_rank)).gamma;
  } else {
    out.gamma.assign(n, 1.0 / static_cast<double>(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = out.candidates[i];
    c.policy_prob = out.gamma[i];
    c.score = std::exp(c.span_log_prob) * c.policy_prob;
  }
  return out;
}

std::vector<std::size_t> rank_candidates(const std::vector<Candidate>& candidates) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = candidates[a];
    const auto& y = candidates[b];
    if (x.score != y.score) return x.score > y.score;
    return x.ir_rank < y.ir_rank;
  });
  return order;
}

Prediction select_prediction(const std::string& question_id, const std::vector<Candidate>& candidates) {
  Prediction p;
  p.question_id = question_id;
  if (candidates.empty()) return p;
  const auto& best = candidates[rank_candidates(candidates).front()];
  p.answer = best.answer;
  p.no_answer = false;
  p.passage = best.passage;
  p.ir_rank = best.ir_rank;
  p.doc_id = best.doc_id;
  p.score = best.score;
  p.span_log_prob = best.span_log_prob;
  p.policy_prob = best.policy_prob;
  return p;
}

Prediction predict(model::RankerReader& model, const train::QaExample& example, const PredictOptions& options) {
  return select_prediction(example.id, score_example(model, example, options).candidates);
}

EvalReport evaluate(model::RankerReader& model, const std::vector<train::QaExample>& dataset,
                    const PredictOptions& options, std::size_t threads) {
  EvalReport report;
  report.records.resize(dataset.size());
  report.scored.resize(dataset.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto work = [&] {
    try {
      for (std::size_t i = next++; i < dataset.size() && !failed; i = next++) {
        const auto& ex = dataset[i];
        auto scored = score_example(model, ex, options);
        auto& rec = report.records[i];
        rec.id = ex.id;
        rec.prediction = select_prediction(ex.id, scored.candidates);
        const auto m = f1_em(rec.prediction.answer, ex.answers);
        rec.f1 = m.f1;
        rec.em = m.em;
        report.scored[i] = std::move(scored);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, dataset.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Sum in dataset order so the means do not depend on the thread count.
  for (const auto& r : report.records) {
    report.f1 += r.f1;
    report.em += r.em;
  }
  if (!dataset.empty()) {
    report.f1 /= static_cast<double>(dataset.size());
    report.em /= static_cast<double>(dataset.size());
  }
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["aggregate"] = {{"f1", f1}, {"em", em}, {"questions", records.size()}};
  auto recs = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json o;
    o["id"] = r.id;
    o["prediction"] = r.prediction.answer;
    if (r.prediction.no_answer) {
      o["passage_id"] = nullptr;
    } else {
      o["passage_id"] = r.prediction.ir_rank;
    }
    o["doc_id"] = r.prediction.doc_id;
    o["score"] = r.prediction.score;
    o["span_log_prob"] = r.prediction.span_log_prob;
    o["policy_prob"] = r.prediction.policy_prob;
    o["f1"] = r.f1;
    o["em"] = r.em;
    recs.push_back(std::move(o));
  }
  j["records"] = std::move(recs);
  return j.dump(2);
}

std::vector<double> topk_recall(const std::vector<std::vector<bool>>& ranked_positive,
                                const std::vector<std::size_t>& ks) {
  std::vector<double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (const auto& flags : ranked_positive) {
      const std::size_t stop = std::min(k, flags.size());
      if (std::any_of(flags.begin(), flags.begin() + static_cast<std::ptrdiff_t>(stop), [](bool b) { return b; })) {
        ++hits;
      }
    }
    out.push_back(ranked_positive.empty() ? 0.0
                                          : static_cast<double>(hits) / static_cast<double>(ranked_positive.size()));
  }
  return out;
}

std::vector<std::size_t> order_by_score(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<TopK> oracle_topk(const std::vector<std::vector<Candidate>>& candidates,
                              const std::vector<std::vector<std::string>>& golds, const std::vector<std::size_t>& ks) {
  if (candidates.size() != golds.size()) throw std::invalid_argument("oracle_topk: candidate and gold counts differ");
  std::vector<TopK> out;
  for (std::size_t k : ks) out.push_back({k, 0.0, 0.0});
  for (std::size_t q = 0; q < candidates.size(); ++q) {
    const auto order = rank_candidates(candidates[q]);
    std::vector<F1Em> scores;
    for (auto i : order) scores.push_back(f1_em(candidates[q][i].answer, golds[q]));
    for (auto& t : out) {
      double f1 = 0.0;
      double em = 0.0;
      for (std::size_t i = 0; i < std::min(t.k, scores.size()); ++i) {
        f1 = std::max(f1, scores[i].f1);
        em = std::max(em, scores[i].em);
      }
      t.f1 += f1;
      t.em += em;
    }
  }
  if (!candidates.empty()) {
    for (auto& t : out) {
      t.f1 /= static_cast<double>(candidates.size());
      t.em /= static_cast<double>(candidates.size());
    }
  }
  return out;
}

}  // namespace r3::eval
