#include "r3/train/example.hpp"

#include <algorithm>
#include <unordered_map>

namespace r3::train {

std::size_t QaExample::positive_count() const {
  return static_cast<std::size_t>(
      std::count_if(passages.begin(), passages.end(), [](const PassageInput& p) { return p.positive; }));
}

QaExample build_example(const retrieval::Question& question, const retrieval::RetrievedSet& retrieved,
                        const text::EmbeddingTable& table, std::size_t max_passages) {
  QaExample ex;
  ex.id = question.id;
  ex.answers = question.answers;
  ex.question = text::tokenize(question.question);
  if (!ex.question.empty()) ex.question_embedded = text::embed(table.index(ex.question), table);

  std::vector<text::Tokens> answer_tokens;
  for (const auto& a : question.answers) {
    auto t = text::tokenize(a);
    if (!t.empty()) answer_tokens.push_back(std::move(t));
  }

  for (const auto& p : retrieved.passages) {
    if (max_passages != 0 && ex.passages.size() >= max_passages) break;
    PassageInput in;
    in.tokens = text::tokenize(p.text);
    if (in.tokens.empty()) continue;
    in.embedded = text::embed(table.index(in.tokens), table);
    in.doc_id = p.doc_id;
    in.ir_rank = p.ir_rank;
    in.ir_score = p.ir_score;
    for (const auto& a : answer_tokens) {
      for (std::size_t s : text::find_all(in.tokens, a)) in.answer_spans.push_back({s, s + a.size() - 1});
    }
    std::sort(in.answer_spans.begin(), in.answer_spans.end(),
              [](const Occurrence& x, const Occurrence& y) { return x.start != y.start ? x.start < y.start : x.end < y.end; });
    in.positive = !in.answer_spans.empty();
    ex.passages.push_back(std::move(in));
  }
  return ex;
}

std::vector<QaExample> build_dataset(const std::vector<retrieval::Question>& questions,
                                     const std::vector<retrieval::RetrievedSet>& retrieved,
                                     const text::EmbeddingTable& table, bool require_positive,
                                     std::size_t max_passages, DatasetStats* stats) {
  std::unordered_map<std::string, const retrieval::RetrievedSet*> by_id;
  for (const auto& r : retrieved) by_id[r.question_id] = &r;

  DatasetStats local;
  std::vector<QaExample> out;
  for (const auto& q : questions) {
    ++local.questions;
    auto it = by_id.find(q.id);
    if (it == by_id.end()) {
      ++local.missing_retrieval;
      continue;
    }
    auto ex = build_example(q, *it->second, table, max_passages);
    if (ex.passages.empty() || ex.question.empty()) {
      ++local.without_passages;
      continue;
    }
    if (require_positive && ex.positive_count() == 0) {
      ++local.without_positive;
      continue;
    }
    out.push_back(std::move(ex));
  }
  local.kept = out.size();
  if (stats != nullptr) *stats = local;
  return out;
}

}  // namespace r3::train
