#include "r3/retrieval/retriever.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace r3::retrieval {

using nlohmann::json;

namespace {

const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> kAbbrev = {
      "mr",  "mrs", "ms",  "dr",   "prof", "st",  "jr",   "sr",  "vs",  "etc", "e.g", "i.e", "inc",
      "ltd", "co",  "corp", "no",  "mt",   "ft",  "gen",  "gov", "sen", "rep", "capt", "col", "lt",
      "sgt", "u.s", "u.k", "jan", "feb",  "mar", "apr",  "jun", "jul", "aug", "sep", "sept", "oct",
      "nov", "dec", "approx", "dept", "est", "fig", "vol", "op", "cf", "al"};
  return kAbbrev;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool opens_sentence(char c) {
  return std::isupper(static_cast<unsigned char>(c)) != 0 || c == '"' || c == '\'' || c == '(' || c == '[' ||
         c == '{';
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool suppressed_by_abbreviation(const std::string& text, std::size_t period) {
  std::size_t b = period;
  while (b > 0 && !is_space(text[b - 1])) --b;
  std::string word = text.substr(b, period - b);
  while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front())) && word.front() != '.') {
    word.erase(word.begin());
  }
  if (word.size() == 1 && std::isupper(static_cast<unsigned char>(word[0]))) return true;  // initial
  for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return abbreviations().count(word) != 0;
}

}  // namespace

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')' || text[j] == ']')) ++j;
    if (j >= text.size() || !is_space(text[j])) continue;
    std::size_t k = j;
    while (k < text.size() && is_space(text[k])) ++k;
    if (k >= text.size() || !opens_sentence(text[k])) continue;
    if (c == '.' && suppressed_by_abbreviation(text, i)) continue;
    auto s = trim(text.substr(start, j - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = k;
    i = k - 1;
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

double tfidf_idf(std::size_t pool_size, std::size_t df) {
  return std::log((1.0 + static_cast<double>(pool_size)) / (1.0 + static_cast<double>(df))) + 1.0;
}

std::vector<ScoredSentence> rank_sentences_tfidf(const std::vector<text::Tokens>& pool, const text::Tokens& query,
                                                 std::size_t top_s) {
  const std::set<std::string> terms(query.begin(), query.end());
  std::map<std::string, std::size_t> df;
  for (const auto& sentence : pool) {
    std::set<std::string> seen;
    for (const auto& t : sentence) {
      if (terms.count(t) != 0 && seen.insert(t).second) ++df[t];
    }
  }
  std::vector<ScoredSentence> scored;
  scored.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    std::map<std::string, std::size_t> tf;
    for (const auto& t : pool[i]) {
      if (terms.count(t) != 0) ++tf[t];
    }
    double score = 0.0;
    for (const auto& [term, count] : tf) score += static_cast<double>(count) * tfidf_idf(pool.size(), df[term]);
    scored.push_back({i, score});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredSentence& a, const ScoredSentence& b) { return a.score > b.score; });
  if (scored.size() > top_s) scored.resize(top_s);
  return scored;
}

text::Tokens make_training_query(const std::string& question, const std::vector<std::string>& answers,
                                 QueryMode mode) {
  auto query = text::tokenize(question);
  if (mode != QueryMode::Train) return query;
  std::set<std::string> distinct;
  for (const auto& a : answers) {
    auto joined = text::join(text::tokenize(a));
    if (!joined.empty()) distinct.insert(joined);
  }
  if (distinct.size() == 1) {
    auto extra = text::tokenize(*distinct.begin());
    query.insert(query.end(), extra.begin(), extra.end());
  }
  return query;
}

bool contains_answer(const text::Tokens& sentence, const std::vector<std::string>& answers) {
  for (const auto& a : answers) {
    if (!text::find_all(sentence, text::tokenize(a)).empty()) return true;
  }
  return false;
}

std::size_t RetrievedSet::positive_count() const {
  return static_cast<std::size_t>(
      std::count_if(passages.begin(), passages.end(), [](const Passage& p) { return p.positive; }));
}

RetrievedSet retrieve(const InvertedIndex& index, const Question& question, const RetrieveOptions& options) {
  if (options.top_passages == 0 || options.top_passages > options.top_sentences) {
    throw std::invalid_argument("retrieve: need 1 <= N <= top_s");
  }
  RetrievedSet out;
  out.question_id = question.id;
  const auto query = make_training_query(question.question, question.answers, options.mode);
  if (query.empty()) return out;

  const auto docs = search_bm25(index, query, options.top_articles, options.bm25);
  std::vector<text::Tokens> pool;
  std::vector<std::pair<std::string, std::string>> origin;  // sentence text, doc id
  std::unordered_set<std::string> seen;
  for (const auto& d : docs) {
    const Document& doc = index.document(d.doc);
    for (auto& sentence : split_sentences(doc.text)) {
      auto tokens = text::tokenize(sentence);
      if (tokens.empty()) continue;
      if (!seen.insert(text::join(tokens)).second) continue;
      pool.push_back(std::move(tokens));
      origin.emplace_back(std::move(sentence), doc.id);
    }
  }

  const auto ranked = rank_sentences_tfidf(pool, query, options.top_sentences);
  for (std::size_t r = 0; r < ranked.size() && r < options.top_passages; ++r) {
    Passage p;
    p.text = origin[ranked[r].index].first;
    p.doc_id = origin[ranked[r].index].second;
    p.ir_rank = static_cast<int>(r + 1);
    p.ir_score = ranked[r].score;
    p.positive = contains_answer(pool[ranked[r].index], question.answers);
    out.passages.push_back(std::move(p));
  }
  return out;
}

std::vector<RetrievedSet> read_retrieved(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<RetrievedSet> sets;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      RetrievedSet s;
      s.question_id = j.at("question_id").get<std::string>();
      for (const auto& p : j.at("passages")) {
        s.passages.push_back({p.at("text").get<std::string>(), p.at("doc_id").get<std::string>(),
                              p.at("ir_rank").get<int>(), p.at("ir_score").get<double>(),
                              p.at("positive").get<bool>()});
      }
      sets.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return sets;
}

void write_retrieved(const std::string& path, const std::vector<RetrievedSet>& sets) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& s : sets) {
    json passages = json::array();
    for (const auto& p : s.passages) {
      passages.push_back({{"text", p.text},
                          {"doc_id", p.doc_id},
                          {"ir_rank", p.ir_rank},
                          {"ir_score", p.ir_score},
                          {"positive", p.positive}});
    }
    out << json{{"question_id", s.question_id}, {"passages", std::move(passages)}}.dump() << '\n';
  }
}

}  // namespace r3::retrieval
