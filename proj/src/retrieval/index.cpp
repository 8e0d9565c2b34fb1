#include "r3/retrieval/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace r3::retrieval {

using nlohmann::json;

namespace {

const std::vector<Posting> kNoPostings;

text::Tokens doc_tokens(const Document& d) { return text::tokenize(d.title + " " + d.text); }

}  // namespace

InvertedIndex InvertedIndex::build(std::vector<Document> docs) {
  if (docs.empty()) throw std::invalid_argument("build_index: empty corpus");
  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].id == docs[i - 1].id) throw std::invalid_argument("build_index: duplicate doc id '" + docs[i].id + "'");
  }

  InvertedIndex index;
  index.docs_ = std::move(docs);
  index.lengths_.reserve(index.docs_.size());
  for (std::uint32_t ord = 0; ord < index.docs_.size(); ++ord) {
    const auto tokens = doc_tokens(index.docs_[ord]);
    if (tokens.empty()) throw std::invalid_argument("build_index: doc '" + index.docs_[ord].id + "' has no tokens");
    index.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) index.postings_[term].push_back({ord, count});
  }
  index.finalize_stats();
  return index;
}

void InvertedIndex::finalize_stats() {
  double total = 0.0;
  for (auto len : lengths_) total += len;
  avg_length_ = total / static_cast<double>(lengths_.size());
}

const std::vector<Posting>& InvertedIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? kNoPostings : it->second;
}

std::string InvertedIndex::serialize() const {
  json j;
  j["format"] = "r3-index";
  j["version"] = kFormatVersion;
  json docs = json::array();
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    docs.push_back({{"id", docs_[i].id}, {"title", docs_[i].title}, {"text", docs_[i].text}, {"length", lengths_[i]}});
  }
  j["docs"] = std::move(docs);
  json postings = json::object();
  for (const auto& [term, list] : postings_) {
    json arr = json::array();
    for (const auto& p : list) arr.push_back({p.doc, p.tf});
    postings[term] = std::move(arr);
  }
  j["postings"] = std::move(postings);
  return j.dump();
}

void InvertedIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write index " + path);
  out << serialize() << '\n';
}

InvertedIndex InvertedIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open index " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error("index " + path + ": " + e.what());
  }
  if (j.value("format", std::string{}) != "r3-index") throw std::runtime_error("index " + path + ": wrong format tag");
  if (j.value("version", 0) != kFormatVersion) throw std::runtime_error("index " + path + ": unsupported version");

  InvertedIndex index;
  for (const auto& d : j.at("docs")) {
    index.docs_.push_back({d.at("id").get<std::string>(), d.at("title").get<std::string>(), d.at("text").get<std::string>()});
    index.lengths_.push_back(d.at("length").get<std::uint32_t>());
  }
  if (index.docs_.empty()) throw std::runtime_error("index " + path + ": no documents");
  for (const auto& [term, arr] : j.at("postings").items()) {
    auto& list = index.postings_[term];
    for (const auto& p : arr) {
      const auto doc = p.at(0).get<std::uint32_t>();
      if (doc >= index.docs_.size()) throw std::runtime_error("index " + path + ": posting out of range");
      list.push_back({doc, p.at(1).get<std::uint32_t>()});
    }
  }
  index.finalize_stats();
  return index;
}

double bm25_idf(std::size_t doc_count, std::size_t df) {
  const double n = static_cast<double>(doc_count);
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

std::vector<ScoredDoc> search_bm25(const InvertedIndex& index, const text::Tokens& query, std::size_t top_a,
                                   const Bm25Params& params) {
  if (top_a == 0) throw std::invalid_argument("search_bm25: top_a must be at least 1");
  std::set<std::string> terms(query.begin(), query.end());
  std::unordered_map<std::uint32_t, double> acc;
  const double avg = index.average_length();
  for (const auto& term : terms) {
    const auto& list = index.postings(term);
    if (list.empty()) continue;
    const double idf = bm25_idf(index.doc_count(), list.size());
    for (const auto& p : list) {
      const double tf = p.tf;
      const double norm = params.k1 * (1.0 - params.b + params.b * index.length(p.doc) / avg);
      acc[p.doc] += idf * tf * (params.k1 + 1.0) / (tf + norm);
    }
  }
  std::vector<ScoredDoc> out;
  out.reserve(acc.size());
  for (const auto& [doc, score] : acc) out.push_back({doc, score});
  std::sort(out.begin(), out.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc < b.doc;
  });
  if (out.size() > top_a) out.resize(top_a);
  return out;
}

}  // namespace r3::retrieval
