#include "r3/retrieval/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace r3::retrieval {

using nlohmann::json;

namespace {

template <typename F>
void for_each_line(const std::string& path, F&& fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

std::vector<Document> read_corpus(const std::string& path) {
  std::vector<Document> docs;
  for_each_line(path, [&](const json& j) {
    docs.push_back({j.at("id").get<std::string>(), j.value("title", std::string{}), j.at("text").get<std::string>()});
  });
  return docs;
}

void write_corpus(const std::string& path, const std::vector<Document>& docs) {
  auto out = open_out(path);
  for (const auto& d : docs) out << json{{"id", d.id}, {"title", d.title}, {"text", d.text}}.dump() << '\n';
}

std::vector<Question> read_questions(const std::string& path) {
  std::vector<Question> qs;
  for_each_line(path, [&](const json& j) {
    Question q;
    q.id = j.at("id").get<std::string>();
    q.question = j.at("question").get<std::string>();
    q.answers = j.at("answers").get<std::vector<std::string>>();
    qs.push_back(std::move(q));
  });
  return qs;
}

void write_questions(const std::string& path, const std::vector<Question>& questions) {
  auto out = open_out(path);
  for (const auto& q : questions) {
    out << json{{"id", q.id}, {"question", q.question}, {"answers", q.answers}}.dump() << '\n';
  }
}

}  // namespace r3::retrieval
