#pragma once

#include <string>
#include <vector>

namespace r3::retrieval {

struct Document {
  std::string id;
  std::string title;
  std::string text;
};

/// One row of a QA dataset: {id, question, answers:[...]}.
struct Question {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
};

/// JSON-lines readers/writers. Blank lines are ignored; a malformed line
/// throws std::runtime_error naming the file and line number.
std::vector<Document> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<Document>& docs);
std::vector<Question> read_questions(const std::string& path);
void write_questions(const std::string& path, const std::vector<Question>& questions);

}  // namespace r3::retrieval
