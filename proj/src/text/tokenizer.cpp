#include "r3/text/tokenizer.hpp"

#include <cctype>

namespace r3::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j == i) break;

    std::size_t lo = i;
    std::size_t hi = j;
    while (lo < hi && is_punct(text[lo])) {
      out.emplace_back(1, text[lo]);
      ++lo;
    }
    std::size_t tail = hi;
    while (tail > lo && is_punct(text[tail - 1])) --tail;
    if (lo < tail) {
      std::string word(text.substr(lo, tail - lo));
      for (char& c : word) c = lower(c);
      out.push_back(std::move(word));
    }
    for (std::size_t k = tail; k < hi; ++k) out.emplace_back(1, text[k]);
    i = j;
  }
  return out;
}

std::string join(const Tokens& tokens, std::size_t begin, std::size_t end) {
  std::string s;
  for (std::size_t k = begin; k < end && k < tokens.size(); ++k) {
    if (!s.empty()) s += ' ';
    s += tokens[k];
  }
  return s;
}

std::string join(const Tokens& tokens) { return join(tokens, 0, tokens.size()); }

std::vector<std::size_t> find_all(const Tokens& haystack, const Tokens& needle) {
  std::vector<std::size_t> hits;
  if (needle.empty() || needle.size() > haystack.size()) return hits;
  for (std::size_t s = 0; s + needle.size() <= haystack.size(); ++s) {
    bool ok = true;
    for (std::size_t k = 0; k < needle.size() && ok; ++k) ok = haystack[s + k] == needle[k];
    if (ok) hits.push_back(s);
  }
  return hits;
}

}  // namespace r3::text
