#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace r3::text {

using Tokens = std::vector<std::string>;

/// Lowercases, splits on whitespace, and peels leading/trailing punctuation
/// characters off each chunk as one-character tokens. Inner punctuation
/// ("104,688", "u.s") stays attached.
Tokens tokenize(std::string_view text);

std::string join(const Tokens& tokens, std::size_t begin, std::size_t end);
std::string join(const Tokens& tokens);

/// Every start offset at which `needle` occurs as a contiguous run in
/// `haystack`. An empty needle never matches.
std::vector<std::size_t> find_all(const Tokens& haystack, const Tokens& needle);

}  // namespace r3::text
