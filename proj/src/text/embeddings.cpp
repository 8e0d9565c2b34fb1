#include "r3/text/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace r3::text {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit(std::uint64_t& state) {
  return (static_cast<double>(splitmix(state) >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace

EmbeddingTable EmbeddingTable::load(const std::string& path, int dimension, LoadStats* stats) {
  if (dimension <= 0) throw std::invalid_argument("embedding dimension must be positive");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path);

  EmbeddingTable table;
  table.dimension_ = dimension;
  LoadStats local;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<double> values;
    std::string field;
    bool ok = true;
    while (ls >> field) {
      try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size() || !std::isfinite(v)) ok = false;
        values.push_back(v);
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok || values.size() != static_cast<std::size_t>(dimension)) {
      ++local.malformed;
      continue;
    }
    if (table.ids_.count(token) != 0) {
      ++local.duplicates;
      continue;
    }
    table.ids_.emplace(token, static_cast<std::int64_t>(rows.size()));
    rows.push_back(std::move(values));
  }
  local.loaded = rows.size();
  if (stats != nullptr) *stats = local;
  if (rows.empty()) throw std::runtime_error("embedding file " + path + " has no usable lines");

  table.vectors_.resize(dimension, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (int r = 0; r < dimension; ++r) table.vectors_(r, static_cast<Eigen::Index>(c)) = rows[c][r];
  }
  return table;
}

EmbeddingTable EmbeddingTable::synthetic(int dimension, std::uint64_t seed) {
  if (dimension <= 0) throw std::invalid_argument("embedding dimension must be positive");
  EmbeddingTable table;
  table.dimension_ = dimension;
  table.vectors_.resize(dimension, 0);
  table.synthetic_seed_ = seed;
  return table;
}

bool EmbeddingTable::contains(const std::string& token) const {
  return synthetic_seed_.has_value() || ids_.count(token) != 0;
}

Eigen::VectorXd EmbeddingTable::vector(const std::string& token) const {
  if (synthetic_seed_) {
    // Standard normal entries via Box-Muller on a per-token splitmix stream.
    std::uint64_t state = fnv1a(token) ^ (*synthetic_seed_ * 0x2545F4914F6CDD1DULL);
    Eigen::VectorXd v(dimension_);
    for (int i = 0; i < dimension_; i += 2) {
      const double u1 = unit(state);
      const double u2 = unit(state);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      v(i) = radius * std::cos(2.0 * std::numbers::pi * u2);
      if (i + 1 < dimension_) v(i + 1) = radius * std::sin(2.0 * std::numbers::pi * u2);
    }
    return v;
  }
  auto it = ids_.find(token);
  if (it == ids_.end()) return Eigen::VectorXd::Zero(dimension_);
  return vectors_.col(it->second);
}

TokenSequence EmbeddingTable::index(const Tokens& tokens) const {
  TokenSequence seq;
  seq.tokens = tokens;
  seq.ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = ids_.find(t);
    seq.ids.push_back(it == ids_.end() ? TokenSequence::kUnknown : it->second);
  }
  return seq;
}

ad::Matrix embed(const TokenSequence& seq, const EmbeddingTable& table) {
  if (seq.tokens.empty()) throw std::invalid_argument("embed: empty token sequence");
  ad::Matrix out(table.dimension(), static_cast<Eigen::Index>(seq.tokens.size()));
  for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
    out.col(static_cast<Eigen::Index>(t)) = table.vector(seq.tokens[t]);
  }
  return out;
}

}  // namespace r3::text
