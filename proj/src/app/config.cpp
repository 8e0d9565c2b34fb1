#include "r3/app/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace r3::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || value.empty()) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config key '" + key + "': expected true or false, got '" + value + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> k = {
      "hidden",         "embed_dim",      "reader_layers", "ranker_layers",     "lr",
      "batch_size",     "dropout",        "sample_k",      "min_negatives",     "test_top",
      "max_span_len",   "seed",           "mode",          "precision",         "epochs",
      "pretrain_epochs", "clip_norm",     "kl_weight",     "restricted_policy", "top_articles",
      "top_sentences",  "top_passages",   "threads",       "embed_seed",        "embeddings",
      "init_checkpoint"};
  return k;
}

void Config::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "hidden") hidden = parse_number<int>(key, v);
  else if (key == "embed_dim") embed_dim = parse_number<int>(key, v);
  else if (key == "reader_layers") reader_layers = parse_number<int>(key, v);
  else if (key == "ranker_layers") ranker_layers = parse_number<int>(key, v);
  else if (key == "lr") lr = parse_number<double>(key, v);
  else if (key == "batch_size") batch_size = parse_number<std::size_t>(key, v);
  else if (key == "dropout") dropout = parse_number<double>(key, v);
  else if (key == "sample_k") sample_k = parse_number<std::size_t>(key, v);
  else if (key == "min_negatives") min_negatives = parse_number<std::size_t>(key, v);
  else if (key == "test_top") test_top = parse_number<std::size_t>(key, v);
  else if (key == "max_span_len") max_span_len = parse_number<std::size_t>(key, v);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
  else if (key == "mode") mode = v;
  else if (key == "precision") precision = v;
  else if (key == "epochs") epochs = parse_number<std::size_t>(key, v);
  else if (key == "pretrain_epochs") pretrain_epochs = parse_number<std::size_t>(key, v);
  else if (key == "clip_norm") clip_norm = parse_number<double>(key, v);
  else if (key == "kl_weight") kl_weight = parse_number<double>(key, v);
  else if (key == "restricted_policy") restricted_policy = parse_bool(key, v);
  else if (key == "top_articles") top_articles = parse_number<std::size_t>(key, v);
  else if (key == "top_sentences") top_sentences = parse_number<std::size_t>(key, v);
  else if (key == "top_passages") top_passages = parse_number<std::size_t>(key, v);
  else if (key == "threads") threads = parse_number<std::size_t>(key, v);
  else if (key == "embed_seed") embed_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "embeddings") embeddings = v;
  else if (key == "init_checkpoint") init_checkpoint = v;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string Config::get(const std::string& key) const {
  if (key == "hidden") return std::to_string(hidden);
  if (key == "embed_dim") return std::to_string(embed_dim);
  if (key == "reader_layers") return std::to_string(reader_layers);
  if (key == "ranker_layers") return std::to_string(ranker_layers);
  if (key == "lr") return format_double(lr);
  if (key == "batch_size") return std::to_string(batch_size);
  if (key == "dropout") return format_double(dropout);
  if (key == "sample_k") return std::to_string(sample_k);
  if (key == "min_negatives") return std::to_string(min_negatives);
  if (key == "test_top") return std::to_string(test_top);
  if (key == "max_span_len") return std::to_string(max_span_len);
  if (key == "seed") return std::to_string(seed);
  if (key == "mode") return mode;
  if (key == "precision") return precision;
  if (key == "epochs") return std::to_string(epochs);
  if (key == "pretrain_epochs") return std::to_string(pretrain_epochs);
  if (key == "clip_norm") return format_double(clip_norm);
  if (key == "kl_weight") return format_double(kl_weight);
  if (key == "restricted_policy") return restricted_policy ? "true" : "false";
  if (key == "top_articles") return std::to_string(top_articles);
  if (key == "top_sentences") return std::to_string(top_sentences);
  if (key == "top_passages") return std::to_string(top_passages);
  if (key == "threads") return std::to_string(threads);
  if (key == "embed_seed") return std::to_string(embed_seed);
  if (key == "embeddings") return embeddings;
  if (key == "init_checkpoint") return init_checkpoint;
  throw std::invalid_argument("unknown config key '" + key + "'");
}

void Config::validate() const {
  model_config().validate();
  if (lr <= 0.0) throw std::invalid_argument("config key 'lr' must be positive");
  if (batch_size == 0) throw std::invalid_argument("config key 'batch_size' must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("config key 'dropout' must lie in [0, 1)");
  if (sample_k < min_negatives + 1) throw std::invalid_argument("config key 'sample_k' must be at least min_negatives + 1");
  if (max_span_len == 0) throw std::invalid_argument("config key 'max_span_len' must be positive");
  if (test_top == 0) throw std::invalid_argument("config key 'test_top' must be positive");
  train::parse_train_mode(mode);
  if (precision != "f64") {
    throw std::invalid_argument("config key 'precision': only f64 is supported, got '" + precision + "'");
  }
  if (top_passages == 0 || top_passages > top_sentences) {
    throw std::invalid_argument("config key 'top_passages' must lie in [1, top_sentences]");
  }
  if (top_articles == 0) throw std::invalid_argument("config key 'top_articles' must be positive");
  if (threads == 0) throw std::invalid_argument("config key 'threads' must be positive");
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& k : keys()) out += k + " = " + get(k) + "\n";
  return out;
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Config::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file " + path);
  out << to_text();
}

model::ModelConfig Config::model_config() const {
  model::ModelConfig m;
  m.embed_dim = embed_dim;
  m.hidden = hidden;
  m.reader_layers = reader_layers;
  m.ranker_layers = ranker_layers;
  return m;
}

train::TrainOptions Config::train_options() const {
  train::TrainOptions t;
  t.lr = lr;
  t.batch_size = batch_size;
  t.dropout = dropout;
  t.sample_k = sample_k;
  t.min_negatives = min_negatives;
  t.max_span_len = max_span_len;
  t.clip_norm = clip_norm;
  t.kl_weight = kl_weight;
  t.restricted_policy = restricted_policy;
  t.seed = seed;
  return t;
}

retrieval::RetrieveOptions Config::retrieve_options(retrieval::QueryMode mode) const {
  retrieval::RetrieveOptions r;
  r.top_passages = top_passages;
  r.top_articles = top_articles;
  r.top_sentences = top_sentences;
  r.mode = mode;
  return r;
}

eval::PredictOptions Config::predict_options() const {
  eval::PredictOptions p;
  p.max_span_len = max_span_len;
  p.top_passages = test_top;
  p.policy = mode == "sr" ? eval::PolicySource::Uniform : eval::PolicySource::Ranker;
  return p;
}

}  // namespace r3::app
