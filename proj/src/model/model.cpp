#include "r3/model/model.hpp"

#include <stdexcept>

namespace r3::model {

void ModelConfig::validate() const {
  if (embed_dim <= 0) throw std::invalid_argument("embed_dim must be positive");
  if (hidden <= 0 || hidden % 2 != 0) throw std::invalid_argument("hidden size l must be a positive even number");
  if (reader_layers < 1 || ranker_layers < 1) throw std::invalid_argument("layer counts must be at least 1");
  if (!(init_range > 0.0)) throw std::invalid_argument("init_range must be positive");
}

RankerReader::RankerReader(const ModelConfig& config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  const int l = config_.hidden;
  add_bilstm(block::kEncoder, config_.embed_dim);
  params_.add("attend.wg", l, l);
  params_.add("attend.bg", l, 1);
  params_.add("match.wm", 2 * l, 4 * l);
  for (int k = 0; k < config_.ranker_layers; ++k) {
    add_bilstm(std::string(block::kRankAggregate) + std::to_string(k) + ".", k == 0 ? 2 * l : l);
  }
  for (int k = 0; k < config_.reader_layers; ++k) {
    add_bilstm(std::string(block::kReadAggregate) + std::to_string(k) + ".", k == 0 ? 2 * l : l);
  }
  params_.add("ranker.w", l, l);
  params_.add("ranker.b", l, 1);
  params_.add("ranker.v", 1, l);
  for (const char* side : {"start", "end"}) {
    const std::string p = std::string(block::kReader) + side + ".";
    params_.add(p + "w", l, l);
    params_.add(p + "b", l, 1);
    params_.add(p + "v", 1, l);
  }
  initialize(init_seed);
}

void RankerReader::add_bilstm(const std::string& prefix, int input_dim) {
  const int h = config_.hidden / 2;
  for (const char* dir : {"fw", "bw"}) {
    const std::string p = prefix + dir + ".";
    params_.add(p + "wx", 4 * h, input_dim);
    params_.add(p + "wh", 4 * h, h);
    params_.add(p + "b", 4 * h, 1);
  }
}

void RankerReader::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-config_.init_range, config_.init_range);
  const int h = config_.hidden / 2;
  for (auto& p : params_) {
    const std::string& name = p->name;
    const bool is_bias = name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0;
    const bool lstm_bias = is_bias && (name.find(".fw.") != std::string::npos || name.find(".bw.") != std::string::npos);
    if (is_bias) {
      p->value.setZero();
      if (lstm_bias) p->value.middleRows(h, h).setConstant(config_.forget_bias);
    } else if (name == "attend.bg") {
      p->value.setZero();
    } else {
      for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = uniform(rng);
    }
    p->grad.setZero();
  }
}

Forward::Forward(RankerReader& model, ad::Graph& graph, Dropout dropout)
    : model_(model), graph_(graph), dropout_(dropout) {}

ad::Var Forward::param(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  const ad::Var v = graph_.param(model_.params().at(name));
  bound_.emplace(name, v);
  return v;
}

BiLstmVars Forward::bilstm(const std::string& prefix) {
  return {param(prefix + "fw.wx"), param(prefix + "fw.wh"), param(prefix + "fw.b"),
          param(prefix + "bw.wx"), param(prefix + "bw.wh"), param(prefix + "bw.b")};
}

SpanHeadVars Forward::head(const std::string& prefix) {
  return {param(prefix + "w"), param(prefix + "b"), param(prefix + "v")};
}

ad::Var Forward::dropout(ad::Var x) {
  if (dropout_.rng == nullptr || dropout_.rate <= 0.0) return x;
  const ad::Matrix& v = graph_.value(x);
  std::bernoulli_distribution keep(1.0 - dropout_.rate);
  ad::Matrix mask(v.rows(), v.cols());
  const double scale = 1.0 / (1.0 - dropout_.rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*dropout_.rng) ? scale : 0.0;
  return graph_.mul(x, graph_.constant(std::move(mask)));
}

ad::Var Forward::encode(const ad::Matrix& embedded) {
  const ad::Var x = graph_.constant(embedded);
  return dropout(model::encode(graph_, x, bilstm(block::kEncoder)));
}

MatchRepresentation Forward::match(ad::Var hq, ad::Var hp) {
  MatchRepresentation rep;
  const ad::Var g = attend(graph_, hq, hp, param("attend.wg"), param("attend.bg"));
  rep.m = dropout(model::match(graph_, hp, hq, g, param("match.wm")));
  return rep;
}

void Forward::add_rank_view(MatchRepresentation& rep) {
  if (rep.has_rank) return;
  std::vector<BiLstmVars> layers;
  for (int k = 0; k < model_.config().ranker_layers; ++k) {
    layers.push_back(bilstm(std::string(block::kRankAggregate) + std::to_string(k) + "."));
  }
  rep.h_rank = aggregate(graph_, rep.m, layers);
  rep.has_rank = true;
}

void Forward::add_read_view(MatchRepresentation& rep) {
  if (rep.has_read) return;
  std::vector<BiLstmVars> layers;
  for (int k = 0; k < model_.config().reader_layers; ++k) {
    layers.push_back(bilstm(std::string(block::kReadAggregate) + std::to_string(k) + "."));
  }
  rep.h_read = aggregate(graph_, rep.m, layers);
  rep.has_read = true;
}

PolicyVars Forward::policy(std::span<const ad::Var> h_rank) {
  return score_passages(graph_, h_rank, param("ranker.w"), param("ranker.b"), param("ranker.v"));
}

SpanVars Forward::spans(std::span<const ad::Var> h_read) {
  return span_distributions(graph_, h_read, head("reader.start."), head("reader.end."));
}

}  // namespace r3::model
