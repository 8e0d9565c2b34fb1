#include "r3/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace r3::train {

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::SR: return "sr";
    case TrainMode::SR2: return "sr2";
    case TrainMode::R3: return "r3";
  }
  return "?";
}

TrainMode parse_train_mode(const std::string& s) {
  if (s == "sr") return TrainMode::SR;
  if (s == "sr2") return TrainMode::SR2;
  if (s == "r3") return TrainMode::R3;
  throw std::invalid_argument("unknown training mode '" + s + "' (expected sr, sr2 or r3)");
}

std::string StepRecord::to_json() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["mode"] = train::to_string(mode);
  if (reward) j["reward"] = *reward;
  j["reader_loss"] = reader_loss;
  if (kl_loss) j["kl_loss"] = *kl_loss;
  j["tau"] = tau;
  return j.dump();
}

std::vector<std::size_t> sample_subset(const QaExample& example, std::size_t k, std::size_t min_negatives,
                                       std::mt19937_64& rng) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < example.passages.size(); ++i) {
    (example.passages[i].positive ? pos : neg).push_back(i);
  }
  if (k == 0) throw std::invalid_argument("sample_subset: k must be positive");
  std::size_t n_neg = std::min(neg.size(), std::max(min_negatives, k > pos.size() ? k - pos.size() : 0));
  n_neg = std::min(n_neg, k);
  std::size_t n_pos = std::min(pos.size(), k - n_neg);
  if (n_pos == 0 && !pos.empty()) {
    n_pos = 1;
    n_neg = std::min(n_neg, k - 1);
  }
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<std::size_t> subset(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n_pos));
  subset.insert(subset.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(n_neg));
  std::sort(subset.begin(), subset.end());
  return subset;
}

ad::Var kl_rank_loss(ad::Graph& g, const model::PolicyVars& policy, const std::vector<bool>& positives) {
  const auto n = g.value(policy.logits).rows();
  if (static_cast<Eigen::Index>(positives.size()) != n) {
    throw std::invalid_argument("kl_rank_loss: flag count does not match the policy");
  }
  const auto np = static_cast<double>(std::count(positives.begin(), positives.end(), true));
  if (np == 0.0) throw std::invalid_argument("kl_rank_loss: no positive passage");
  ad::Matrix y = ad::Matrix::Zero(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (positives[static_cast<std::size_t>(i)]) y(i, 0) = 1.0 / np;
  }
  // sum_n y_n log y_n = log(1 / np) on the support; 0 log 0 = 0 elsewhere.
  const double entropy_term = std::log(1.0 / np);
  const ad::Var cross = g.sum(g.mul(g.log_softmax_cols(policy.logits), g.constant(std::move(y))));
  return g.sub(g.constant(ad::Matrix::Constant(1, 1, entropy_term)), cross);
}

namespace {

struct SubsetForward {
  ad::Var hq;
  std::vector<model::MatchRepresentation> reps;  // aligned with the subset
  std::vector<bool> built;
};

SubsetForward start_subset(model::Forward& fwd, const QaExample& ex, std::size_t subset_size) {
  SubsetForward s;
  s.hq = fwd.encode(ex.question_embedded);
  s.reps.resize(subset_size);
  s.built.assign(subset_size, false);
  return s;
}

model::MatchRepresentation& rep(model::Forward& fwd, SubsetForward& s, const QaExample& ex,
                                const std::vector<std::size_t>& subset, std::size_t local) {
  if (!s.built[local]) {
    const ad::Var hp = fwd.encode(ex.passages[subset[local]].embedded);
    s.reps[local] = fwd.match(s.hq, hp);
    s.built[local] = true;
  }
  return s.reps[local];
}

model::PolicyVars subset_policy(model::Forward& fwd, SubsetForward& s, const QaExample& ex,
                                const std::vector<std::size_t>& subset) {
  std::vector<ad::Var> h_rank;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    auto& r = rep(fwd, s, ex, subset, i);
    fwd.add_rank_view(r);
    h_rank.push_back(r.h_rank);
  }
  return fwd.policy(h_rank);
}

/// Reader loss over tau followed by the subset's negatives.
std::pair<ad::Var, ad::Var> reader_loss(model::Forward& fwd, SubsetForward& s, const QaExample& ex,
                                        const std::vector<std::size_t>& subset, std::size_t tau_local,
                                        const Occurrence& label) {
  std::vector<ad::Var> h_read;
  auto& tau_rep = rep(fwd, s, ex, subset, tau_local);
  fwd.add_read_view(tau_rep);
  h_read.push_back(tau_rep.h_read);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (ex.passages[subset[i]].positive) continue;
    auto& r = rep(fwd, s, ex, subset, i);
    fwd.add_read_view(r);
    h_read.push_back(r.h_read);
  }
  const auto spans = fwd.spans(h_read);
  return {span_loss(fwd.graph(), spans, {0, label.start, label.end}), tau_rep.h_read};
}

std::vector<bool> flags(const QaExample& ex, const std::vector<std::size_t>& subset) {
  std::vector<bool> out;
  for (auto i : subset) out.push_back(ex.passages[i].positive);
  return out;
}

std::size_t local_index(const std::vector<std::size_t>& subset, std::size_t tau) {
  auto it = std::find(subset.begin(), subset.end(), tau);
  if (it == subset.end()) throw std::invalid_argument("tau is not part of the passage subset");
  return static_cast<std::size_t>(it - subset.begin());
}

}  // namespace

R3Terms build_r3_terms(model::Forward& fwd, const QaExample& example, const std::vector<std::size_t>& subset,
                       std::size_t tau, const Occurrence& label, std::size_t max_span_len,
                       bool restricted_policy) {
  const std::size_t tau_local = local_index(subset, tau);
  if (!example.passages[tau].positive) throw std::invalid_argument("build_r3_terms: tau must be a positive passage");
  SubsetForward s = start_subset(fwd, example, subset.size());
  R3Terms t;
  t.policy = subset_policy(fwd, s, example, subset);
  const auto positive = flags(example, subset);
  t.policy_term = model::log_policy(fwd.graph(), t.policy, tau_local, restricted_policy ? &positive : nullptr);

  auto [loss, h_tau] = reader_loss(fwd, s, example, subset, tau_local, label);
  t.reader_loss = loss;

  const ad::Var single[] = {h_tau};
  const auto alone = model::to_distribution(fwd.graph(), fwd.spans(single));
  const auto best = model::extract_best_span(alone, max_span_len);
  t.extracted = text::join(example.passages[tau].tokens, best.label.start, best.label.end + 1);
  t.reward = best_reward(example.answers, t.extracted);
  return t;
}

Trainer::Trainer(model::RankerReader& model, TrainOptions options)
    : model_(model), options_(options), rng_(options.seed) {
  if (options_.sample_k < options_.min_negatives + 1) {
    throw std::invalid_argument("sample_k must exceed min_negatives");
  }
}

double Trainer::batch_scale() const { return 1.0 / static_cast<double>(std::max<std::size_t>(1, batch_in_progress_)); }

StepRecord Trainer::accumulate(const QaExample& example, TrainMode mode) {
  if (example.positive_count() == 0) throw std::invalid_argument("training example '" + example.id + "' has no positive passage");
  StepRecord rec = mode == TrainMode::R3 ? reinforced(example) : supervised(example, mode);
  rec.step = steps_++;
  rec.mode = mode;
  ++pending_;
  return rec;
}

StepRecord Trainer::supervised(const QaExample& example, TrainMode mode) {
  const auto subset = sample_subset(example, options_.sample_k, options_.min_negatives, rng_);
  const auto positive = flags(example, subset);
  std::vector<std::size_t> pos_local;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (positive[i]) pos_local.push_back(i);
  }
  std::uniform_int_distribution<std::size_t> pick_pos(0, pos_local.size() - 1);
  const std::size_t tau_local = pos_local[pick_pos(rng_)];
  const auto& spans = example.passages[subset[tau_local]].answer_spans;
  std::uniform_int_distribution<std::size_t> pick_span(0, spans.size() - 1);
  const Occurrence label = spans[pick_span(rng_)];

  ad::Graph g;
  model::Forward fwd(model_, g, {options_.dropout, &rng_});
  SubsetForward s = start_subset(fwd, example, subset.size());
  const bool with_ranker = mode == TrainMode::SR2 && options_.kl_weight != 0.0;

  StepRecord rec;
  rec.tau = subset[tau_local];
  ad::Var total = reader_loss(fwd, s, example, subset, tau_local, label).first;
  rec.reader_loss = g.scalar(total);
  if (with_ranker) {
    const auto policy = subset_policy(fwd, s, example, subset);
    const ad::Var kl = kl_rank_loss(g, policy, positive);
    rec.kl_loss = g.scalar(kl);
    total = g.add(total, g.scale(kl, options_.kl_weight));
  } else if (mode == TrainMode::SR2) {
    rec.kl_loss = 0.0;
  }
  g.backward(g.scale(total, batch_scale()));
  return rec;
}

StepRecord Trainer::reinforced(const QaExample& example) {
  const auto subset = sample_subset(example, options_.sample_k, options_.min_negatives, rng_);
  const auto positive = flags(example, subset);

  ad::Graph g;
  model::Forward fwd(model_, g, {options_.dropout, &rng_});
  SubsetForward s = start_subset(fwd, example, subset.size());
  const auto policy = subset_policy(fwd, s, example, subset);
  const auto gamma = model::to_distribution(g, policy).gamma;
  const std::size_t tau_local = model::sample_passage(gamma, positive, model::SampleMode::Train, rng_);
  const std::size_t tau = subset[tau_local];
  const auto& spans = example.passages[tau].answer_spans;
  std::uniform_int_distribution<std::size_t> pick_span(0, spans.size() - 1);
  const Occurrence label = spans[pick_span(rng_)];

  const ad::Var log_pi =
      model::log_policy(g, policy, tau_local, options_.restricted_policy ? &positive : nullptr);
  auto [loss, h_tau] = reader_loss(fwd, s, example, subset, tau_local, label);
  const ad::Var single[] = {h_tau};
  const auto alone = model::to_distribution(g, fwd.spans(single));
  const auto best = model::extract_best_span(alone, options_.max_span_len);
  const auto r = best_reward(example.answers, text::join(example.passages[tau].tokens, best.label.start, best.label.end + 1));

  StepRecord rec;
  rec.tau = tau;
  rec.reader_loss = g.scalar(loss);
  rec.reward = r.value;
  // J = L - r log pi: policy gradient on the ranker, supervised gradient on the reader.
  const ad::Var total = g.sub(loss, g.scale(log_pi, r.value));
  g.backward(g.scale(total, batch_scale()));
  return rec;
}

void Trainer::apply_update() {
  if (pending_ == 0) return;
  if (options_.clip_norm > 0.0) ad::clip_grad_norm(model_.params(), options_.clip_norm);
  ad::adamax_step(model_.params(), optimizer_, {options_.lr});
  model_.params().zero_grad();
  pending_ = 0;
  ++updates_;
}

StepRecord Trainer::step(const QaExample& example, TrainMode mode) {
  batch_in_progress_ = 1;
  auto rec = accumulate(example, mode);
  apply_update();
  return rec;
}

std::vector<StepRecord> Trainer::train(const std::vector<QaExample>& data, TrainMode mode, std::size_t epochs,
                                       const std::function<void(const StepRecord&)>& on_step) {
  std::vector<StepRecord> log;
  if (data.empty()) return log;
  const std::size_t batch = std::max<std::size_t>(1, options_.batch_size);
  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng_);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      batch_in_progress_ = stop - start;
      for (std::size_t i = start; i < stop; ++i) {
        log.push_back(accumulate(data[order[i]], mode));
        if (on_step) on_step(log.back());
      }
      apply_update();
    }
  }
  batch_in_progress_ = 1;
  return log;
}

void Trainer::reset_optimizer() {
  optimizer_ = {};
  model_.params().zero_grad();
  pending_ = 0;
}

StepRecord r3_step(Trainer& trainer, const QaExample& example) { return trainer.step(example, TrainMode::R3); }

void train_sr(Trainer& trainer, const std::vector<QaExample>& data, std::size_t epochs,
              const std::function<void(const StepRecord&)>& on_step) {
  trainer.train(data, TrainMode::SR, epochs, on_step);
}

void train_sr2(Trainer& trainer, const std::vector<QaExample>& data, std::size_t epochs,
               const std::function<void(const StepRecord&)>& on_step) {
  trainer.train(data, TrainMode::SR2, epochs, on_step);
}

void pretrain_init(model::RankerReader& model, const ad::ParameterStore& sr2_params, Trainer* trainer) {
  ad::copy_parameters(sr2_params, model.params());
  if (trainer != nullptr) trainer->reset_optimizer();
}

}  // namespace r3::train
