#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "r3/autodiff/checkpoint.hpp"
#include "r3/autodiff/graph.hpp"
#include "r3/autodiff/optimizer.hpp"
#include "r3/model/model.hpp"
#include "r3/train/example.hpp"
#include "r3/train/reward.hpp"

namespace r3::train {

enum class TrainMode { SR, SR2, R3 };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& s);

struct TrainOptions {
  double lr = 0.002;
  std::size_t batch_size = 8;
  double dropout = 0.2;
  std::size_t sample_k = 10;      // passages sampled per question
  std::size_t min_negatives = 2;
  std::size_t max_span_len = 15;  // for the answer the reader hands to the reward
  double clip_norm = 5.0;
  double kl_weight = 1.0;         // SR2 ranker term
  bool restricted_policy = false; // renormalize pi over positives in log pi
  std::uint64_t seed = 1;
};

/// One line of the training log.
struct StepRecord {
  std::size_t step = 0;
  TrainMode mode = TrainMode::SR;
  double reader_loss = 0.0;
  std::optional<double> reward;
  std::optional<double> kl_loss;
  std::size_t tau = 0;  // sampled passage, index into the example

  std::string to_json() const;
};

/// Indices (ascending) of a K-subset of the example's passages: as many
/// positives as fit while keeping at least `min_negatives` negatives when the
/// example has them; uniform without replacement within each group.
std::vector<std::size_t> sample_subset(const QaExample& example, std::size_t k, std::size_t min_negatives,
                                       std::mt19937_64& rng);

/// KL(y || gamma) with y uniform over the positives: sum_n y_n (log y_n - log gamma_n).
/// Throws std::invalid_argument without positives.
ad::Var kl_rank_loss(ad::Graph& g, const model::PolicyVars& policy, const std::vector<bool>& positives);

/// Everything the R3 update needs for one example under a fixed passage
/// subset and a fixed choice of tau; used by the trainer and by tests that
/// enumerate tau exactly.
struct R3Terms {
  ad::Var policy_term;  // log pi(tau | q)
  ad::Var reader_loss;
  RewardValue reward;
  std::string extracted;
  model::PolicyVars policy;
};

/// Builds the ranker policy over `subset` and, for `tau` (an index into the
/// example), the reader loss on tau concatenated with the subset's negatives
/// and the reward of the span the reader extracts from tau alone.
R3Terms build_r3_terms(model::Forward& fwd, const QaExample& example, const std::vector<std::size_t>& subset,
                       std::size_t tau, const Occurrence& label, std::size_t max_span_len,
                       bool restricted_policy);

/// Owns the optimizer and the random stream for one training run.
class Trainer {
 public:
  Trainer(model::RankerReader& model, TrainOptions options);

  /// Runs forward/backward for one example and adds its (batch-scaled)
  /// gradients to the parameter grads. No optimizer step.
  StepRecord accumulate(const QaExample& example, TrainMode mode);

  /// Clips, applies one Adamax step, zeroes grads.
  void apply_update();

  /// accumulate + apply_update, i.e. one optimizer step for one example.
  StepRecord step(const QaExample& example, TrainMode mode);

  /// Shuffled epochs with one optimizer step per batch. `on_step` sees every
  /// record as it is produced.
  std::vector<StepRecord> train(const std::vector<QaExample>& data, TrainMode mode, std::size_t epochs,
                                const std::function<void(const StepRecord&)>& on_step = {});

  void reset_optimizer();
  ad::AdamaxState& optimizer_state() { return optimizer_; }
  const ad::AdamaxState& optimizer_state() const { return optimizer_; }
  std::mt19937_64& rng() { return rng_; }
  std::size_t updates() const { return updates_; }
  TrainOptions& options() { return options_; }

 private:
  StepRecord supervised(const QaExample& example, TrainMode mode);
  StepRecord reinforced(const QaExample& example);
  double batch_scale() const;

  model::RankerReader& model_;
  TrainOptions options_;
  ad::AdamaxState optimizer_;
  std::mt19937_64 rng_;
  std::size_t steps_ = 0;
  std::size_t updates_ = 0;
  std::size_t pending_ = 0;
  std::size_t batch_in_progress_ = 1;
};

/// Single example, single optimizer step: sample a passage, read it, reward the span and update.
StepRecord r3_step(Trainer& trainer, const QaExample& example);

void train_sr(Trainer& trainer, const std::vector<QaExample>& data, std::size_t epochs,
              const std::function<void(const StepRecord&)>& on_step = {});
void train_sr2(Trainer& trainer, const std::vector<QaExample>& data, std::size_t epochs,
               const std::function<void(const StepRecord&)>& on_step = {});

/// Copies all parameters from an SR2 checkpoint into `model` and resets the
/// trainer's optimizer state (if a trainer is given). Throws on a missing
/// parameter or a shape mismatch, naming the parameter.
void pretrain_init(model::RankerReader& model, const ad::ParameterStore& sr2_params, Trainer* trainer = nullptr);

}  // namespace r3::train
