#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reflect/abstractor.hpp"
#include "reflect/corpus.hpp"
#include "reflect/extractor.hpp"
#include "reflect/supervision.hpp"

namespace reflect {

enum class CreditMode { All, Distinct, Intersection };
enum class OptimizerKind { Sgd, Adam };

CreditMode parse_credit_mode(const std::string& name);
std::string to_string(CreditMode mode);

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t epochs = 10;
  double gamma = 10.0;
  bool sr_enabled = false;
  bool por_enabled = true;
  CreditMode credit_mode = CreditMode::Distinct;
  std::uint64_t seed = 0;
  std::size_t batch = 1;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  std::size_t window = 3;
  std::size_t chunk_budget = 512;
  RewardConfig reward;
  // Reference used before any extractor exists (epoch 0, validation).
  ReferencePolicy::Kind bootstrap = ReferencePolicy::Kind::All;
  std::size_t lead_k = 1;
  bool abort_on_abstractor_error = false;
};

// One cluster with everything training needs precomputed.
struct Example {
  DocumentCluster cluster;
  SupervisionRecord supervision;
  GoldSummary gold;
  ChunkPlan plan;
};

// Supervision is matched by cluster id; clusters without a summary are
// dropped with a warning.
std::vector<Example> make_examples(std::vector<DocumentCluster> clusters,
                                   const std::vector<SupervisionRecord>& supervision,
                                   const TokenizerConfig& tokenizer, std::size_t chunk_budget);

// L = −Σ wᵢ log softmax(zᵢ)[1_oracle(i)]
double mle_loss(const SentenceLogits& logits, const IndexSet& oracle,
                const std::vector<double>& weights);
SentenceLogits mle_logit_grad(const SentenceLogits& logits, const IndexSet& oracle,
                              const std::vector<double>& weights);
std::vector<double> mle_grad(const FeatureMatrix& features, const ScorerParams& params,
                             const IndexSet& oracle, const std::vector<double>& weights);

IndexSet credit_mask(const IndexSet& sampled, const IndexSet& greedy, CreditMode mode,
                     std::size_t arms);

struct PolicyRollout {
  std::vector<int> outcomes;
  IndexSet sampled;
  IndexSet greedy;
  double reward_sample = 0.0;
  double reward_greedy = 0.0;
  double advantage = 0.0;
  IndexSet mask;
};

// −a · Σ_{i ∈ mask} log p(action i)
double casc_loss(const SentenceLogits& logits, const PolicyRollout& rollout);
SentenceLogits casc_logit_grad(const SentenceLogits& logits, const PolicyRollout& rollout);
std::vector<double> casc_grad(const FeatureMatrix& features, const ScorerParams& params,
                              const PolicyRollout& rollout);

using RewardFn = std::function<double(const IndexSet&)>;

// One sampled and one greedy rollout of the single-round bandit.
PolicyRollout rollout(const SentenceLogits& logits, const RewardFn& reward_fn, CreditMode mode,
                      Rng& rng);

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate);
  void step(std::vector<double>& params, const std::vector<double>& grad);

 private:
  OptimizerKind kind_;
  double lr_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

struct MetricsEntry {
  std::size_t step = 0;
  double loss = 0.0;
  std::optional<double> mean_reward_sample;
  std::optional<double> mean_reward_greedy;
  std::optional<double> mean_advantage;
  double mean_set_size = 0.0;
};

std::string serialize_metrics(const MetricsEntry& entry);

struct TrainResult {
  ScorerParams params;
  std::size_t best_epoch = 0;  // 0 = initial params
  double best_validation = 0.0;
  std::vector<MetricsEntry> log;
};

struct StepLog {
  PolicyRollout rollout;
  double loss = 0.0;
  bool skipped = false;
};

// Reference for one example given the current extractor state.
Tokens bootstrap_reference(const Example& example, const TrainConfig& config,
                           Abstractor& abstractor);
Tokens refined_reference(const Example& example, const ScorerParams& params,
                         const Tokens& conditioning, Abstractor& abstractor);

// Mean ROUGE-1 F1 of abstracted greedy selections (model-selection signal).
// References come from `reference_abstractor` when given, else `abstractor`.
double validation_score(const std::vector<Example>& examples, const ScorerParams& params,
                        const TrainConfig& config, Abstractor& abstractor,
                        Abstractor* reference_abstractor = nullptr);

// Weighted-MLE training; returns the epoch with the best validation score
// (the last epoch when `validation` is empty).
TrainResult train_mle(const std::vector<Example>& train, const std::vector<Example>& validation,
                      const TrainConfig& config, Abstractor& abstractor,
                      Abstractor* reference_abstractor = nullptr);

// One credit-aware self-critic update on a single cluster.
StepLog casc_step(const Example& example, ScorerParams& params, const TrainConfig& config,
                  Abstractor& abstractor, Rng& rng, Optimizer& optimizer,
                  const Tokens* reference = nullptr);

// Self-critic fine-tuning from `initial`; epoch selection as in train_mle.
TrainResult train_casc(const std::vector<Example>& train, const std::vector<Example>& validation,
                       const ScorerParams& initial, const TrainConfig& config,
                       Abstractor& abstractor, Abstractor* reference_abstractor = nullptr);

// Synthetic single-round bandit: arms carry random features, a hidden linear
// rule marks the target set, and the reward is the Jaccard index of the
// selection with that target.
struct SyntheticBandit {
  std::vector<FeatureMatrix> instances;
  std::vector<IndexSet> targets;
};

SyntheticBandit make_synthetic_bandit(std::size_t instances, std::size_t arms, std::size_t dim,
                                      std::uint64_t seed);
double jaccard(const IndexSet& a, const IndexSet& b);
double mean_greedy_reward(const SyntheticBandit& bandit, const ScorerParams& params);
// Seeded random head so the initial greedy policy is non-trivial.
ScorerParams synthetic_initial_params(std::size_t dim, std::size_t window, std::uint64_t seed);
ScorerParams train_synthetic_bandit(const SyntheticBandit& bandit, ScorerParams params,
                                    CreditMode mode, std::size_t steps, double learning_rate,
                                    std::uint64_t seed);

}  // namespace reflect
