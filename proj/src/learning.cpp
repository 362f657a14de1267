#include "reflect/learning.hpp"

#include <cmath>
#include <json.hpp>
#include <limits>
#include <map>
#include <numeric>

#include "reflect/parallel.hpp"

namespace reflect {

CreditMode parse_credit_mode(const std::string& name) {
  if (name == "all") return CreditMode::All;
  if (name == "distinct") return CreditMode::Distinct;
  if (name == "intersection") return CreditMode::Intersection;
  throw UsageError("unknown credit mode '" + name + "'");
}

std::string to_string(CreditMode mode) {
  switch (mode) {
    case CreditMode::All: return "all";
    case CreditMode::Distinct: return "distinct";
    case CreditMode::Intersection: return "intersection";
  }
  return "distinct";
}

std::vector<Example> make_examples(std::vector<DocumentCluster> clusters,
                                   const std::vector<SupervisionRecord>& supervision,
                                   const TokenizerConfig& tokenizer, std::size_t chunk_budget) {
  std::map<std::string, const SupervisionRecord*> by_id;
  for (const auto& r : supervision) by_id[r.id] = &r;
  std::vector<Example> out;
  out.reserve(clusters.size());
  for (auto& cluster : clusters) {
    if (!cluster.summary || tokenize(*cluster.summary, tokenizer).empty()) {
      warn("cluster '" + cluster.id + "' has no gold summary; skipped");
      continue;
    }
    Example ex;
    if (!supervision.empty()) {
      auto it = by_id.find(cluster.id);
      if (it == by_id.end()) {
        warn("cluster '" + cluster.id + "' has no supervision record; skipped");
        continue;
      }
      ex.supervision = *it->second;
      if (ex.supervision.weights.size() != cluster.size()) {
        throw DataError("supervision for '" + cluster.id + "' has " +
                        std::to_string(ex.supervision.weights.size()) + " weights but the cluster has " +
                        std::to_string(cluster.size()) + " sentences");
      }
      if (!ex.supervision.oracle.empty() && ex.supervision.oracle.back() >= cluster.size()) {
        throw DataError("supervision for '" + cluster.id + "' indexes past the last sentence");
      }
    } else {
      ex.supervision.id = cluster.id;
      ex.supervision.weights.assign(cluster.size(), 1.0);
    }
    ex.gold = make_gold(cluster, tokenizer);
    ex.plan = make_chunk_plan(cluster, chunk_budget);
    ex.cluster = std::move(cluster);
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {
// Probability of class 1 without the (0, 1) clamp, for exact gradients.
double sigmoid(double d) {
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}
}  // namespace

double mle_loss(const SentenceLogits& logits, const IndexSet& oracle,
                const std::vector<double>& weights) {
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    loss -= weights.at(i) * log_prob(logits[i], contains(oracle, i));
  }
  return loss;
}

SentenceLogits mle_logit_grad(const SentenceLogits& logits, const IndexSet& oracle,
                              const std::vector<double>& weights) {
  SentenceLogits g(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double d = logits[i].z1 - logits[i].z0;
    // dL/dz1 = w (p1 - y); dL/dz0 = -dL/dz1
    const double r = contains(oracle, i) ? -sigmoid(-d) : sigmoid(d);
    g[i] = {-weights.at(i) * r, weights.at(i) * r};
  }
  return g;
}

std::vector<double> mle_grad(const FeatureMatrix& features, const ScorerParams& params,
                             const IndexSet& oracle, const std::vector<double>& weights) {
  return score_backward(features, params, mle_logit_grad(score(features, params), oracle, weights));
}

IndexSet credit_mask(const IndexSet& sampled, const IndexSet& greedy, CreditMode mode,
                     std::size_t arms) {
  switch (mode) {
    case CreditMode::All: return all_indices(arms);
    case CreditMode::Distinct: return set_symmetric_difference(sampled, greedy);
    case CreditMode::Intersection: return set_intersection(sampled, greedy);
  }
  return {};
}

double casc_loss(const SentenceLogits& logits, const PolicyRollout& rollout) {
  if (rollout.advantage == 0.0) return 0.0;
  return -rollout.advantage * select_log_prob(logits, rollout.sampled, &rollout.mask);
}

SentenceLogits casc_logit_grad(const SentenceLogits& logits, const PolicyRollout& rollout) {
  SentenceLogits g(logits.size());
  if (rollout.advantage == 0.0) return g;
  for (std::size_t i : rollout.mask) {
    const double d = logits.at(i).z1 - logits.at(i).z0;
    const double r = contains(rollout.sampled, i) ? -sigmoid(-d) : sigmoid(d);
    g[i] = {-rollout.advantage * r, rollout.advantage * r};
  }
  return g;
}

std::vector<double> casc_grad(const FeatureMatrix& features, const ScorerParams& params,
                              const PolicyRollout& rollout) {
  return score_backward(features, params, casc_logit_grad(score(features, params), rollout));
}

PolicyRollout rollout(const SentenceLogits& logits, const RewardFn& reward_fn, CreditMode mode,
                      Rng& rng) {
  PolicyRollout r;
  SampledSelection sample = sample_select(logits, rng);
  r.outcomes = std::move(sample.outcomes);
  r.sampled = std::move(sample.indices);
  r.greedy = greedy_select(logits).indices;
  r.reward_sample = reward_fn(r.sampled);
  r.reward_greedy = r.greedy == r.sampled ? r.reward_sample : reward_fn(r.greedy);
  r.advantage = r.reward_sample - r.reward_greedy;
  r.mask = credit_mask(r.sampled, r.greedy, mode, logits.size());
  return r;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
}

void Optimizer::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (m_.empty()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

std::string serialize_metrics(const MetricsEntry& entry) {
  nlohmann::ordered_json j;
  j["step"] = entry.step;
  j["loss"] = entry.loss;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["mean_reward_sample"] = opt(entry.mean_reward_sample);
  j["mean_reward_greedy"] = opt(entry.mean_reward_greedy);
  j["mean_advantage"] = opt(entry.mean_advantage);
  j["mean_set_size"] = entry.mean_set_size;
  return j.dump();
}

Tokens bootstrap_reference(const Example& example, const TrainConfig& config,
                           Abstractor& abstractor) {
  ReferencePolicy policy;
  policy.kind = config.bootstrap;
  policy.lead_k = config.lead_k;
  return make_reference(example.cluster, policy, abstractor).tokens;
}

Tokens refined_reference(const Example& example, const ScorerParams& params,
                         const Tokens& conditioning, Abstractor& abstractor) {
  ReferencePolicy policy;
  policy.kind = ReferencePolicy::Kind::Extractor;
  policy.params = &params;
  policy.chunk_budget = example.plan.budget;
  policy.conditioning = &conditioning;
  return make_reference(example.cluster, policy, abstractor).tokens;
}

namespace {

// Test-time reference for a summary-referencing extractor: bootstrap, then
// one pass of the extractor conditioned on it.
std::vector<Tokens> current_references(const std::vector<Example>& examples,
                                       const ScorerParams& params, const TrainConfig& config,
                                       Abstractor& abstractor, bool refine) {
  std::vector<Tokens> refs(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) {
    Tokens boot = bootstrap_reference(examples[i], config, abstractor);
    refs[i] = refine ? refined_reference(examples[i], params, boot, abstractor) : std::move(boot);
  });
  return refs;
}

std::vector<FeatureMatrix> encode_all(const std::vector<Example>& examples,
                                      const std::vector<Tokens>* refs) {
  std::vector<FeatureMatrix> out(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) {
    out[i] = encode(examples[i].cluster, examples[i].plan, refs ? &(*refs)[i] : nullptr);
  });
  return out;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "order", epoch));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

void add_into(std::vector<double>& acc, const std::vector<double>& g) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
}

}  // namespace

double validation_score(const std::vector<Example>& examples, const ScorerParams& params,
                        const TrainConfig& config, Abstractor& abstractor,
                        Abstractor* reference_abstractor) {
  if (examples.empty()) return 0.0;
  Abstractor& ref_abs = reference_abstractor ? *reference_abstractor : abstractor;
  std::vector<Tokens> refs;
  if (config.sr_enabled) refs = current_references(examples, params, config, ref_abs, true);
  std::vector<double> scores(examples.size(), 0.0);
  const RewardConfig r1{RougeVariant::ngram(1), RougeStat::F1, config.reward.stemming};
  parallel_for(examples.size(), [&](std::size_t i) {
    const auto& ex = examples[i];
    const FeatureMatrix f = encode(ex.cluster, ex.plan, config.sr_enabled ? &refs[i] : nullptr);
    const IndexSet chosen = greedy_select(score(f, params)).indices;
    try {
      scores[i] = reward(ex.cluster, chosen, ex.gold, abstractor, r1);
    } catch (const ExternalError& e) {
      warn("validation skipped '" + ex.cluster.id + "': " + e.what());
    }
  });
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

TrainResult train_mle(const std::vector<Example>& train, const std::vector<Example>& validation,
                      const TrainConfig& config, Abstractor& abstractor,
                      Abstractor* reference_abstractor) {
  Abstractor& ref_abs = reference_abstractor ? *reference_abstractor : abstractor;
  TrainResult result;
  ScorerParams params = ScorerParams::initial(feature::kDim, config.window);
  result.params = params;
  if (config.epochs == 0 || train.empty()) return result;
  result.best_validation = validation_score(validation, params, config, abstractor, &ref_abs);

  Optimizer opt(config.optimizer, config.learning_rate);
  const std::size_t batch = std::max<std::size_t>(config.batch, 1);
  std::vector<Tokens> refs;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.sr_enabled) refs = current_references(train, params, config, ref_abs, epoch > 1);
    const auto features = encode_all(train, config.sr_enabled ? &refs : nullptr);
    const auto order = shuffled_order(train.size(), config.seed, epoch);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      std::vector<std::vector<double>> grads(count);
      std::vector<double> losses(count, 0.0);
      parallel_for(count, [&](std::size_t b) {
        const Example& ex = train[order[start + b]];
        const FeatureMatrix& f = features[order[start + b]];
        const std::vector<double> unit(ex.cluster.size(), 1.0);
        const auto& w = config.por_enabled ? ex.supervision.weights : unit;
        const SentenceLogits z = score(f, params);
        losses[b] = mle_loss(z, ex.supervision.oracle, w);
        grads[b] = score_backward(f, params, mle_logit_grad(z, ex.supervision.oracle, w));
      });
      std::vector<double> total(params.size(), 0.0);
      for (std::size_t b = 0; b < count; ++b) {
        if (!std::isfinite(losses[b])) {
          throw TrainingError("non-finite MLE loss on cluster '" +
                              train[order[start + b]].cluster.id + "' at epoch " +
                              std::to_string(epoch));
        }
        epoch_loss += losses[b];
        add_into(total, grads[b]);
      }
      for (double& g : total) g /= static_cast<double>(count);
      opt.step(params.values(), total);
      if (!params.finite()) {
        throw TrainingError("parameters diverged at epoch " + std::to_string(epoch) +
                            "; lower the learning rate");
      }
    }
    MetricsEntry entry;
    entry.step = epoch;
    entry.loss = epoch_loss / static_cast<double>(train.size());
    const double val = validation_score(validation, params, config, abstractor, &ref_abs);
    double set_size = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      set_size += static_cast<double>(greedy_select(score(features[i], params)).indices.size());
    }
    entry.mean_set_size = set_size / static_cast<double>(train.size());
    result.log.push_back(entry);
    if (validation.empty() || val > result.best_validation) {
      result.best_validation = val;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  return result;
}

namespace {

struct CascWork {
  StepLog log;
  std::vector<double> grad;
};

CascWork casc_compute(const Example& example, const ScorerParams& params,
                      const TrainConfig& config, Abstractor& abstractor, Rng& rng,
                      const Tokens* reference) {
  CascWork work;
  const FeatureMatrix f = encode(example.cluster, example.plan, reference);
  const SentenceLogits z = score(f, params);
  try {
    work.log.rollout = rollout(
        z,
        [&](const IndexSet& s) { return reward(example.cluster, s, example.gold, abstractor, config.reward); },
        config.credit_mode, rng);
  } catch (const ExternalError& e) {
    if (config.abort_on_abstractor_error) throw;
    warn("CASC skipped '" + example.cluster.id + "': " + e.what());
    work.log.skipped = true;
    return work;
  }
  work.log.loss = casc_loss(z, work.log.rollout);
  work.grad = score_backward(f, params, casc_logit_grad(z, work.log.rollout));
  return work;
}

}  // namespace

StepLog casc_step(const Example& example, ScorerParams& params, const TrainConfig& config,
                  Abstractor& abstractor, Rng& rng, Optimizer& optimizer, const Tokens* reference) {
  CascWork work = casc_compute(example, params, config, abstractor, rng, reference);
  if (!work.log.skipped && work.log.rollout.advantage != 0.0) optimizer.step(params.values(), work.grad);
  return work.log;
}

TrainResult train_casc(const std::vector<Example>& train, const std::vector<Example>& validation,
                       const ScorerParams& initial, const TrainConfig& config,
                       Abstractor& abstractor, Abstractor* reference_abstractor) {
  Abstractor& ref_abs = reference_abstractor ? *reference_abstractor : abstractor;
  TrainResult result;
  ScorerParams params = initial;
  result.params = params;
  if (config.epochs == 0 || train.empty()) return result;
  result.best_validation = validation_score(validation, params, config, abstractor, &ref_abs);

  Optimizer opt(config.optimizer, config.learning_rate);
  const std::size_t batch = std::max<std::size_t>(config.batch, 1);
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<Tokens> refs;
    if (config.sr_enabled) refs = current_references(train, params, config, ref_abs, true);
    const auto order = shuffled_order(train.size(), config.seed ^ 0x5eed, epoch);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      std::vector<CascWork> work(count);
      parallel_for(count, [&](std::size_t b) {
        const std::size_t idx = order[start + b];
        Rng rng(derive_seed(config.seed, train[idx].cluster.id, epoch));
        work[b] = casc_compute(train[idx], params, config, abstractor, rng,
                               config.sr_enabled ? &refs[idx] : nullptr);
      });
      MetricsEntry entry;
      entry.step = ++step;
      std::vector<double> total(params.size(), 0.0);
      std::size_t used = 0;
      double rs = 0.0, rg = 0.0, adv = 0.0, size = 0.0;
      for (const auto& w : work) {
        if (w.log.skipped) continue;
        ++used;
        entry.loss += w.log.loss;
        rs += w.log.rollout.reward_sample;
        rg += w.log.rollout.reward_greedy;
        adv += w.log.rollout.advantage;
        size += static_cast<double>(w.log.rollout.sampled.size());
        add_into(total, w.grad);
      }
      if (used == 0) continue;
      const double n = static_cast<double>(used);
      entry.loss /= n;
      entry.mean_reward_sample = rs / n;
      entry.mean_reward_greedy = rg / n;
      entry.mean_advantage = adv / n;
      entry.mean_set_size = size / n;
      result.log.push_back(entry);
      if (!std::isfinite(entry.loss)) throw TrainingError("non-finite CASC loss at step " + std::to_string(step));
      for (double& g : total) g /= n;
      opt.step(params.values(), total);
      if (!params.finite()) throw TrainingError("parameters diverged at CASC step " + std::to_string(step));
    }
    const double val = validation_score(validation, params, config, abstractor, &ref_abs);
    if (validation.empty() || val > result.best_validation) {
      result.best_validation = val;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  return result;
}

SyntheticBandit make_synthetic_bandit(std::size_t instances, std::size_t arms, std::size_t dim,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> hidden(dim);
  double norm = 0.0;
  for (double& h : hidden) {
    h = rng.normal();
    norm += h * h;
  }
  norm = std::sqrt(norm);
  SyntheticBandit bandit;
  for (std::size_t k = 0; k < instances; ++k) {
    FeatureMatrix f;
    f.rows = arms;
    f.dim = dim;
    f.values.resize(arms * dim);
    f.chunk.assign(arms, 0);
    IndexSet target;
    std::size_t best = 0;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < arms; ++i) {
      double proj = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        f.at(i, d) = rng.normal();
        proj += hidden[d] * f.at(i, d);
      }
      // threshold at ~0.43 sd keeps about a third of the arms in the target
      if (proj > 0.43 * norm) target.push_back(i);
      if (proj > best_margin) {
        best_margin = proj;
        best = i;
      }
    }
    if (target.empty()) target.push_back(best);
    bandit.instances.push_back(std::move(f));
    bandit.targets.push_back(std::move(target));
  }
  return bandit;
}

double jaccard(const IndexSet& a, const IndexSet& b) {
  const std::size_t inter = set_intersection(a, b).size();
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double mean_greedy_reward(const SyntheticBandit& bandit, const ScorerParams& params) {
  double total = 0.0;
  for (std::size_t k = 0; k < bandit.instances.size(); ++k) {
    total += jaccard(greedy_select(score(bandit.instances[k], params)).indices, bandit.targets[k]);
  }
  return bandit.instances.empty() ? 0.0 : total / static_cast<double>(bandit.instances.size());
}

ScorerParams synthetic_initial_params(std::size_t dim, std::size_t window, std::uint64_t seed) {
  ScorerParams p = ScorerParams::initial(dim, window);
  Rng rng(seed);
  for (std::size_t h = 0; h < dim; ++h) {
    p.values()[p.head_weight(0, h)] = 0.5 * rng.normal();
    p.values()[p.head_weight(1, h)] = 0.5 * rng.normal();
  }
  return p;
}

ScorerParams train_synthetic_bandit(const SyntheticBandit& bandit, ScorerParams params,
                                    CreditMode mode, std::size_t steps, double learning_rate,
                                    std::uint64_t seed) {
  Optimizer opt(OptimizerKind::Sgd, learning_rate);
  Rng rng(seed);
  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t k = step % bandit.instances.size();
    const auto& f = bandit.instances[k];
    const auto& target = bandit.targets[k];
    const SentenceLogits z = score(f, params);
    const PolicyRollout r =
        rollout(z, [&](const IndexSet& s) { return jaccard(s, target); }, mode, rng);
    if (r.advantage == 0.0) continue;
    opt.step(params.values(), score_backward(f, params, casc_logit_grad(z, r)));
  }
  return params;
}

}  // namespace reflect
