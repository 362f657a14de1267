#include "reflect/abstractor.hpp"

#include <algorithm>
#include <numeric>

namespace reflect {

AbstractorKind parse_abstractor_kind(const std::string& name) {
  if (name == "concat" || name == "concat-truncate") return AbstractorKind::ConcatTruncate;
  if (name == "centrality" || name == "centrality-compress") return AbstractorKind::CentralityCompress;
  if (name == "external") return AbstractorKind::External;
  throw UsageError("unknown abstractor '" + name + "'");
}

Tokens concat_truncate(const DocumentCluster& cluster, const IndexSet& selected,
                       std::size_t budget) {
  Tokens out;
  for (std::size_t i : selected) {
    for (const auto& t : cluster.sentences.at(i).tokens) {
      if (out.size() >= budget) return out;
      out.push_back(t);
    }
  }
  return out;
}

std::vector<double> selection_centrality(const DocumentCluster& cluster, const IndexSet& selected) {
  std::vector<double> out(selected.size(), 0.0);
  if (selected.size() < 2) return out;
  for (std::size_t a = 0; a < selected.size(); ++a) {
    double total = 0.0;
    for (std::size_t b = 0; b < selected.size(); ++b) {
      if (a == b) continue;
      total += rouge_n(cluster.sentences[selected[a]].tokens, cluster.sentences[selected[b]].tokens, 1).f1;
    }
    out[a] = total / static_cast<double>(selected.size() - 1);
  }
  return out;
}

Tokens centrality_compress(const DocumentCluster& cluster, const IndexSet& selected,
                           std::size_t budget) {
  if (selected.empty()) return {};
  const auto centrality = selection_centrality(cluster, selected);
  std::vector<std::size_t> order(selected.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return centrality[a] > centrality[b]; });
  IndexSet kept;
  std::size_t used = 0;
  for (std::size_t k : order) {
    const std::size_t len = cluster.sentences[selected[k]].tokens.size();
    if (used + len > budget) break;
    kept.push_back(selected[k]);
    used += len;
  }
  if (kept.empty()) kept.push_back(selected[order.front()]);
  std::sort(kept.begin(), kept.end());
  return concat_truncate(cluster, kept, budget);
}

namespace {

class ConcatTruncateAbstractor final : public Abstractor {
 public:
  using Abstractor::Abstractor;
  Tokens summarize(const DocumentCluster& cluster, const IndexSet& selected) override {
    return concat_truncate(cluster, selected, spec_.budget);
  }
};

class CentralityAbstractor final : public Abstractor {
 public:
  using Abstractor::Abstractor;
  Tokens summarize(const DocumentCluster& cluster, const IndexSet& selected) override {
    return centrality_compress(cluster, selected, spec_.budget);
  }
};

}  // namespace

std::unique_ptr<Abstractor> make_abstractor(const AbstractorSpec& spec) {
  if (spec.budget == 0) throw UsageError("abstractor budget must be at least 1");
  switch (spec.kind) {
    case AbstractorKind::ConcatTruncate: return std::make_unique<ConcatTruncateAbstractor>(spec);
    case AbstractorKind::CentralityCompress: return std::make_unique<CentralityAbstractor>(spec);
    case AbstractorKind::External:
      if (spec.external_command.empty()) throw UsageError("external abstractor needs a command");
      return std::make_unique<ExternalAbstractor>(spec);
  }
  throw UsageError("unknown abstractor kind");
}

Tokens abstract(const DocumentCluster& cluster, const IndexSet& selected, Abstractor& abstractor) {
  if (selected.empty()) throw UsageError("abstract() needs a non-empty selection");
  return abstractor.summarize(cluster, selected);
}

ReferenceSummary make_reference(const DocumentCluster& cluster, const ReferencePolicy& policy,
                                Abstractor& abstractor) {
  ReferenceSummary ref;
  ref.source = abstractor.spec().kind == AbstractorKind::External ? ReferenceSource::ExternalModel
                                                                  : ReferenceSource::Abstractor;
  IndexSet selection;
  switch (policy.kind) {
    case ReferencePolicy::Kind::GroundTruth:
      ref.tokens = summary_tokens(cluster, abstractor.spec().tokenizer);
      ref.source = ReferenceSource::GroundTruth;
      return ref;
    case ReferencePolicy::Kind::LeadK:
      selection = all_indices(std::min(std::max<std::size_t>(policy.lead_k, 1), cluster.size()));
      break;
    case ReferencePolicy::Kind::All:
      selection = all_indices(cluster.size());
      break;
    case ReferencePolicy::Kind::Extractor: {
      if (policy.params == nullptr) throw UsageError("extractor reference policy needs parameters");
      const ChunkPlan plan = make_chunk_plan(cluster, policy.chunk_budget);
      const FeatureMatrix features = encode(cluster, plan, policy.conditioning);
      selection = greedy_select(score(features, *policy.params)).indices;
      break;
    }
  }
  if (selection.empty()) return ref;
  ref.tokens = abstract(cluster, selection, abstractor);
  return ref;
}

GoldSummary make_gold(const DocumentCluster& cluster, const TokenizerConfig& tokenizer) {
  return {summary_tokens(cluster, tokenizer), summary_sentences(cluster, tokenizer)};
}

double score_summary(const Tokens& hypothesis, const GoldSummary& gold, const RewardConfig& config) {
  const Tokens hyp = config.stemming ? stem_tokens(hypothesis) : hypothesis;
  if (config.variant.kind != RougeKind::LSum) {
    const Tokens ref = config.stemming ? stem_tokens(gold.tokens) : gold.tokens;
    const RougeScore s = config.variant.kind == RougeKind::N ? rouge_n(hyp, ref, config.variant.n)
                                                             : rouge_l(hyp, ref);
    return pick(s, config.stat);
  }
  std::vector<Tokens> ref_sents = gold.sentences;
  if (config.stemming) {
    for (auto& s : ref_sents) s = stem_tokens(s);
  }
  return pick(rouge_lsum(split_token_sentences(hyp), ref_sents), config.stat);
}

double reward(const DocumentCluster& cluster, const IndexSet& selected, const GoldSummary& gold,
              Abstractor& abstractor, const RewardConfig& config) {
  return score_summary(abstract(cluster, selected, abstractor), gold, config);
}

}  // namespace reflect
