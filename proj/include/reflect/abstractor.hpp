#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "reflect/corpus.hpp"
#include "reflect/extractor.hpp"
#include "reflect/rouge.hpp"

namespace reflect {

enum class AbstractorKind { ConcatTruncate, CentralityCompress, External };

// What the external child receives in "sentences": the raw sentence text or
// the sentence tokens joined by single spaces.
enum class PayloadMode { Tokens, Raw };

AbstractorKind parse_abstractor_kind(const std::string& name);

struct AbstractorSpec {
  AbstractorKind kind = AbstractorKind::ConcatTruncate;
  std::size_t budget = 256;
  std::string external_command;
  double timeout_s = 60.0;
  bool fallback_to_concat = false;
  PayloadMode payload = PayloadMode::Tokens;
  TokenizerConfig tokenizer;
};

inline constexpr const char* kProtocolHandshake = R"({"protocol":"reflect-abs/1"})";

class Abstractor {
 public:
  explicit Abstractor(AbstractorSpec spec) : spec_(std::move(spec)) {}
  virtual ~Abstractor() = default;
  Abstractor(const Abstractor&) = delete;
  Abstractor& operator=(const Abstractor&) = delete;

  // `selected` must be non-empty; callers apply the empty-selection fallback.
  virtual Tokens summarize(const DocumentCluster& cluster, const IndexSet& selected) = 0;

  const AbstractorSpec& spec() const { return spec_; }

 protected:
  AbstractorSpec spec_;
};

std::unique_ptr<Abstractor> make_abstractor(const AbstractorSpec& spec);

// Built-in kinds as free functions; both are pure.
Tokens concat_truncate(const DocumentCluster& cluster, const IndexSet& selected,
                       std::size_t budget);
// Mean ROUGE-1 F1 of each selected sentence against the other selected ones.
std::vector<double> selection_centrality(const DocumentCluster& cluster, const IndexSet& selected);
Tokens centrality_compress(const DocumentCluster& cluster, const IndexSet& selected,
                           std::size_t budget);

class ChildProcess;

// Speaks the JSONL stdio protocol with one long-lived child. Requests on one
// instance are serialized.
class ExternalAbstractor final : public Abstractor {
 public:
  explicit ExternalAbstractor(AbstractorSpec spec);
  ~ExternalAbstractor() override;

  Tokens summarize(const DocumentCluster& cluster, const IndexSet& selected) override;

  // One request/response exchange; returns the summary text.
  std::string request(const std::string& id, const std::vector<std::string>& sentences,
                      std::size_t budget);

 private:
  void ensure_started();

  std::mutex mutex_;
  std::unique_ptr<ChildProcess> child_;
  std::size_t counter_ = 0;
};

// Throws UsageError on an empty selection.
Tokens abstract(const DocumentCluster& cluster, const IndexSet& selected, Abstractor& abstractor);

enum class ReferenceSource { Abstractor, GroundTruth, ExternalModel };

struct ReferenceSummary {
  Tokens tokens;
  ReferenceSource source = ReferenceSource::Abstractor;
};

struct ReferencePolicy {
  enum class Kind { LeadK, All, Extractor, GroundTruth };
  Kind kind = Kind::All;
  std::size_t lead_k = 1;
  // Extractor kind: the scorer, its chunk budget, and the reference it was
  // conditioned on (null when it was trained without references).
  const ScorerParams* params = nullptr;
  std::size_t chunk_budget = 512;
  const Tokens* conditioning = nullptr;
};

ReferenceSummary make_reference(const DocumentCluster& cluster, const ReferencePolicy& policy,
                                Abstractor& abstractor);

struct GoldSummary {
  Tokens tokens;
  std::vector<Tokens> sentences;
};

GoldSummary make_gold(const DocumentCluster& cluster, const TokenizerConfig& tokenizer);

struct RewardConfig {
  RougeVariant variant = RougeVariant::lcs();
  RougeStat stat = RougeStat::F1;
  bool stemming = false;
};

double score_summary(const Tokens& hypothesis, const GoldSummary& gold, const RewardConfig& config);

// R(S): ROUGE of abstract(S) against the gold summary.
double reward(const DocumentCluster& cluster, const IndexSet& selected, const GoldSummary& gold,
              Abstractor& abstractor, const RewardConfig& config);

}  // namespace reflect
