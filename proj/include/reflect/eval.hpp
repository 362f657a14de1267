#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "reflect/abstractor.hpp"
#include "reflect/config.hpp"
#include "reflect/learning.hpp"

namespace reflect {

struct ExtractionEval {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ExtractionEval extraction_prf(const IndexSet& predicted, const IndexSet& oracle);

struct AbstractionScores {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double rougeLsum = 0.0;

  // Mean of R-1, R-2, R-L.
  double average3() const { return (rouge1 + rouge2 + rougeL) / 3.0; }
  // Mean of all four, R-LSum included.
  double average4() const { return (rouge1 + rouge2 + rougeL + rougeLsum) / 4.0; }
};

AbstractionScores score_all(const Tokens& hypothesis, const GoldSummary& gold, bool stemming);

enum class ReferenceMode { None, Bootstrap, Refined, GroundTruth };
ReferenceMode parse_reference_mode(const std::string& name);

struct ReportRow {
  std::string label;
  bool sr = false;
  bool por = false;
  std::string stage = "MLE";  // MLE, SC or CASC
  std::optional<ExtractionEval> extraction;
  AbstractionScores abstraction;
  std::size_t clusters = 0;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;

  std::string to_csv() const;
  std::string to_markdown() const;
};

struct EvalConfig {
  ReferenceMode reference = ReferenceMode::None;
  ReferencePolicy::Kind bootstrap = ReferencePolicy::Kind::All;
  std::size_t lead_k = 1;
  bool stemming = false;
};

// Per-cluster output of the extract-then-abstract pipeline.
struct Generation {
  std::string id;
  IndexSet selected;
  Tokens summary;
};

std::string serialize_generation(const Generation& generation);
Generation parse_generation_line(const std::string& line, std::size_t line_number);
std::vector<Generation> load_generations(const std::string& path);

// Greedy extraction followed by abstraction. Clusters whose abstraction
// fails are skipped with a warning (nullopt in their slot).
std::vector<std::optional<Generation>> generate_all(const std::vector<Example>& examples,
                                                    const Checkpoint& checkpoint,
                                                    Abstractor& abstractor,
                                                    const EvalConfig& config,
                                                    Abstractor* reference_abstractor = nullptr);
std::vector<std::optional<Generation>> generate_all_serial(
    const std::vector<Example>& examples, const Checkpoint& checkpoint, Abstractor& abstractor,
    const EvalConfig& config, Abstractor* reference_abstractor = nullptr);

// Scores generations against gold summaries (and oracles, when the examples
// carry them). Mean over clusters; throws DataError("no examples") when
// nothing is scored.
ReportRow score_generations(const std::vector<Example>& examples,
                            const std::vector<std::optional<Generation>>& generations,
                            bool stemming);

// A checkpoint trained with summary references defaults to the Refined
// reference mode; one trained without them always runs with None.
ReportRow evaluate(const std::vector<Example>& examples, const Checkpoint& checkpoint,
                   Abstractor& abstractor, const EvalConfig& config,
                   Abstractor* reference_abstractor = nullptr);

struct AblationSettings {
  std::string corpus;
  std::size_t train_size = 160;
  std::size_t validation_size = 20;  // the remainder is the test split
  TokenizerConfig tokenizer;
  OracleCriterion oracle;
  PorConfig por;
  TrainConfig mle;
  TrainConfig casc;
  AbstractorSpec train_abstractor;
  AbstractorSpec test_abstractor;
  EvalConfig eval;
  bool mle_only = false;
};

AblationSettings ablation_settings(const Config& config);

// {POR off/on} x {SR off/on} x {MLE, +SC(all), +CASC(distinct)}.
ExperimentReport run_ablation(const AblationSettings& settings);
ExperimentReport run_ablation(const AblationSettings& settings,
                              const std::vector<DocumentCluster>& corpus);

}  // namespace reflect
