#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "reflect/corpus.hpp"
#include "reflect/rouge.hpp"

namespace reflect {

enum class OracleMetric { AvgR1R2Recall, AvgR1R2F1, RLRecall };

OracleMetric parse_oracle_metric(const std::string& name);
std::string to_string(OracleMetric metric);

struct OracleCriterion {
  OracleMetric metric = OracleMetric::AvgR1R2Recall;
  std::size_t min_select = 30;
  std::size_t max_select = std::numeric_limits<std::size_t>::max();
  bool stop_on_no_gain = true;
};

enum class ShiftMode { Additive, Multiplicative };

struct PorConfig {
  double gamma = 10.0;
  RougeStat rouge_stat = RougeStat::F1;
  ShiftMode shift = ShiftMode::Additive;
};

struct SupervisionRecord {
  std::string id;
  IndexSet oracle;
  std::vector<double> weights;
  double gamma = 0.0;

  bool operator==(const SupervisionRecord&) const = default;
};

// Criterion score of a candidate token stream against the summary.
double oracle_score(OracleMetric metric, const std::vector<int>& candidate,
                    const std::vector<int>& summary);

// Greedy pseudo oracle. Each step scores every unselected sentence joined
// (in document order) with the current selection and takes the argmax,
// smallest index on ties. Selection continues past the no-gain point until
// `min_select` sentences are chosen.
IndexSet build_pseudo_oracle(const DocumentCluster& cluster, const OracleCriterion& criterion,
                             const TokenizerConfig& tokenizer = {});

// wᵢ = 1 on the oracle; off the oracle (1 − ROUGE-1(xᵢ, y))^γ shifted so the
// largest non-oracle weight is exactly 1, then clamped to [0, 1].
std::vector<double> por_weights(const DocumentCluster& cluster, const IndexSet& oracle,
                                const PorConfig& config, const TokenizerConfig& tokenizer = {});

// Same transform applied to precomputed per-sentence ROUGE-1 values.
std::vector<double> por_weights_from_scores(const std::vector<double>& rouge1,
                                            const IndexSet& oracle, const PorConfig& config);

SupervisionRecord supervise(const DocumentCluster& cluster, const OracleCriterion& criterion,
                            const PorConfig& por, const TokenizerConfig& tokenizer = {});

// Batch kernels over clusters. The parallel version distributes clusters over
// OpenMP threads; the serial one is kept as its reference.
std::vector<SupervisionRecord> supervise_all(const std::vector<DocumentCluster>& clusters,
                                             const OracleCriterion& criterion,
                                             const PorConfig& por,
                                             const TokenizerConfig& tokenizer = {});
std::vector<SupervisionRecord> supervise_all_serial(const std::vector<DocumentCluster>& clusters,
                                                    const OracleCriterion& criterion,
                                                    const PorConfig& por,
                                                    const TokenizerConfig& tokenizer = {});

std::string serialize_supervision(const SupervisionRecord& record);
SupervisionRecord parse_supervision_line(const std::string& line, std::size_t line_number);
std::vector<SupervisionRecord> load_supervision(const std::string& path);
void write_supervision(std::ostream& out, const std::vector<SupervisionRecord>& records);

}  // namespace reflect
