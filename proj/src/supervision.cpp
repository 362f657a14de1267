#include "reflect/supervision.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <unordered_map>

#include "reflect/parallel.hpp"

namespace reflect {

OracleMetric parse_oracle_metric(const std::string& name) {
  if (name == "avg-r1r2-recall") return OracleMetric::AvgR1R2Recall;
  if (name == "avg-r1r2-f1") return OracleMetric::AvgR1R2F1;
  if (name == "rl-recall") return OracleMetric::RLRecall;
  throw UsageError("unknown oracle metric '" + name + "'");
}

std::string to_string(OracleMetric metric) {
  switch (metric) {
    case OracleMetric::AvgR1R2Recall: return "avg-r1r2-recall";
    case OracleMetric::AvgR1R2F1: return "avg-r1r2-f1";
    case OracleMetric::RLRecall: return "rl-recall";
  }
  return "avg-r1r2-recall";
}

double oracle_score(OracleMetric metric, const std::vector<int>& candidate,
                    const std::vector<int>& summary) {
  switch (metric) {
    case OracleMetric::AvgR1R2Recall:
      return (rouge_n(candidate, summary, 1).recall + rouge_n(candidate, summary, 2).recall) / 2.0;
    case OracleMetric::AvgR1R2F1:
      return (rouge_n(candidate, summary, 1).f1 + rouge_n(candidate, summary, 2).f1) / 2.0;
    case OracleMetric::RLRecall:
      return rouge_l(candidate, summary).recall;
  }
  return 0.0;
}

namespace {

struct Interned {
  std::vector<std::vector<int>> sentences;
  std::vector<int> summary;
};

Interned intern(const DocumentCluster& cluster, const Tokens& summary) {
  std::unordered_map<std::string, int> vocab;
  auto id_of = [&](const std::string& t) {
    auto [it, inserted] = vocab.emplace(t, static_cast<int>(vocab.size()));
    return it->second;
  };
  Interned out;
  for (const auto& t : summary) out.summary.push_back(id_of(t));
  for (const auto& s : cluster.sentences) {
    std::vector<int> ids;
    ids.reserve(s.tokens.size());
    for (const auto& t : s.tokens) ids.push_back(id_of(t));
    out.sentences.push_back(std::move(ids));
  }
  return out;
}

}  // namespace

IndexSet build_pseudo_oracle(const DocumentCluster& cluster, const OracleCriterion& criterion,
                             const TokenizerConfig& tokenizer) {
  const Tokens summary = summary_tokens(cluster, tokenizer);
  if (summary.empty()) throw DataError("cluster '" + cluster.id + "' has an empty summary");
  const Interned data = intern(cluster, summary);
  const std::size_t n = cluster.size();

  IndexSet selected;
  std::vector<bool> taken(n, false);
  double current = 0.0;
  std::vector<int> candidate;
  while (selected.size() < criterion.max_select && selected.size() < n) {
    double best = -1.0;
    std::size_t best_index = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      candidate.clear();
      // selected is sorted; splice i in at its document position
      bool placed = false;
      for (std::size_t s : selected) {
        if (!placed && i < s) {
          candidate.insert(candidate.end(), data.sentences[i].begin(), data.sentences[i].end());
          placed = true;
        }
        candidate.insert(candidate.end(), data.sentences[s].begin(), data.sentences[s].end());
      }
      if (!placed) {
        candidate.insert(candidate.end(), data.sentences[i].begin(), data.sentences[i].end());
      }
      const double value = oracle_score(criterion.metric, candidate, data.summary);
      if (value > best) {
        best = value;
        best_index = i;
      }
    }
    const bool gain = best > current;
    if (!gain && criterion.stop_on_no_gain && selected.size() >= criterion.min_select) break;
    taken[best_index] = true;
    selected.insert(std::upper_bound(selected.begin(), selected.end(), best_index), best_index);
    current = best;
  }
  return selected;
}

std::vector<double> por_weights_from_scores(const std::vector<double>& rouge1,
                                            const IndexSet& oracle, const PorConfig& config) {
  const std::size_t n = rouge1.size();
  std::vector<double> weights(n, 1.0);
  std::vector<double> raw(n, 1.0);
  double max_raw = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (contains(oracle, i)) continue;
    raw[i] = std::pow(1.0 - rouge1[i], config.gamma);
    max_raw = std::max(max_raw, raw[i]);
  }
  if (max_raw < 0.0) return weights;  // every sentence is in the oracle
  for (std::size_t i = 0; i < n; ++i) {
    if (contains(oracle, i)) continue;
    double w = 1.0;
    if (config.shift == ShiftMode::Additive) {
      w = raw[i] + (1.0 - max_raw);
    } else if (max_raw > 0.0) {
      w = raw[i] / max_raw;
    }
    weights[i] = std::clamp(w, 0.0, 1.0);
  }
  return weights;
}

std::vector<double> por_weights(const DocumentCluster& cluster, const IndexSet& oracle,
                                const PorConfig& config, const TokenizerConfig& tokenizer) {
  const Tokens summary = summary_tokens(cluster, tokenizer);
  std::vector<double> scores;
  scores.reserve(cluster.size());
  for (const auto& s : cluster.sentences) {
    scores.push_back(pick(rouge_n(s.tokens, summary, 1), config.rouge_stat));
  }
  return por_weights_from_scores(scores, oracle, config);
}

SupervisionRecord supervise(const DocumentCluster& cluster, const OracleCriterion& criterion,
                            const PorConfig& por, const TokenizerConfig& tokenizer) {
  SupervisionRecord record;
  record.id = cluster.id;
  record.oracle = build_pseudo_oracle(cluster, criterion, tokenizer);
  record.weights = por_weights(cluster, record.oracle, por, tokenizer);
  record.gamma = por.gamma;
  return record;
}

std::vector<SupervisionRecord> supervise_all(const std::vector<DocumentCluster>& clusters,
                                             const OracleCriterion& criterion,
                                             const PorConfig& por,
                                             const TokenizerConfig& tokenizer) {
  std::vector<SupervisionRecord> out(clusters.size());
  parallel_for(clusters.size(), [&](std::size_t i) {
    out[i] = supervise(clusters[i], criterion, por, tokenizer);
  });
  return out;
}

std::vector<SupervisionRecord> supervise_all_serial(const std::vector<DocumentCluster>& clusters,
                                                    const OracleCriterion& criterion,
                                                    const PorConfig& por,
                                                    const TokenizerConfig& tokenizer) {
  std::vector<SupervisionRecord> out(clusters.size());
  serial_for(clusters.size(), [&](std::size_t i) {
    out[i] = supervise(clusters[i], criterion, por, tokenizer);
  });
  return out;
}

std::string serialize_supervision(const SupervisionRecord& record) {
  nlohmann::ordered_json j;
  j["id"] = record.id;
  j["oracle"] = record.oracle;
  j["weights"] = record.weights;
  j["gamma"] = record.gamma;
  return j.dump();
}

SupervisionRecord parse_supervision_line(const std::string& line, std::size_t line_number) {
  auto fail = [&](const std::string& what) {
    return DataError("line " + std::to_string(line_number) + ": " + what);
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw fail(std::string("malformed JSON: ") + e.what());
  }
  try {
    SupervisionRecord r;
    r.id = j.at("id").get<std::string>();
    r.oracle = make_index_set(j.at("oracle").get<std::vector<std::size_t>>());
    r.weights = j.at("weights").get<std::vector<double>>();
    r.gamma = j.at("gamma").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("bad supervision record: ") + e.what());
  }
}

std::vector<SupervisionRecord> load_supervision(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<SupervisionRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_supervision_line(line, number));
  }
  return out;
}

void write_supervision(std::ostream& out, const std::vector<SupervisionRecord>& records) {
  for (const auto& r : records) out << serialize_supervision(r) << '\n';
}

}  // namespace reflect
