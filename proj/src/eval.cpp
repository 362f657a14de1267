#include "reflect/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "reflect/parallel.hpp"

namespace reflect {

ExtractionEval extraction_prf(const IndexSet& predicted, const IndexSet& oracle) {
  const std::size_t hits = set_intersection(predicted, oracle).size();
  ExtractionEval e;
  e.precision = predicted.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(predicted.size());
  e.recall = oracle.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(oracle.size());
  e.f1 = f1_of(e.precision, e.recall);
  return e;
}

AbstractionScores score_all(const Tokens& hypothesis, const GoldSummary& gold, bool stemming) {
  const Tokens hyp = stemming ? stem_tokens(hypothesis) : hypothesis;
  const Tokens ref = stemming ? stem_tokens(gold.tokens) : gold.tokens;
  std::vector<Tokens> ref_sents = gold.sentences;
  if (stemming) {
    for (auto& s : ref_sents) s = stem_tokens(s);
  }
  AbstractionScores s;
  s.rouge1 = rouge_n(hyp, ref, 1).f1;
  s.rouge2 = rouge_n(hyp, ref, 2).f1;
  s.rougeL = rouge_l(hyp, ref).f1;
  s.rougeLsum = rouge_lsum(split_token_sentences(hyp), ref_sents).f1;
  return s;
}

ReferenceMode parse_reference_mode(const std::string& name) {
  if (name == "none") return ReferenceMode::None;
  if (name == "bootstrap") return ReferenceMode::Bootstrap;
  if (name == "refined") return ReferenceMode::Refined;
  if (name == "ground-truth") return ReferenceMode::GroundTruth;
  throw UsageError("unknown reference mode '" + name + "'");
}

std::string serialize_generation(const Generation& generation) {
  nlohmann::ordered_json j;
  j["id"] = generation.id;
  j["selected"] = generation.selected;
  j["summary"] = join_tokens(generation.summary);
  return j.dump();
}

Generation parse_generation_line(const std::string& line, std::size_t line_number) {
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
    Generation g;
    g.id = j.at("id").get<std::string>();
    g.summary = tokenize(j.at("summary").get<std::string>());
    if (j.contains("selected")) g.selected = make_index_set(j["selected"].get<std::vector<std::size_t>>());
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("bad generation record: ") + e.what());
  }
}

std::vector<Generation> load_generations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Generation> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_generation_line(line, number));
  }
  return out;
}

namespace {

ReferenceMode effective_mode(const Checkpoint& checkpoint, ReferenceMode requested) {
  if (!checkpoint.summary_reference) return ReferenceMode::None;
  return requested == ReferenceMode::None ? ReferenceMode::Refined : requested;
}

std::optional<Generation> generate_one(const Example& ex, const Checkpoint& checkpoint,
                                       Abstractor& abstractor, const EvalConfig& config,
                                       Abstractor& ref_abs) {
  try {
    std::optional<Tokens> reference;
    const ReferenceMode mode = effective_mode(checkpoint, config.reference);
    if (mode == ReferenceMode::GroundTruth) {
      reference = ex.gold.tokens;
    } else if (mode != ReferenceMode::None) {
      ReferencePolicy boot;
      boot.kind = config.bootstrap;
      boot.lead_k = config.lead_k;
      reference = make_reference(ex.cluster, boot, ref_abs).tokens;
      if (mode == ReferenceMode::Refined) {
        ReferencePolicy refine;
        refine.kind = ReferencePolicy::Kind::Extractor;
        refine.params = &checkpoint.params;
        refine.chunk_budget = ex.plan.budget;
        refine.conditioning = &*reference;
        reference = make_reference(ex.cluster, refine, ref_abs).tokens;
      }
    }
    const FeatureMatrix f = encode(ex.cluster, ex.plan, reference ? &*reference : nullptr);
    Generation g;
    g.id = ex.cluster.id;
    g.selected = greedy_select(score(f, checkpoint.params)).indices;
    g.summary = abstract(ex.cluster, g.selected, abstractor);
    return g;
  } catch (const ExternalError& e) {
    warn("generation skipped '" + ex.cluster.id + "': " + e.what());
    return std::nullopt;
  }
}

double sorted_mean(std::vector<double> values) {
  // summing in sorted order makes the mean independent of dataset order
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return values.empty() ? 0.0 : total / static_cast<double>(values.size());
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::vector<std::optional<Generation>> generate_all(const std::vector<Example>& examples,
                                                    const Checkpoint& checkpoint,
                                                    Abstractor& abstractor,
                                                    const EvalConfig& config,
                                                    Abstractor* reference_abstractor) {
  Abstractor& ref_abs = reference_abstractor ? *reference_abstractor : abstractor;
  std::vector<std::optional<Generation>> out(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) {
    out[i] = generate_one(examples[i], checkpoint, abstractor, config, ref_abs);
  });
  return out;
}

std::vector<std::optional<Generation>> generate_all_serial(
    const std::vector<Example>& examples, const Checkpoint& checkpoint, Abstractor& abstractor,
    const EvalConfig& config, Abstractor* reference_abstractor) {
  Abstractor& ref_abs = reference_abstractor ? *reference_abstractor : abstractor;
  std::vector<std::optional<Generation>> out(examples.size());
  serial_for(examples.size(), [&](std::size_t i) {
    out[i] = generate_one(examples[i], checkpoint, abstractor, config, ref_abs);
  });
  return out;
}

ReportRow score_generations(const std::vector<Example>& examples,
                            const std::vector<std::optional<Generation>>& generations,
                            bool stemming) {
  std::vector<double> r1, r2, rl, rlsum, ep, er, ef;
  for (std::size_t i = 0; i < examples.size() && i < generations.size(); ++i) {
    if (!generations[i]) continue;
    const auto s = score_all(generations[i]->summary, examples[i].gold, stemming);
    r1.push_back(s.rouge1);
    r2.push_back(s.rouge2);
    rl.push_back(s.rougeL);
    rlsum.push_back(s.rougeLsum);
    if (!examples[i].supervision.oracle.empty()) {
      const auto e = extraction_prf(generations[i]->selected, examples[i].supervision.oracle);
      ep.push_back(e.precision);
      er.push_back(e.recall);
      ef.push_back(e.f1);
    }
  }
  if (r1.empty()) throw DataError("no examples");
  ReportRow row;
  row.clusters = r1.size();
  row.abstraction = {sorted_mean(r1), sorted_mean(r2), sorted_mean(rl), sorted_mean(rlsum)};
  if (!ep.empty()) row.extraction = ExtractionEval{sorted_mean(ep), sorted_mean(er), sorted_mean(ef)};
  return row;
}

ReportRow evaluate(const std::vector<Example>& examples, const Checkpoint& checkpoint,
                   Abstractor& abstractor, const EvalConfig& config,
                   Abstractor* reference_abstractor) {
  if (examples.empty()) throw DataError("no examples");
  return score_generations(
      examples, generate_all(examples, checkpoint, abstractor, config, reference_abstractor),
      config.stemming);
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << "label,stage,sr,por,ext_precision,ext_recall,ext_f1,rouge1,rouge2,rougeL,rougeLsum,"
         "average_r1_r2_rl,average_r1_r2_rl_rlsum,clusters\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.stage << ',' << (r.sr ? 1 : 0) << ',' << (r.por ? 1 : 0) << ',';
    if (r.extraction) {
      out << fixed4(r.extraction->precision) << ',' << fixed4(r.extraction->recall) << ','
          << fixed4(r.extraction->f1) << ',';
    } else {
      out << ",,,";
    }
    out << fixed4(r.abstraction.rouge1) << ',' << fixed4(r.abstraction.rouge2) << ','
        << fixed4(r.abstraction.rougeL) << ',' << fixed4(r.abstraction.rougeLsum) << ','
        << fixed4(r.abstraction.average3()) << ',' << fixed4(r.abstraction.average4()) << ','
        << r.clusters << '\n';
  }
  return out.str();
}

std::string ExperimentReport::to_markdown() const {
  std::ostringstream out;
  out << "| Row | SR | POR | Stage | Precision | Recall | F1 | R-1 | R-2 | R-L | R-LSum | Avg(R-1,R-2,R-L) | Avg(all four) |\n"
      << "|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << r.label << " | " << (r.sr ? "x" : "") << " | " << (r.por ? "x" : "") << " | "
        << r.stage << " | ";
    if (r.extraction) {
      out << fixed4(r.extraction->precision) << " | " << fixed4(r.extraction->recall) << " | "
          << fixed4(r.extraction->f1) << " | ";
    } else {
      out << "- | - | - | ";
    }
    out << fixed4(r.abstraction.rouge1) << " | " << fixed4(r.abstraction.rouge2) << " | "
        << fixed4(r.abstraction.rougeL) << " | " << fixed4(r.abstraction.rougeLsum) << " | "
        << fixed4(r.abstraction.average3()) << " | " << fixed4(r.abstraction.average4()) << " |\n";
  }
  return out.str();
}

AblationSettings ablation_settings(const Config& config) {
  AblationSettings s;
  s.corpus = config.get_string("ablate.corpus", "");
  if (s.corpus.empty()) throw UsageError("ablate.corpus is required");
  s.train_size = config.get_size("ablate.train_size", s.train_size);
  s.validation_size = config.get_size("ablate.validation_size", s.validation_size);
  s.mle_only = config.get_bool("ablate.mle_only", s.mle_only);
  s.tokenizer = tokenizer_config(config);
  s.oracle = oracle_criterion(config);
  s.por = por_config(config);
  s.mle = train_config(config, "train");
  s.casc = train_config(config, "casc");
  s.train_abstractor = abstractor_spec(config, "abstractor");
  s.test_abstractor = abstractor_spec(config, "abstractor.test");
  s.eval.reference = parse_reference_mode(config.get_string("eval.reference", "none"));
  s.eval.bootstrap = s.mle.bootstrap;
  s.eval.lead_k = s.mle.lead_k;
  s.eval.stemming = config.get_bool("rouge.stemming", false);
  return s;
}

ExperimentReport run_ablation(const AblationSettings& settings) {
  return run_ablation(settings, load_clusters(settings.corpus, settings.tokenizer));
}

ExperimentReport run_ablation(const AblationSettings& settings,
                              const std::vector<DocumentCluster>& corpus) {
  const std::size_t n = corpus.size();
  if (settings.train_size == 0 || settings.train_size + settings.validation_size >= n) {
    throw UsageError("ablation split leaves no test clusters (" + std::to_string(n) +
                     " clusters available)");
  }
  const auto supervision = supervise_all(corpus, settings.oracle, settings.por, settings.tokenizer);
  auto split = [&](std::size_t begin, std::size_t end) {
    std::vector<DocumentCluster> part(corpus.begin() + static_cast<std::ptrdiff_t>(begin),
                                      corpus.begin() + static_cast<std::ptrdiff_t>(end));
    return make_examples(std::move(part), supervision, settings.tokenizer,
                         settings.mle.chunk_budget);
  };
  const std::size_t val_end = settings.train_size + settings.validation_size;
  const auto train = split(0, settings.train_size);
  const auto validation = split(settings.train_size, val_end);
  const auto test = split(val_end, n);

  auto train_abs = make_abstractor(settings.train_abstractor);
  auto test_abs = make_abstractor(settings.test_abstractor);

  ExperimentReport report;
  for (bool sr : {false, true}) {
    for (bool por : {false, true}) {
      const std::string suffix = std::string(sr ? "+SR" : "") + (por ? "+POR" : "");
      auto add_row = [&](const std::string& stage, const ScorerParams& params) {
        ReportRow row = evaluate(test, Checkpoint{params, sr}, *test_abs, settings.eval, test_abs.get());
        row.label = stage + suffix;
        row.stage = stage;
        row.sr = sr;
        row.por = por;
        report.rows.push_back(std::move(row));
      };

      TrainConfig mle = settings.mle;
      mle.sr_enabled = sr;
      mle.por_enabled = por;
      const TrainResult base = train_mle(train, validation, mle, *train_abs, test_abs.get());
      add_row("MLE", base.params);
      if (settings.mle_only) continue;

      for (CreditMode mode : {CreditMode::All, CreditMode::Distinct}) {
        TrainConfig casc = settings.casc;
        casc.sr_enabled = sr;
        casc.por_enabled = por;
        casc.credit_mode = mode;
        const TrainResult tuned =
            train_casc(train, validation, base.params, casc, *train_abs, test_abs.get());
        add_row(mode == CreditMode::All ? "SC" : "CASC", tuned.params);
      }
    }
  }
  return report;
}

}  // namespace reflect
