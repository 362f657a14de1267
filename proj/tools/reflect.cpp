#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "reflect/config.hpp"
#include "reflect/eval.hpp"
#include "reflect/synthetic.hpp"

using namespace reflect;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kExternal = 3 };

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

// Options shared by every subcommand; CLI values are folded into the config
// so that one code path reads settings.
struct Common {
  std::string config_path;
  std::string in;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> overrides;

  Config load() const {
    Config c = config_path.empty() ? Config{} : Config::load(config_path);
    for (const auto& [k, v] : overrides) c.set(k, v);
    return c;
  }
};

// Binds a CLI option to a config key.
template <typename T>
void bind(CLI::App* app, Common& common, const std::string& flag, const std::string& key,
          const std::string& help) {
  app->add_option_function<T>(
      flag,
      [&common, key](const T& v) {
        std::ostringstream s;
        s << v;
        common.overrides.emplace_back(key, s.str());
      },
      help);
}

void bind_abstractor(CLI::App* app, Common& common) {
  bind<std::string>(app, common, "--abstractor", "abstractor.kind", "concat, centrality or external");
  bind<std::string>(app, common, "--abs-cmd", "abstractor.command", "external abstractor command line");
  bind<std::size_t>(app, common, "--budget", "abstractor.budget", "abstractor output budget in tokens");
  bind<double>(app, common, "--abs-timeout", "abstractor.timeout_s", "seconds per external request");
}

std::vector<Example> load_examples(const Config& config, const std::string& data,
                                   const std::string& sup) {
  const TokenizerConfig tok = tokenizer_config(config);
  auto clusters = load_clusters(data, tok);
  std::vector<SupervisionRecord> records;
  if (!sup.empty()) records = load_supervision(sup);
  auto examples = make_examples(std::move(clusters), records, tok,
                                config.get_size("chunk.budget", 512));
  return examples;
}

TrainConfig training(const Config& config, const std::string& prefix, const Common& common) {
  TrainConfig t = train_config(config, prefix);
  if (common.seed) t.seed = *common.seed;
  return t;
}

void write_metrics(const std::string& path, const std::vector<MetricsEntry>& log) {
  if (path.empty()) return;
  auto out = open_out(path);
  for (const auto& e : log) out << serialize_metrics(e) << '\n';
}

int run_oracle(const Common& common, const std::string& out_path) {
  const Config config = common.load();
  const TokenizerConfig tok = tokenizer_config(config);
  const auto clusters = load_clusters(common.in, tok);
  const auto records = supervise_all(clusters, oracle_criterion(config), por_config(config), tok);
  auto out = open_out(out_path);
  write_supervision(out, records);
  std::printf("wrote %zu supervision records to %s\n", records.size(), out_path.c_str());
  return kOk;
}

int run_train(const Common& common, const std::string& sup, const std::string& val,
              const std::string& val_sup, const std::string& out_path,
              const std::string& metrics) {
  Config config = common.load();
  // without the flags, both relaxations are off unless the config enables them
  if (!config.has("sr.enabled")) config.set("sr.enabled", "false");
  if (!config.has("por.enabled")) config.set("por.enabled", "false");
  if (sup.empty()) throw UsageError("train requires --sup");
  const auto train = load_examples(config, common.in, sup);
  if (train.empty()) throw DataError("no examples");
  const auto validation = val.empty() ? train : load_examples(config, val, val_sup);
  const TrainConfig t = training(config, "train", common);
  auto abs = make_abstractor(abstractor_spec(config, "abstractor"));
  const TrainResult result = train_mle(train, validation, t, *abs);
  save_checkpoint(out_path, Checkpoint{result.params, t.sr_enabled});
  write_metrics(metrics, result.log);
  std::printf("best epoch %zu, validation R-1 F1 %.4f\n", result.best_epoch,
              result.best_validation);
  return kOk;
}

int run_casc(const Common& common, const std::string& sup, const std::string& val,
             const std::string& val_sup, const std::string& ckpt, const std::string& out_path,
             const std::string& metrics) {
  const Config config = common.load();
  const TrainConfig base = training(config, "casc", common);
  const Checkpoint start = load_checkpoint(ckpt, feature::kDim, base.window);
  TrainConfig t = base;
  t.sr_enabled = start.summary_reference;
  const auto train = load_examples(config, common.in, sup);
  if (train.empty()) throw DataError("no examples");
  const auto validation = val.empty() ? train : load_examples(config, val, val_sup);
  auto abs = make_abstractor(abstractor_spec(config, "abstractor"));
  const TrainResult result = train_casc(train, validation, start.params, t, *abs);
  save_checkpoint(out_path, Checkpoint{result.params, t.sr_enabled});
  write_metrics(metrics, result.log);
  std::printf("best epoch %zu, validation R-1 F1 %.4f\n", result.best_epoch,
              result.best_validation);
  return kOk;
}

EvalConfig eval_config(const Config& config) {
  const TrainConfig t = train_config(config, "train");
  EvalConfig e;
  e.reference = parse_reference_mode(config.get_string("eval.reference", "none"));
  e.bootstrap = t.bootstrap;
  e.lead_k = t.lead_k;
  e.stemming = config.get_bool("rouge.stemming", false);
  return e;
}

int run_generate(const Common& common, const std::string& ckpt, const std::string& out_path) {
  const Config config = common.load();
  const Checkpoint checkpoint =
      load_checkpoint(ckpt, feature::kDim, config.get_size("extractor.window", 3));
  const auto examples = load_examples(config, common.in, "");
  if (examples.empty()) throw DataError("no examples");
  auto abs = make_abstractor(abstractor_spec(config, "abstractor"));
  const auto generations = generate_all(examples, checkpoint, *abs, eval_config(config));
  auto out = open_out(out_path);
  std::size_t written = 0;
  for (const auto& g : generations) {
    if (!g) continue;
    out << serialize_generation(*g) << '\n';
    ++written;
  }
  if (written == 0) throw ExternalError("the abstractor failed on every cluster");
  std::printf("wrote %zu of %zu summaries to %s\n", written, examples.size(), out_path.c_str());
  return kOk;
}

int run_evaluate(const Common& common, const std::string& hyp, const std::string& sup,
                 const std::string& out_path, const std::string& markdown) {
  const Config config = common.load();
  const auto examples = load_examples(config, common.in, sup);
  const auto hyps = load_generations(hyp);
  std::map<std::string, const Generation*> by_id;
  for (const auto& g : hyps) by_id[g.id] = &g;
  std::vector<std::optional<Generation>> aligned(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto it = by_id.find(examples[i].cluster.id);
    if (it == by_id.end()) {
      warn("no summary for cluster '" + examples[i].cluster.id + "'; skipped");
      continue;
    }
    aligned[i] = *it->second;
  }
  ReportRow row = score_generations(examples, aligned, config.get_bool("rouge.stemming", false));
  row.label = "eval";
  row.stage = config.get_string("eval.stage", "MLE");
  ExperimentReport report{{row}};
  write_file(out_path, report.to_csv());
  if (!markdown.empty()) write_file(markdown, report.to_markdown());
  std::fputs(report.to_markdown().c_str(), stdout);
  return kOk;
}

int run_ablate(const Common& common, const std::string& out_path, const std::string& markdown) {
  Config config = common.load();
  if (common.seed) config.set("seed", std::to_string(*common.seed));
  AblationSettings settings = ablation_settings(config);
  if (common.seed) settings.mle.seed = settings.casc.seed = *common.seed;
  if (!common.in.empty()) settings.corpus = common.in;
  const ExperimentReport report = run_ablation(settings);
  write_file(out_path, report.to_csv());
  if (!markdown.empty()) write_file(markdown, report.to_markdown());
  std::fputs(report.to_markdown().c_str(), stdout);
  return kOk;
}

int run_synth(const Common& common, const std::string& out_path, SyntheticCorpusConfig synth) {
  const Config config = common.load();
  if (common.seed) synth.seed = *common.seed;
  const auto corpus = make_synthetic_corpus(synth, tokenizer_config(config));
  auto out = open_out(out_path);
  for (const auto& c : corpus) out << serialize_cluster(c) << '\n';
  std::printf("wrote %zu clusters to %s\n", corpus.size(), out_path.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extract-then-abstract summarization: supervision, training and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "flat key = value config file");

  auto add_in = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--in", common.in, "cluster JSONL");
    if (required) opt->required();
    sub->add_option("--seed", common.seed, "random seed (overrides config and REFLECT_SEED)");
  };

  std::string out, sup, val, val_sup, ckpt, hyp, metrics, markdown;

  auto* oracle = app.add_subcommand("oracle", "build pseudo oracles and relaxation weights");
  add_in(oracle, true);
  oracle->add_option("--out", out, "supervision JSONL")->required();
  bind<std::size_t>(oracle, common, "--min-select", "oracle.min_select", "minimum oracle size");
  bind<std::size_t>(oracle, common, "--max-select", "oracle.max_select", "maximum oracle size");
  bind<std::string>(oracle, common, "--metric", "oracle.metric",
                    "avg-r1r2-recall, avg-r1r2-f1 or rl-recall");
  bind<double>(oracle, common, "--gamma", "por.gamma", "relaxation exponent");

  auto* train = app.add_subcommand("train", "weighted maximum-likelihood training");
  add_in(train, true);
  train->add_option("--sup", sup, "supervision JSONL")->required();
  train->add_option("--val", val, "validation cluster JSONL (default: training set)");
  train->add_option("--val-sup", val_sup, "validation supervision JSONL");
  train->add_option("--out", out, "checkpoint path")->required();
  train->add_option("--metrics", metrics, "per-epoch metrics JSONL");
  train->add_flag_callback("--sr", [&] { common.overrides.emplace_back("sr.enabled", "true"); },
                           "condition the extractor on a reference summary");
  train->add_flag_callback("--por", [&] { common.overrides.emplace_back("por.enabled", "true"); },
                           "weight the loss with relaxation weights");
  bind<std::size_t>(train, common, "--epochs", "train.epochs", "training epochs");
  bind<double>(train, common, "--lr", "train.lr", "learning rate");
  bind_abstractor(train, common);

  auto* casc = app.add_subcommand("casc", "self-critic fine-tuning from a checkpoint");
  add_in(casc, true);
  casc->add_option("--sup", sup, "supervision JSONL (optional)");
  casc->add_option("--val", val, "validation cluster JSONL (default: training set)");
  casc->add_option("--val-sup", val_sup, "validation supervision JSONL");
  casc->add_option("--ckpt", ckpt, "starting checkpoint")->required();
  casc->add_option("--out", out, "checkpoint path")->required();
  casc->add_option("--metrics", metrics, "per-step metrics JSONL");
  bind<std::string>(casc, common, "--credit-mode", "casc.credit_mode", "distinct, intersection or all");
  bind<std::size_t>(casc, common, "--epochs", "casc.epochs", "training epochs");
  bind<double>(casc, common, "--lr", "casc.lr", "learning rate");
  bind_abstractor(casc, common);

  auto* generate = app.add_subcommand("generate", "extract and abstract summaries");
  add_in(generate, true);
  generate->add_option("--ckpt", ckpt, "checkpoint")->required();
  generate->add_option("--out", out, "summary JSONL")->required();
  bind<std::string>(generate, common, "--reference", "eval.reference",
                    "none, bootstrap, refined or ground-truth");
  bind_abstractor(generate, common);

  auto* evaluate = app.add_subcommand("evaluate", "score summaries against gold");
  add_in(evaluate, true);
  evaluate->add_option("--hyp", hyp, "summary JSONL")->required();
  evaluate->add_option("--sup", sup, "supervision JSONL for extraction metrics");
  evaluate->add_option("--out", out, "report CSV")->required();
  evaluate->add_option("--markdown", markdown, "report Markdown");

  auto* ablate = app.add_subcommand("ablate", "run the relaxation x referencing x stage grid");
  add_in(ablate, false);
  ablate->add_option("--out", out, "report CSV")->required();
  ablate->add_option("--markdown", markdown, "report Markdown");

  SyntheticCorpusConfig synth;
  auto* synth_cmd = app.add_subcommand("synth", "write the synthetic toy corpus");
  synth_cmd->add_option("--out", out, "cluster JSONL")->required();
  synth_cmd->add_option("--seed", common.seed, "corpus seed");
  synth_cmd->add_option("--clusters", synth.clusters, "number of clusters");
  synth_cmd->add_option("--facts", synth.facts, "key facts per cluster");
  synth_cmd->add_option("--documents", synth.documents, "documents per cluster");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*oracle) return run_oracle(common, out);
    if (*train) return run_train(common, sup, val, val_sup, out, metrics);
    if (*casc) return run_casc(common, sup, val, val_sup, ckpt, out, metrics);
    if (*generate) return run_generate(common, ckpt, out);
    if (*evaluate) return run_evaluate(common, hyp, sup, out, markdown);
    if (*ablate) return run_ablate(common, out, markdown);
    if (*synth_cmd) return run_synth(common, out, synth);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return kData;
  } catch (const ExternalError& e) {
    std::fprintf(stderr, "abstractor error: %s\n", e.what());
    return kExternal;
  }
  return kUsage;
}
