#include "reflect/config.hpp"

#include <cstdlib>
#include <limits>
#include <fstream>
#include <sstream>

namespace reflect {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::parse(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError("config line " + std::to_string(number) + ": empty key");
    config.values_[key] = trim(line.substr(eq + 1));
  }
  return config;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Config::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw UsageError("config key " + key + ": expected a boolean, got '" + *v + "'");
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return d;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + ": expected a number, got '" + *v + "'");
  }
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  if (*v == "inf" || *v == "unbounded") return std::numeric_limits<std::uint64_t>::max();
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(*v, &used);
    if (used != v->size() || v->front() == '-') throw std::invalid_argument(*v);
    return x;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + ": expected a non-negative integer, got '" + *v + "'");
  }
}

std::uint64_t resolve_seed(const Config& config, const std::string& key, std::uint64_t fallback) {
  std::uint64_t seed = config.get_u64(key, fallback);
  if (const char* env = std::getenv("REFLECT_SEED"); env != nullptr && *env != '\0') {
    Config tmp;
    tmp.set("REFLECT_SEED", env);
    seed = tmp.get_u64("REFLECT_SEED", seed);
  }
  return seed;
}

TokenizerConfig tokenizer_config(const Config& config) {
  TokenizerConfig t;
  t.lowercase = config.get_bool("tokenizer.lowercase", t.lowercase);
  t.keep_punct = config.get_bool("tokenizer.keep_punct", t.keep_punct);
  return t;
}

OracleCriterion oracle_criterion(const Config& config) {
  OracleCriterion c;
  c.metric = parse_oracle_metric(config.get_string("oracle.metric", to_string(c.metric)));
  c.min_select = config.get_size("oracle.min_select", c.min_select);
  c.max_select = config.get_size("oracle.max_select", c.max_select);
  c.stop_on_no_gain = config.get_bool("oracle.stop_on_no_gain", c.stop_on_no_gain);
  if (c.max_select == 0) throw UsageError("oracle.max_select must be positive");
  if (c.min_select > c.max_select) throw UsageError("oracle.min_select exceeds oracle.max_select");
  return c;
}

PorConfig por_config(const Config& config) {
  PorConfig p;
  p.gamma = config.get_double("por.gamma", p.gamma);
  if (p.gamma < 0.0) throw UsageError("por.gamma must be non-negative");
  p.rouge_stat = parse_rouge_stat(config.get_string("por.rouge", "f1"));
  const std::string shift = config.get_string("por.shift", "additive");
  if (shift == "additive") {
    p.shift = ShiftMode::Additive;
  } else if (shift == "multiplicative") {
    p.shift = ShiftMode::Multiplicative;
  } else {
    throw UsageError("por.shift must be additive or multiplicative");
  }
  return p;
}

AbstractorSpec abstractor_spec(const Config& config, const std::string& prefix) {
  // abstractor.test.* keys fall back to abstractor.*
  auto key = [&](const std::string& k) {
    const std::string own = prefix + "." + k;
    return config.has(own) ? own : "abstractor." + k;
  };
  AbstractorSpec s;
  s.kind = parse_abstractor_kind(config.get_string(key("kind"), "concat"));
  s.budget = config.get_size(key("budget"), s.budget);
  if (s.budget == 0) throw UsageError(key("budget") + " must be at least 1");
  s.external_command = config.get_string(key("command"), "");
  s.timeout_s = config.get_double(key("timeout_s"), s.timeout_s);
  s.fallback_to_concat = config.get_bool(key("fallback"), s.fallback_to_concat);
  const std::string payload = config.get_string(key("payload"), "tokens");
  if (payload == "tokens") {
    s.payload = PayloadMode::Tokens;
  } else if (payload == "raw") {
    s.payload = PayloadMode::Raw;
  } else {
    throw UsageError(key("payload") + " must be tokens or raw");
  }
  s.tokenizer = tokenizer_config(config);
  return s;
}

RewardConfig reward_config(const Config& config) {
  RewardConfig r;
  r.variant = parse_rouge_variant(config.get_string("reward.metric", "rougeL"));
  r.stat = parse_rouge_stat(config.get_string("reward.stat", "f1"));
  r.stemming = config.get_bool("rouge.stemming", false);
  return r;
}

TrainConfig train_config(const Config& config, const std::string& prefix) {
  TrainConfig t;
  auto k = [&](const std::string& name) { return prefix + "." + name; };
  t.learning_rate = config.get_double(k("lr"), t.learning_rate);
  if (!(t.learning_rate > 0.0)) throw UsageError(k("lr") + " must be positive");
  t.epochs = config.get_size(k("epochs"), t.epochs);
  t.batch = config.get_size(k("batch"), t.batch);
  if (t.batch == 0) throw UsageError(k("batch") + " must be positive");
  const std::string opt = config.get_string(k("optimizer"), "sgd");
  if (opt == "sgd") {
    t.optimizer = OptimizerKind::Sgd;
  } else if (opt == "adam") {
    t.optimizer = OptimizerKind::Adam;
  } else {
    throw UsageError(k("optimizer") + " must be sgd or adam");
  }
  t.seed = resolve_seed(config, "seed", 0);
  t.gamma = config.get_double("por.gamma", t.gamma);
  t.sr_enabled = config.get_bool("sr.enabled", t.sr_enabled);
  t.por_enabled = config.get_bool("por.enabled", t.por_enabled);
  t.credit_mode = parse_credit_mode(config.get_string("casc.credit_mode", "distinct"));
  t.window = config.get_size("extractor.window", t.window);
  t.chunk_budget = config.get_size("chunk.budget", t.chunk_budget);
  if (t.chunk_budget == 0) throw UsageError("chunk.budget must be positive");
  t.reward = reward_config(config);
  const std::string boot = config.get_string("sr.bootstrap", "all");
  if (boot == "all") {
    t.bootstrap = ReferencePolicy::Kind::All;
  } else if (boot == "lead") {
    t.bootstrap = ReferencePolicy::Kind::LeadK;
  } else {
    throw UsageError("sr.bootstrap must be all or lead");
  }
  t.lead_k = config.get_size("sr.lead_k", t.lead_k);
  t.abort_on_abstractor_error = config.get_string("casc.on_abstractor_error", "skip") == "abort";
  return t;
}

}  // namespace reflect
