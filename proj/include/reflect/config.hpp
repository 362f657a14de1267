#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "reflect/abstractor.hpp"
#include "reflect/learning.hpp"
#include "reflect/supervision.hpp"

namespace reflect {

// Flat `key = value` file; '#' starts a comment.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Seed from `key`, overridden by the REFLECT_SEED environment variable.
std::uint64_t resolve_seed(const Config& config, const std::string& key, std::uint64_t fallback);

TokenizerConfig tokenizer_config(const Config& config);
OracleCriterion oracle_criterion(const Config& config);
PorConfig por_config(const Config& config);
// prefix is "abstractor" or "abstractor.test".
AbstractorSpec abstractor_spec(const Config& config, const std::string& prefix = "abstractor");
RewardConfig reward_config(const Config& config);
// prefix is "train" or "casc".
TrainConfig train_config(const Config& config, const std::string& prefix = "train");

}  // namespace reflect
