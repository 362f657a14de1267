#pragma once

#include <string>
#include <vector>

#include "reflect/common.hpp"
#include "reflect/corpus.hpp"

namespace testing_helpers {

inline std::string random_sentence(reflect::Rng& rng, std::size_t min_len, std::size_t max_len,
                                   std::size_t vocab) {
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    if (!s.empty()) s += ' ';
    s += "w" + std::to_string(rng.below(vocab));
  }
  return s;
}

// One document of presegmented random sentences plus a random summary.
inline reflect::DocumentCluster random_cluster(reflect::Rng& rng, const std::string& id,
                                               std::size_t sentences, std::size_t vocab = 8) {
  std::vector<std::vector<std::string>> seg(1);
  std::string doc;
  for (std::size_t i = 0; i < sentences; ++i) {
    seg[0].push_back(random_sentence(rng, 1, 7, vocab));
    doc += seg[0].back() + " ";
  }
  std::string summary = random_sentence(rng, 3, 10, vocab);
  return reflect::make_cluster(id, {doc}, summary, {}, &seg);
}

inline reflect::DocumentCluster cluster_of(const std::string& id, const std::vector<std::string>& sentences,
                                           const std::string& summary) {
  std::vector<std::vector<std::string>> seg{sentences};
  std::string doc;
  for (const auto& s : sentences) doc += s + " ";
  return reflect::make_cluster(id, {doc}, summary, {}, &seg);
}

}  // namespace testing_helpers
