#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "reflect/corpus.hpp"

namespace reflect {

// Toy multi-document corpus. Every cluster has a few key facts; each
// document restates some of them (verbatim or lightly paraphrased) among
// filler sentences on the same topic, and the gold summary lists the facts.
struct SyntheticCorpusConfig {
  std::size_t clusters = 200;
  std::size_t documents = 3;
  std::size_t facts = 4;
  std::size_t facts_per_document = 3;
  std::size_t fillers_per_document = 5;
  double paraphrase_rate = 0.7;
  std::uint64_t seed = 2024;
};

std::vector<DocumentCluster> make_synthetic_corpus(const SyntheticCorpusConfig& config,
                                                   const TokenizerConfig& tokenizer = {});

}  // namespace reflect
