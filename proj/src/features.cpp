#include <cmath>
#include <map>
#include <set>

#include "reflect/extractor.hpp"
#include "reflect/rouge.hpp"

namespace reflect {

namespace {

using Gram = std::vector<std::string>;

std::vector<Gram> grams_of(const Tokens& tokens, std::size_t n) {
  std::vector<Gram> out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                     tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  return out;
}

// n-grams occurring in at least two distinct sentences.
std::set<Gram> shared_grams(const std::vector<Tokens>& sentences, std::size_t n) {
  std::map<Gram, std::size_t> df;
  for (const auto& s : sentences) {
    const auto grams = grams_of(s, n);
    for (const auto& g : std::set<Gram>(grams.begin(), grams.end())) ++df[g];
  }
  std::set<Gram> out;
  for (const auto& [g, count] : df) {
    if (count >= 2) out.insert(g);
  }
  return out;
}

// F1 between a sentence's n-gram multiset and a set (each member counted once).
double bag_f1(const Tokens& sentence, const std::set<Gram>& bag, std::size_t n) {
  const auto grams = grams_of(sentence, n);
  if (grams.empty() || bag.empty()) return 0.0;
  const std::set<Gram> distinct(grams.begin(), grams.end());
  std::size_t hits = 0;
  for (const auto& g : distinct) hits += bag.count(g);
  return f1_of(static_cast<double>(hits) / static_cast<double>(grams.size()),
               static_cast<double>(hits) / static_cast<double>(bag.size()));
}

}  // namespace

FeatureMatrix encode(const DocumentCluster& cluster, const ChunkPlan& plan,
                     const Tokens* reference) {
  const std::size_t n = cluster.size();
  FeatureMatrix m;
  m.rows = n;
  m.dim = feature::kDim;
  m.values.assign(n * m.dim, 0.0);
  m.chunk = plan.chunk_of();
  m.chunk.resize(n, plan.chunks.empty() ? 0 : plan.chunks.size() - 1);

  std::vector<Tokens> tokens;
  tokens.reserve(n);
  for (const auto& s : cluster.sentences) {
    Tokens t = s.tokens;
    if (t.size() > plan.budget) t.resize(plan.budget);
    tokens.push_back(std::move(t));
  }

  std::map<std::size_t, std::size_t> doc_sizes;
  for (const auto& s : cluster.sentences) ++doc_sizes[s.doc_index];
  std::map<std::size_t, std::size_t> seen_in_doc;

  const auto shared1 = shared_grams(tokens, 1);
  const auto shared2 = shared_grams(tokens, 2);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = cluster.sentences[i];
    const std::size_t doc_n = doc_sizes[s.doc_index];
    const std::size_t pos = seen_in_doc[s.doc_index]++;
    m.at(i, feature::kPosInDoc) =
        doc_n > 1 ? static_cast<double>(pos) / static_cast<double>(doc_n - 1) : 0.0;
    m.at(i, feature::kPosInCluster) =
        n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    m.at(i, feature::kLogLength) = std::log1p(static_cast<double>(tokens[i].size()));
    m.at(i, feature::kCentroidUnigram) = bag_f1(tokens[i], shared1, 1);
    m.at(i, feature::kCentroidBigram) = bag_f1(tokens[i], shared2, 2);
    double closest = 0.0;
    for (std::size_t j = 0; j < i; ++j) closest = std::max(closest, rouge_n(tokens[i], tokens[j], 1).f1);
    m.at(i, feature::kNovelty) = 1.0 - closest;
    if (reference != nullptr) {
      m.at(i, feature::kRefRouge1) = rouge_n(tokens[i], *reference, 1).f1;
      m.at(i, feature::kRefRouge2) = rouge_n(tokens[i], *reference, 2).f1;
      m.at(i, feature::kRefLcsRatio) = tokens[i].empty()
          ? 0.0
          : static_cast<double>(lcs_length(tokens[i], *reference)) /
                static_cast<double>(tokens[i].size());
      m.at(i, feature::kRefPresent) = 1.0;
    }
  }
  return m;
}

}  // namespace reflect
