#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "reflect/corpus.hpp"

namespace reflect {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const RougeScore&) const = default;
};

// Harmonic mean; 0 when p + r == 0.
double f1_of(double precision, double recall);

inline RougeScore make_score(double precision, double recall) {
  return {precision, recall, f1_of(precision, recall)};
}

enum class RougeKind { N, L, LSum };
enum class RougeStat { Precision, Recall, F1 };

struct RougeVariant {
  RougeKind kind = RougeKind::L;
  std::size_t n = 1;  // N kind only

  static RougeVariant ngram(std::size_t n) { return {RougeKind::N, n}; }
  static RougeVariant lcs() { return {RougeKind::L, 0}; }
  static RougeVariant lsum() { return {RougeKind::LSum, 0}; }
};

// "rouge1", "rouge2", "rougeL", "rougeLsum" (also "r1", "r2", "rl", "rlsum").
RougeVariant parse_rouge_variant(const std::string& name);
RougeStat parse_rouge_stat(const std::string& name);
double pick(const RougeScore& score, RougeStat stat);

namespace detail {

template <class T>
std::vector<std::span<const T>> sorted_ngrams(const std::vector<T>& seq, std::size_t n) {
  std::vector<std::span<const T>> grams;
  if (n == 0 || seq.size() < n) return grams;
  grams.reserve(seq.size() - n + 1);
  for (std::size_t i = 0; i + n <= seq.size(); ++i) grams.emplace_back(seq.data() + i, n);
  std::sort(grams.begin(), grams.end(), [](std::span<const T> a, std::span<const T> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });
  return grams;
}

// Size of the multiset intersection of two sorted n-gram lists.
template <class T>
std::size_t clipped_overlap(const std::vector<std::span<const T>>& a,
                            const std::vector<std::span<const T>>& b) {
  std::size_t i = 0, j = 0, hits = 0;
  auto less = [](std::span<const T> x, std::span<const T> y) {
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  };
  while (i < a.size() && j < b.size()) {
    if (less(a[i], b[j])) {
      ++i;
    } else if (less(b[j], a[i])) {
      ++j;
    } else {
      ++hits;
      ++i;
      ++j;
    }
  }
  return hits;
}

inline double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Full LCS table, (|a|+1) x (|b|+1), row-major.
template <class T>
std::vector<std::size_t> lcs_table(const std::vector<T>& a, const std::vector<T>& b) {
  const std::size_t cols = b.size() + 1;
  std::vector<std::size_t> t((a.size() + 1) * cols, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        t[i * cols + j] = t[(i - 1) * cols + j - 1] + 1;
      } else {
        t[i * cols + j] = std::max(t[(i - 1) * cols + j], t[i * cols + j - 1]);
      }
    }
  }
  return t;
}

// Positions in `ref` of one LCS with `cand`, chosen by the same backtrack
// order as the rouge_score package (prefers stepping along `cand`).
template <class T>
std::vector<std::size_t> lcs_positions(const std::vector<T>& ref, const std::vector<T>& cand) {
  const auto t = lcs_table(ref, cand);
  const std::size_t cols = cand.size() + 1;
  std::vector<std::size_t> out;
  std::size_t i = ref.size(), j = cand.size();
  while (i > 0 && j > 0) {
    if (ref[i - 1] == cand[j - 1]) {
      out.push_back(i - 1);
      --i;
      --j;
    } else if (t[i * cols + j - 1] > t[(i - 1) * cols + j]) {
      --j;
    } else {
      --i;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace detail

template <class T>
std::size_t ngram_overlap(const std::vector<T>& candidate, const std::vector<T>& reference,
                          std::size_t n) {
  return detail::clipped_overlap(detail::sorted_ngrams(candidate, n),
                                 detail::sorted_ngrams(reference, n));
}

template <class T>
RougeScore rouge_n(const std::vector<T>& candidate, const std::vector<T>& reference,
                   std::size_t n) {
  if (n == 0) return {};
  const auto cand = detail::sorted_ngrams(candidate, n);
  const auto ref = detail::sorted_ngrams(reference, n);
  const std::size_t hits = detail::clipped_overlap(cand, ref);
  return make_score(detail::safe_ratio(hits, cand.size()), detail::safe_ratio(hits, ref.size()));
}

template <class T>
std::size_t lcs_length(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) return 0;
  const std::vector<T>& outer = a.size() >= b.size() ? a : b;
  const std::vector<T>& inner = a.size() >= b.size() ? b : a;
  std::vector<std::size_t> prev(inner.size() + 1, 0), cur(inner.size() + 1, 0);
  for (const auto& x : outer) {
    for (std::size_t j = 1; j <= inner.size(); ++j) {
      cur[j] = x == inner[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[inner.size()];
}

template <class T>
RougeScore rouge_l(const std::vector<T>& candidate, const std::vector<T>& reference) {
  const std::size_t lcs = lcs_length(candidate, reference);
  return make_score(detail::safe_ratio(lcs, candidate.size()),
                    detail::safe_ratio(lcs, reference.size()));
}

// Summary-level ROUGE-L: per reference sentence, union of the LCS matches
// against every candidate sentence; each token is credited at most as many
// times as it occurs on both sides.
template <class T>
RougeScore rouge_lsum(const std::vector<std::vector<T>>& candidate_sentences,
                      const std::vector<std::vector<T>>& reference_sentences) {
  std::size_t cand_total = 0, ref_total = 0;
  std::map<T, std::size_t> cand_counts, ref_counts;
  for (const auto& s : candidate_sentences) {
    cand_total += s.size();
    for (const auto& t : s) ++cand_counts[t];
  }
  for (const auto& s : reference_sentences) {
    ref_total += s.size();
    for (const auto& t : s) ++ref_counts[t];
  }
  if (cand_total == 0 || ref_total == 0) return {};

  std::size_t hits = 0;
  for (const auto& ref : reference_sentences) {
    std::set<std::size_t> united;
    for (const auto& cand : candidate_sentences) {
      for (std::size_t pos : detail::lcs_positions(ref, cand)) united.insert(pos);
    }
    for (std::size_t pos : united) {
      auto& rc = ref_counts[ref[pos]];
      auto& cc = cand_counts[ref[pos]];
      if (rc > 0 && cc > 0) {
        ++hits;
        --rc;
        --cc;
      }
    }
  }
  return make_score(detail::safe_ratio(hits, cand_total), detail::safe_ratio(hits, ref_total));
}

template <class T>
std::vector<T> flatten(const std::vector<std::vector<T>>& sentences) {
  std::vector<T> out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

template <class T>
RougeScore rouge(const RougeVariant& variant, const std::vector<std::vector<T>>& candidate,
                 const std::vector<std::vector<T>>& reference) {
  switch (variant.kind) {
    case RougeKind::N:
      return rouge_n(flatten(candidate), flatten(reference), variant.n);
    case RougeKind::L:
      return rouge_l(flatten(candidate), flatten(reference));
    case RougeKind::LSum:
      return rouge_lsum(candidate, reference);
  }
  return {};
}

// Crude suffix stripper used when `rouge.stemming` is on.
std::string stem(std::string_view token);
Tokens stem_tokens(const Tokens& tokens);

// Splits a token stream at sentence-final punctuation tokens.
std::vector<Tokens> split_token_sentences(const Tokens& tokens);

}  // namespace reflect
