#pragma once

// Slow, direct reimplementations used as test oracles. None of them share
// code with the library beyond plain data types.

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "reflect/corpus.hpp"
#include "reflect/extractor.hpp"

namespace oracle {

using Tokens = std::vector<std::string>;
using big = boost::multiprecision::cpp_bin_float_50;

struct Prf {
  double p = 0, r = 0, f = 0;
};

inline double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

inline std::map<Tokens, int> ngram_counts(const Tokens& s, std::size_t n) {
  std::map<Tokens, int> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[Tokens(s.begin() + i, s.begin() + i + n)];
  return out;
}

inline Prf rouge_n(const Tokens& cand, const Tokens& ref, std::size_t n) {
  const auto c = ngram_counts(cand, n), r = ngram_counts(ref, n);
  int hits = 0, nc = 0, nr = 0;
  for (const auto& [g, k] : c) {
    nc += k;
    if (auto it = r.find(g); it != r.end()) hits += std::min(k, it->second);
  }
  for (const auto& [g, k] : r) nr += k;
  Prf out;
  out.p = nc ? double(hits) / nc : 0.0;
  out.r = nr ? double(hits) / nr : 0.0;
  out.f = harmonic(out.p, out.r);
  return out;
}

// Memoized recursion, independent of the table-filling loop in the library.
inline std::size_t lcs(const Tokens& a, const Tokens& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t v = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    return memo[key] = v;
  };
  return go(0, 0);
}

inline Prf rouge_l(const Tokens& cand, const Tokens& ref) {
  const double l = double(lcs(cand, ref));
  Prf out;
  out.p = cand.empty() ? 0.0 : l / cand.size();
  out.r = ref.empty() ? 0.0 : l / ref.size();
  out.f = harmonic(out.p, out.r);
  return out;
}

inline bool is_subsequence(const Tokens& sub, const Tokens& seq) {
  std::size_t j = 0;
  for (const auto& t : seq) {
    if (j < sub.size() && sub[j] == t) ++j;
  }
  return j == sub.size();
}

// Reference positions of the longest common subsequence with `cand`, by
// enumerating every subset of reference positions. nullopt when more than
// one position set is maximal (the test case must then be redesigned).
inline std::optional<std::set<std::size_t>> unique_lcs_positions(const Tokens& ref, const Tokens& cand) {
  std::size_t best = 0;
  std::vector<std::set<std::size_t>> winners;
  for (std::size_t mask = 0; mask < (std::size_t{1} << ref.size()); ++mask) {
    Tokens sub;
    std::set<std::size_t> pos;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (mask >> i & 1) {
        sub.push_back(ref[i]);
        pos.insert(i);
      }
    }
    if (!is_subsequence(sub, cand)) continue;
    if (sub.size() > best) {
      best = sub.size();
      winners = {pos};
    } else if (sub.size() == best) {
      winners.push_back(pos);
    }
  }
  if (winners.size() != 1) return std::nullopt;
  return winners.front();
}

// Union-LCS summary-level ROUGE-L with per-token clipping.
inline std::optional<Prf> rouge_lsum(const std::vector<Tokens>& cand, const std::vector<Tokens>& ref) {
  std::map<std::string, int> cand_count, ref_count;
  std::size_t nc = 0, nr = 0;
  for (const auto& s : cand) {
    for (const auto& t : s) ++cand_count[t], ++nc;
  }
  for (const auto& s : ref) {
    for (const auto& t : s) ++ref_count[t], ++nr;
  }
  std::size_t hits = 0;
  for (const auto& r : ref) {
    std::set<std::size_t> uni;
    for (const auto& c : cand) {
      auto pos = unique_lcs_positions(r, c);
      if (!pos) return std::nullopt;
      uni.insert(pos->begin(), pos->end());
    }
    for (std::size_t i : uni) {
      const auto& t = r[i];
      if (cand_count[t] > 0 && ref_count[t] > 0) {
        ++hits;
        --cand_count[t];
        --ref_count[t];
      }
    }
  }
  Prf out;
  out.p = nc ? double(hits) / nc : 0.0;
  out.r = nr ? double(hits) / nr : 0.0;
  out.f = harmonic(out.p, out.r);
  return out;
}

enum class Metric { R1R2Recall, R1R2F1, RLRecall };

inline double criterion(Metric m, const Tokens& cand, const Tokens& summary) {
  switch (m) {
    case Metric::R1R2Recall: return (rouge_n(cand, summary, 1).r + rouge_n(cand, summary, 2).r) / 2;
    case Metric::R1R2F1: return (rouge_n(cand, summary, 1).f + rouge_n(cand, summary, 2).f) / 2;
    case Metric::RLRecall: return rouge_l(cand, summary).r;
  }
  return 0;
}

// Greedy trace replay: every step evaluates all unselected sentences with
// the selection joined in document order.
inline std::vector<std::size_t> greedy_oracle(const std::vector<Tokens>& sentences, const Tokens& summary,
                                              Metric metric, std::size_t min_select, std::size_t max_select,
                                              bool stop_on_no_gain) {
  std::set<std::size_t> chosen;
  double current = 0.0;
  while (chosen.size() < max_select && chosen.size() < sentences.size()) {
    double best = -1;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (chosen.count(i)) continue;
      std::set<std::size_t> trial = chosen;
      trial.insert(i);
      Tokens joined;
      for (std::size_t k : trial) joined.insert(joined.end(), sentences[k].begin(), sentences[k].end());
      const double v = criterion(metric, joined, summary);
      if (v > best) best = v, arg = i;
    }
    if (best <= current && stop_on_no_gain && chosen.size() >= min_select) break;
    chosen.insert(arg);
    current = best;
  }
  return {chosen.begin(), chosen.end()};
}

inline big log_prob(double z0, double z1, bool selected) {
  const big e0 = boost::multiprecision::exp(big(z0)), e1 = boost::multiprecision::exp(big(z1));
  return boost::multiprecision::log((selected ? e1 : e0) / (e0 + e1));
}

// Central differences of f over every coordinate of x.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// max |a - b| / max(1, max |b|), a scale-aware relative error in max norm.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, scale = 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / scale;
}

// Direct scorer forward pass with explicit loops over the documented layout.
inline reflect::SentenceLogits forward(const reflect::FeatureMatrix& f, const reflect::ScorerParams& p) {
  const std::size_t n = f.rows, d = f.dim, w = p.window();
  const long half = long(w - 1) / 2;
  const auto& v = p.values();
  reflect::SentenceLogits out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> h(d, 0.0);
    for (std::size_t hh = 0; hh < d; ++hh) h[hh] = v[p.context_bias(hh)];
    for (long o = -half; o <= half; ++o) {
      const long j = long(i) + o;
      if (j < 0 || j >= long(n) || f.chunk[std::size_t(j)] != f.chunk[i]) continue;
      const std::size_t tap = std::size_t(o + half);
      for (std::size_t hh = 0; hh < d; ++hh) {
        for (std::size_t k = 0; k < d; ++k) h[hh] += v[p.context_weight(tap, hh, k)] * f.at(std::size_t(j), k);
      }
    }
    double z[2];
    for (std::size_t k = 0; k < 2; ++k) {
      z[k] = v[p.head_bias(k)];
      for (std::size_t hh = 0; hh < d; ++hh) z[k] += v[p.head_weight(k, hh)] * h[hh];
    }
    out[i] = {z[0], z[1]};
  }
  return out;
}

}  // namespace oracle
