#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "oracles.hpp"
#include "reflect/extractor.hpp"

using namespace reflect;
using testing_helpers::cluster_of;
using testing_helpers::random_cluster;

namespace {

LogitPair from_p(double p) { return {0.0, std::log(p / (1 - p))}; }

SentenceLogits from_ps(std::initializer_list<double> ps) {
  SentenceLogits out;
  for (double p : ps) out.push_back(from_p(p));
  return out;
}

ScorerParams random_params(Rng& rng, std::size_t dim, std::size_t window, double scale = 0.5) {
  ScorerParams p(dim, window);
  for (auto& v : p.values()) v = scale * rng.normal();
  return p;
}

FeatureMatrix random_features(Rng& rng, std::size_t rows, std::size_t dim, std::size_t chunks) {
  FeatureMatrix f;
  f.rows = rows;
  f.dim = dim;
  f.values.resize(rows * dim);
  for (auto& v : f.values) v = rng.normal();
  for (std::size_t i = 0; i < rows; ++i) f.chunk.push_back(i * chunks / rows);
  return f;
}

}  // namespace

TEST_CASE("single-sentence cluster without reference") {
  const auto c = cluster_of("s", {"just one sentence"}, "x");
  const auto f = encode(c, make_chunk_plan(c, 512));
  REQUIRE(f.rows == 1);
  CHECK(f.at(0, feature::kPosInDoc) == 0.0);
  CHECK(f.at(0, feature::kPosInCluster) == 0.0);
  for (auto k : {feature::kRefRouge1, feature::kRefRouge2, feature::kRefLcsRatio, feature::kRefPresent}) {
    CHECK(f.at(0, k) == 0.0);
  }
}

TEST_CASE("reference equal to a sentence gives unit reference features") {
  const auto c = cluster_of("r", {"alpha beta", "gamma delta epsilon", "zeta"}, "x");
  const Tokens ref = c.sentences[1].tokens;
  const auto f = encode(c, make_chunk_plan(c, 512), &ref);
  CHECK(f.at(1, feature::kRefRouge1) == 1.0);
  CHECK(f.at(1, feature::kRefRouge2) == 1.0);
  CHECK(f.at(1, feature::kRefLcsRatio) == 1.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(f.at(i, feature::kRefPresent) == 1.0);
}

TEST_CASE("toy 3-sentence feature matrix by hand") {
  const auto c = cluster_of("h", {"a b c", "a b d", "e f"}, "x");
  const Tokens ref{"a", "b", "c"};
  const auto f = encode(c, make_chunk_plan(c, 512), &ref);
  const double expected[3][10] = {
      {0.0, 0.0, std::log(4.0), 0.8, 2.0 / 3, 1.0, 1.0, 1.0, 1.0, 1.0},
      {0.5, 0.5, std::log(4.0), 0.8, 2.0 / 3, 1.0 / 3, 2.0 / 3, 0.5, 2.0 / 3, 1.0},
      {1.0, 1.0, std::log(3.0), 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0},
  };
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < feature::kDim; ++k) {
      INFO("row " << i << " col " << k);
      CHECK(f.at(i, k) == doctest::Approx(expected[i][k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("encode is deterministic and per-document positions reset") {
  const auto c = make_cluster("d", {"A b. C d. E f.", "G h. I j."}, std::string("x"), {});
  const auto plan = make_chunk_plan(c, 512);
  CHECK(encode(c, plan) == encode(c, plan));
  const auto f = encode(c, plan);
  CHECK(f.at(3, feature::kPosInDoc) == 0.0);
  CHECK(f.at(4, feature::kPosInDoc) == 1.0);
  CHECK(f.at(2, feature::kPosInDoc) == 1.0);
}

TEST_CASE("oversized sentences are cut to the budget before featurization") {
  const auto c = cluster_of("o", {"a b c d e f g h"}, "x");
  const auto plan = make_chunk_plan(c, 4);
  CHECK(plan.chunks[0].truncated);
  CHECK(encode(c, plan).at(0, feature::kLogLength) == doctest::Approx(std::log(5.0)));
}

TEST_CASE("zero params give p = 0.5; a ln 3 margin gives 0.75") {
  Rng rng(1);
  const auto f = random_features(rng, 4, 3, 1);
  ScorerParams zero(3, 3);
  for (const auto& z : score(f, zero)) CHECK(select_probability(z) == 0.5);
  ScorerParams p(3, 1);
  p.values()[p.head_bias(1)] = std::log(3.0);
  for (const auto& z : score(f, p)) CHECK(select_probability(z) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("identical features at identical positions give identical logits") {
  FeatureMatrix f;
  f.rows = 2;
  f.dim = 2;
  f.values = {0.3, -1.2, 0.3, -1.2};
  f.chunk = {0, 1};
  Rng rng(2);
  const auto z = score(f, random_params(rng, 2, 3));
  CHECK(z[0] == z[1]);
}

TEST_CASE("score matches a direct loop over the parameter layout") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 1 + rng.below(5), window = 1 + 2 * rng.below(3);
    const auto f = random_features(rng, 1 + rng.below(9), dim, 1 + rng.below(3));
    const auto p = random_params(rng, dim, window);
    const auto got = score(f, p), want = oracle::forward(f, p);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].z0 == doctest::Approx(want[i].z0).epsilon(1e-12));
      CHECK(got[i].z1 == doctest::Approx(want[i].z1).epsilon(1e-12));
    }
  }
}

TEST_CASE("context never crosses chunk boundaries") {
  Rng rng(13);
  auto f = random_features(rng, 6, 3, 2);  // chunks {0,1,2} {3,4,5}
  const auto p = random_params(rng, 3, 5);
  const auto before = score(f, p);
  for (std::size_t k = 0; k < 3; ++k) f.at(3, k) += 10.0;
  const auto after = score(f, p);
  for (std::size_t i = 0; i < 3; ++i) CHECK(before[i] == after[i]);
  CHECK_FALSE(before[4] == after[4]);
}

TEST_CASE("dimension mismatch is an error") {
  Rng rng(3);
  const auto f = random_features(rng, 2, 4, 1);
  CHECK_THROWS_AS(score(f, ScorerParams(3, 3)), UsageError);
  CHECK_THROWS_AS(ScorerParams(3, 2), UsageError);
}

TEST_CASE("initial params are an identity pass-through with zero logits") {
  const auto p = ScorerParams::initial(4, 3);
  CHECK(p.values()[p.context_weight(1, 2, 2)] == 1.0);
  CHECK(p.values()[p.context_weight(0, 2, 2)] == 0.0);
  Rng rng(5);
  for (const auto& z : score(random_features(rng, 3, 4, 1), p)) CHECK(z == LogitPair{0, 0});
}

TEST_CASE("greedy_select threshold and fallback") {
  auto g = greedy_select(from_ps({0.6, 0.4, 0.9}));
  CHECK(g.indices == IndexSet{0, 2});
  CHECK_FALSE(g.fallback);
  g = greedy_select(SentenceLogits{{0, 0}, {0, 0}});
  CHECK(g.indices == IndexSet{0});
  CHECK(g.fallback);
  CHECK(greedy_select(from_ps({0.7, 0.8, 0.51})).indices == IndexSet{0, 1, 2});
  CHECK(greedy_select(from_ps({0.2, 0.3, 0.1})).indices == IndexSet{1});
}

TEST_CASE("greedy_select is invariant under common logit shifts") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    SentenceLogits z(1 + rng.below(8));
    for (auto& p : z) p = {rng.normal(), rng.normal()};
    SentenceLogits shifted = z;
    const double c = 50 * rng.normal();
    for (auto& p : shifted) p = {p.z0 + c, p.z1 + c};
    CHECK(greedy_select(z).indices == greedy_select(shifted).indices);
  }
}

TEST_CASE("probabilities are stable for large logits") {
  for (double z : {1e4, -1e4, 700.0, -700.0}) {
    const double p = select_probability({0, z});
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(std::isfinite(log_prob({0, z}, true)));
    CHECK(std::isfinite(log_prob({0, z}, false)));
  }
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const LogitPair z{rng.normal() * 5, rng.normal() * 5};
    const double c = rng.normal() * 100;
    CHECK(select_probability(z) == doctest::Approx(select_probability({z.z0 + c, z.z1 + c})).epsilon(1e-9));
  }
}

TEST_CASE("sample_select degenerate, deterministic and fallback cases") {
  SentenceLogits sure(5, LogitPair{0, 60});
  Rng rng(1);
  CHECK(sample_select(sure, rng).indices == all_indices(5));

  const SentenceLogits z = from_ps({0.3, 0.5, 0.8, 0.1});
  Rng a(99), b(99);
  for (int i = 0; i < 20; ++i) {
    const auto x = sample_select(z, a), y = sample_select(z, b);
    CHECK(x.indices == y.indices);
    CHECK(x.outcomes == y.outcomes);
  }

  SentenceLogits never(3, LogitPair{0, -60});
  never[1].z1 = -50;
  const auto s = sample_select(never, rng);
  CHECK(s.fallback);
  CHECK(s.indices == IndexSet{1});
  CHECK(s.outcomes == std::vector<int>{0, 1, 0});
}

TEST_CASE("mean sampled set size for p = 0.5, N = 10") {
  const SentenceLogits z(10, LogitPair{0, 0});
  Rng rng(2024);
  double total = 0;
  for (int i = 0; i < 10000; ++i) total += double(sample_select(z, rng).indices.size());
  CHECK(std::abs(total / 10000 - 5.0) <= 0.15);
}

TEST_CASE("select_log_prob cases") {
  const SentenceLogits half(4, LogitPair{0, 0});
  CHECK(select_log_prob(half, IndexSet{0, 2}) == doctest::Approx(4 * std::log(0.5)).epsilon(1e-15));
  const IndexSet empty;
  CHECK(select_log_prob(half, IndexSet{1}, &empty) == 0.0);

  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    SentenceLogits z(1 + rng.below(6));
    for (auto& p : z) p = {rng.normal() * 8, rng.normal() * 8};
    IndexSet chosen, mask;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (rng.below(2)) chosen.push_back(i);
      if (rng.below(2)) mask.push_back(i);
    }
    oracle::big all = 0, masked = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto lp = oracle::log_prob(z[i].z0, z[i].z1, contains(chosen, i));
      all += lp;
      if (contains(mask, i)) masked += lp;
    }
    CHECK(select_log_prob(z, chosen) == doctest::Approx(static_cast<double>(all)).epsilon(1e-13));
    CHECK(select_log_prob(z, chosen, &mask) == doctest::Approx(static_cast<double>(masked)).epsilon(1e-13));
  }
}

TEST_CASE("checkpoint round-trip and validation") {
  Rng rng(8);
  Checkpoint c{random_params(rng, feature::kDim, 3), true};
  const auto text = serialize_checkpoint(c);
  const auto back = parse_checkpoint(text, feature::kDim, 3);
  CHECK(back.params == c.params);
  CHECK(back.summary_reference);
  CHECK(serialize_checkpoint(back) == text);
  CHECK_THROWS_AS(parse_checkpoint(text, 9, 3), DataError);
  CHECK_THROWS_AS(parse_checkpoint(text, feature::kDim, 5), DataError);
  CHECK_THROWS_AS(parse_checkpoint("{\"version\":1}", 0, 0), DataError);
  CHECK_THROWS_AS(parse_checkpoint("garbage", 0, 0), DataError);
  auto without_sr = text;
  const auto at = without_sr.find("\"sr\"");
  REQUIRE(at != std::string::npos);
  without_sr.replace(at, 4, "\"xx\"");
  CHECK_FALSE(parse_checkpoint(without_sr).summary_reference);
}
