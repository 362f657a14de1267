#include <doctest.h>

#include <cstdlib>

#include "reflect/config.hpp"
#include "reflect/synthetic.hpp"

using namespace reflect;

TEST_CASE("config parsing") {
  const auto c = Config::parse("# comment\n a.b = 3 \n\nflag = true # trailing\nname=x y\n");
  CHECK(c.get_size("a.b", 0) == 3);
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_string("name", "") == "x y");
  CHECK(c.get_double("missing", 1.5) == 1.5);
  CHECK_THROWS_WITH_AS(Config::parse("ok = 1\nbroken\n"), doctest::Contains("line 2"), UsageError);
  CHECK_THROWS_AS(Config::parse("= 3"), UsageError);
  CHECK_THROWS_AS(Config::parse("k = maybe").get_bool("k", false), UsageError);
  CHECK_THROWS_AS(Config::parse("k = 1.5x").get_double("k", 0), UsageError);
  CHECK_THROWS_AS(Config::parse("k = -2").get_size("k", 0), UsageError);
  CHECK_THROWS_AS(Config::load("/nonexistent/file.cfg"), UsageError);
}

TEST_CASE("typed sections") {
  const auto c = Config::parse(
      "oracle.min_select = 2\noracle.metric = avg-r1r2-f1\npor.gamma = 1\npor.shift = multiplicative\n"
      "train.lr = 0.2\ntrain.optimizer = adam\ncasc.credit_mode = all\nabstractor.kind = centrality\n"
      "abstractor.budget = 12\nsr.bootstrap = lead\nsr.lead_k = 2\nreward.metric = rouge1\n");
  CHECK(oracle_criterion(c).min_select == 2);
  CHECK(oracle_criterion(c).metric == OracleMetric::AvgR1R2F1);
  CHECK(por_config(c).shift == ShiftMode::Multiplicative);
  const auto t = train_config(c);
  CHECK(t.learning_rate == 0.2);
  CHECK(t.optimizer == OptimizerKind::Adam);
  CHECK(t.credit_mode == CreditMode::All);
  CHECK(t.bootstrap == ReferencePolicy::Kind::LeadK);
  CHECK(t.lead_k == 2);
  CHECK(t.reward.variant.kind == RougeKind::N);
  const auto a = abstractor_spec(c, "abstractor.test");
  CHECK(a.kind == AbstractorKind::CentralityCompress);
  CHECK(a.budget == 12);
  CHECK_THROWS_AS(oracle_criterion(Config::parse("oracle.min_select = 5\noracle.max_select = 2")), UsageError);
  CHECK_THROWS_AS(por_config(Config::parse("por.gamma = -1")), UsageError);
  CHECK_THROWS_AS(train_config(Config::parse("train.lr = 0")), UsageError);
  CHECK_THROWS_AS(train_config(Config::parse("train.optimizer = rmsprop")), UsageError);
  CHECK_THROWS_AS(abstractor_spec(Config::parse("abstractor.payload = bytes")), UsageError);
}

TEST_CASE("seed resolution honours the environment") {
  const auto c = Config::parse("seed = 4");
  ::unsetenv("REFLECT_SEED");
  CHECK(resolve_seed(c, "seed", 0) == 4);
  ::setenv("REFLECT_SEED", "99", 1);
  CHECK(resolve_seed(c, "seed", 0) == 99);
  ::unsetenv("REFLECT_SEED");
}

TEST_CASE("synthetic corpus shape and determinism") {
  SyntheticCorpusConfig sc;
  sc.clusters = 10;
  const auto a = make_synthetic_corpus(sc), b = make_synthetic_corpus(sc);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(serialize_cluster(a[i]) == serialize_cluster(b[i]));
    CHECK(a[i].size() == sc.documents * (sc.facts_per_document + sc.fillers_per_document));
    CHECK(a[i].summary.has_value());
    CHECK(split_sentences(*a[i].summary).size() == sc.facts);
  }
  CHECK(a[0].id == "syn-0");
  sc.seed = 7;
  CHECK(serialize_cluster(make_synthetic_corpus(sc)[0]) != serialize_cluster(a[0]));
}
