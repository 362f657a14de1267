#include <doctest.h>

#include <sstream>

#include "reflect/corpus.hpp"

using namespace reflect;

namespace {
std::vector<std::string> g_warnings;
void capture(std::string_view m) { g_warnings.emplace_back(m); }
}  // namespace

TEST_CASE("tokenize splits words and punctuation") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("The cat sat.") == Tokens{"the", "cat", "sat", "."});
  CHECK(tokenize("don't stop") == Tokens{"don", "'", "t", "stop"});
  CHECK(tokenize("A  b\tc\n") == Tokens{"a", "b", "c"});
}

TEST_CASE("tokenizer options") {
  TokenizerConfig keep_case{false, true};
  CHECK(tokenize("The Cat", keep_case) == Tokens{"The", "Cat"});
  TokenizerConfig drop_punct{true, false};
  CHECK(tokenize("Hi, there!", drop_punct) == Tokens{"hi", "there"});
}

TEST_CASE("unicode punctuation folds to ascii") {
  CHECK(tokenize("it\xE2\x80\x99s") == Tokens{"it", "'", "s"});
  CHECK(tokenize("\xE2\x80\x9Cquoted\xE2\x80\x9D") == Tokens{"\"", "quoted", "\""});
}

TEST_CASE("tokenization is idempotent on rejoined tokens") {
  for (const char* text : {"The cat sat.", "don't stop", "U.S. troops, 3.5% more -- said \"no\"!"}) {
    const Tokens once = tokenize(text);
    CHECK(tokenize(join_tokens(once)) == once);
  }
}

TEST_CASE("sentence splitter") {
  CHECK(split_sentences("X. Y.").size() == 2);
  CHECK(split_sentences("One here. Two there? Three!").size() == 3);
  CHECK(split_sentences("Dr. Smith arrived. He sat.").size() == 2);
  CHECK(split_sentences("lowercase. after").size() == 1);
  CHECK(split_sentences("").empty());
}

TEST_CASE("load_clusters parses lines and splits sentences") {
  std::istringstream in(R"({"id":"a","documents":["X. Y."]})" "\n");
  const auto clusters = load_clusters(in);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].id == "a");
  CHECK(clusters[0].size() == 2);
  CHECK_FALSE(clusters[0].summary.has_value());
}

TEST_CASE("clusters without sentences are skipped with a warning") {
  g_warnings.clear();
  set_warn_sink(capture);
  std::istringstream in(R"({"id":"b","documents":[],"summary":"s"})" "\n" R"({"id":"c","documents":["Ok."]})" "\n");
  const auto clusters = load_clusters(in);
  set_warn_sink(nullptr);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].id == "c");
  REQUIRE(g_warnings.size() == 1);
  CHECK(g_warnings[0].find("b") != std::string::npos);
}

TEST_CASE("malformed lines name their line number") {
  std::istringstream in("not json\n");
  try {
    load_clusters(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  std::istringstream second(R"({"id":"a","documents":["A."]})" "\n\n" R"({"documents":["B."]})" "\n");
  try {
    load_clusters(second);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("presegmented sentences bypass the splitter") {
  std::istringstream in(
      R"({"id":"p","documents":["ignored text"],"sentences":[["First one. Still first.","Second."]],"summary":"S."})" "\n");
  const auto c = load_clusters(in).at(0);
  REQUIRE(c.size() == 2);
  CHECK(c.sentences[0].raw == "First one. Still first.");
  CHECK(c.presegmented);
}

TEST_CASE("cluster invariants") {
  const auto c = make_cluster("x", {"A b. C d.", "E f. G h. I j."}, std::string("A b."), {});
  REQUIRE(c.size() == 5);
  std::size_t prev_doc = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c.sentences[i].index == i);
    CHECK(c.sentences[i].doc_index >= prev_doc);
    prev_doc = c.sentences[i].doc_index;
    CHECK(tokenize(c.sentences[i].raw) == c.sentences[i].tokens);
  }
  CHECK(c.sentences[2].doc_index == 1);
}

TEST_CASE("serialize and load round-trip") {
  std::vector<DocumentCluster> originals = {
      make_cluster("r1", {"Alpha beta. Gamma delta.", "Epsilon."}, std::string("Alpha."), {}),
      make_cluster("r2", {"One."}, std::nullopt, {}),
  };
  std::vector<std::vector<std::string>> seg = {{"Pre one.", "Pre two."}};
  originals.push_back(make_cluster("r3", {"Pre one. Pre two."}, std::string("Pre."), {}, &seg));
  std::stringstream io;
  for (const auto& c : originals) io << serialize_cluster(c) << '\n';
  const auto loaded = load_clusters(io);
  REQUIRE(loaded.size() == originals.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) CHECK(loaded[i] == originals[i]);
}

TEST_CASE("chunk plan examples") {
  auto ranges = [](const ChunkPlan& p) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& c : p.chunks) out.emplace_back(c.begin, c.end);
    return out;
  };
  using R = std::vector<std::pair<std::size_t, std::size_t>>;
  CHECK(ranges(make_chunk_plan(std::vector<std::size_t>{5, 5, 5}, 10)) == R{{0, 2}, {2, 3}});
  const auto big = make_chunk_plan(std::vector<std::size_t>{12}, 10);
  CHECK(ranges(big) == R{{0, 1}});
  CHECK(big.chunks[0].truncated);
  CHECK(ranges(make_chunk_plan(std::vector<std::size_t>{3, 3, 3, 3}, 6)) == R{{0, 2}, {2, 4}});
}

TEST_CASE("chunk plan properties on random token counts") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> counts(1 + rng.below(20));
    for (auto& c : counts) c = 1 + rng.below(15);
    const std::size_t budget = 1 + rng.below(25);
    const auto plan = make_chunk_plan(counts, budget);
    std::size_t next = 0;
    for (const auto& ch : plan.chunks) {
      CHECK(ch.begin == next);
      CHECK(ch.end > ch.begin);
      std::size_t total = 0;
      for (std::size_t i = ch.begin; i < ch.end; ++i) total += counts[i];
      if (ch.end - ch.begin > 1) CHECK(total <= budget);
      CHECK(ch.truncated == (ch.end - ch.begin == 1 && total > budget));
      next = ch.end;
    }
    CHECK(next == counts.size());
    const auto of = plan.chunk_of();
    REQUIRE(of.size() == counts.size());
    for (std::size_t i = 1; i < of.size(); ++i) CHECK(of[i] >= of[i - 1]);
  }
}
