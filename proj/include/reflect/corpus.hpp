#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reflect/common.hpp"

namespace reflect {

using Tokens = std::vector<std::string>;

struct TokenizerConfig {
  bool lowercase = true;
  bool keep_punct = true;
};

// Lowercases ASCII (when configured), maps common Unicode punctuation and
// spaces to ASCII equivalents, then splits on whitespace and punctuation.
// Each punctuation character is its own token. Bytes >= 0x80 that survive
// normalization are treated as word characters.
Tokens tokenize(std::string_view text, const TokenizerConfig& config = {});

std::string join_tokens(const Tokens& tokens);

// Rule-based splitter: '.', '?' or '!' followed by whitespace and an
// uppercase letter ends a sentence unless the preceding word is a known
// abbreviation.
std::vector<std::string> split_sentences(std::string_view text);

struct Sentence {
  std::size_t index = 0;
  Tokens tokens;
  std::string raw;
  std::size_t doc_index = 0;

  bool operator==(const Sentence&) const = default;
};

struct DocumentCluster {
  std::string id;
  std::vector<std::string> documents;
  std::vector<Sentence> sentences;
  std::optional<std::string> summary;
  // True when sentences came from the input file rather than the splitter;
  // preserved so that serialization round-trips.
  bool presegmented = false;

  bool operator==(const DocumentCluster&) const = default;

  std::size_t size() const { return sentences.size(); }
};

// Gold summary tokens and its segmentation (for summary-level ROUGE-L).
Tokens summary_tokens(const DocumentCluster& cluster, const TokenizerConfig& config);
std::vector<Tokens> summary_sentences(const DocumentCluster& cluster,
                                      const TokenizerConfig& config);

// Builds a cluster from documents; pre-segmented sentences (one list per
// document) bypass the splitter.
DocumentCluster make_cluster(std::string id, std::vector<std::string> documents,
                             std::optional<std::string> summary,
                             const TokenizerConfig& config,
                             const std::vector<std::vector<std::string>>* presegmented = nullptr);

// Parses one JSONL line. Returns nullopt (after a warning) for clusters with
// zero sentences; throws DataError naming the line on malformed input.
std::optional<DocumentCluster> parse_cluster_line(std::string_view line, std::size_t line_number,
                                                  const TokenizerConfig& config);

// Streams clusters in file order. Blank lines are ignored.
void for_each_cluster(std::istream& in, const TokenizerConfig& config,
                      const std::function<void(DocumentCluster&&)>& sink);
std::vector<DocumentCluster> load_clusters(const std::string& path,
                                           const TokenizerConfig& config = {});
std::vector<DocumentCluster> load_clusters(std::istream& in, const TokenizerConfig& config = {});

std::string serialize_cluster(const DocumentCluster& cluster);

struct ChunkRange {
  std::size_t begin = 0;  // first sentence index
  std::size_t end = 0;    // one past the last
  bool truncated = false;  // single sentence longer than the budget

  bool operator==(const ChunkRange&) const = default;
};

struct ChunkPlan {
  std::vector<ChunkRange> chunks;
  std::size_t budget = 512;

  // chunk id for each sentence index
  std::vector<std::size_t> chunk_of() const;
};

// Order-preserving first-fit packing: a new chunk starts whenever the next
// sentence would push the running token count past `budget`.
ChunkPlan make_chunk_plan(const DocumentCluster& cluster, std::size_t budget);
ChunkPlan make_chunk_plan(const std::vector<std::size_t>& token_counts, std::size_t budget);

}  // namespace reflect
