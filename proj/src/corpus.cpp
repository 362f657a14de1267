#include "reflect/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

namespace reflect {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }
bool is_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }

// Folds the Unicode punctuation and spaces that commonly appear in news text
// onto ASCII so that they tokenize like their plain counterparts.
std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xA0) {
      out.push_back(' ');
      ++i;
      continue;
    }
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80) {
      const auto d = static_cast<unsigned char>(text[i + 2]);
      const char* repl = nullptr;
      switch (d) {
        case 0x98: case 0x99: case 0x9B: repl = "'"; break;
        case 0x9C: case 0x9D: case 0x9F: repl = "\""; break;
        case 0x90: case 0x91: case 0x92: case 0x93: case 0x94: case 0x95: repl = "-"; break;
        case 0xA6: repl = "..."; break;
        case 0x80: case 0x81: case 0x82: case 0x83: case 0x84: case 0x85: case 0x86:
        case 0x87: case 0x88: case 0x89: case 0x8A: case 0xAF: repl = " "; break;
        default: break;
      }
      if (repl != nullptr) {
        out += repl;
        i += 2;
        continue;
      }
    }
    out.push_back(static_cast<char>(c));
  }
  return out;
}

const std::array<std::string_view, 40> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "inc", "ltd",
    "co", "corp", "u.s", "u.k", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
    "oct", "nov", "dec", "no", "gen", "gov", "sen", "rep", "mt", "ft", "col", "lt", "sgt"};

bool is_abbreviation(std::string_view text, std::size_t period) {
  std::size_t start = period;
  while (start > 0 && !is_space(static_cast<unsigned char>(text[start - 1]))) --start;
  std::string word;
  for (std::size_t i = start; i < period; ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == '"' || c == '(' || c == '\'') continue;
    word.push_back(static_cast<char>(std::tolower(c)));
  }
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Tokens tokenize(std::string_view text, const TokenizerConfig& config) {
  const std::string norm = normalize(text);
  Tokens tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      tokens.push_back(std::move(word));
      word.clear();
    }
  };
  for (char ch : norm) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      flush();
      if (config.keep_punct) tokens.emplace_back(1, ch);
    } else {
      word.push_back(config.lowercase && c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return tokens;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    std::string s = trim(text.substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '.' || text[j] == '?' || text[j] == '!')) ++j;
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')' || text[j] == ']')) ++j;
    if (j >= text.size() || !is_space(static_cast<unsigned char>(text[j]))) {
      i = j - 1;
      continue;
    }
    std::size_t k = j;
    while (k < text.size() && is_space(static_cast<unsigned char>(text[k]))) ++k;
    if (k < text.size()) {
      std::size_t first = k;
      while (first < text.size() && (text[first] == '"' || text[first] == '\'' || text[first] == '(')) ++first;
      if (first >= text.size() || !is_upper(static_cast<unsigned char>(text[first]))) {
        i = j - 1;
        continue;
      }
    }
    if (c == '.' && j == i + 1 && is_abbreviation(text, i)) continue;
    emit(j);
    i = j - 1;
  }
  emit(text.size());
  return out;
}

Tokens summary_tokens(const DocumentCluster& cluster, const TokenizerConfig& config) {
  return cluster.summary ? tokenize(*cluster.summary, config) : Tokens{};
}

std::vector<Tokens> summary_sentences(const DocumentCluster& cluster,
                                      const TokenizerConfig& config) {
  std::vector<Tokens> out;
  if (!cluster.summary) return out;
  for (const auto& s : split_sentences(*cluster.summary)) out.push_back(tokenize(s, config));
  return out;
}

DocumentCluster make_cluster(std::string id, std::vector<std::string> documents,
                             std::optional<std::string> summary, const TokenizerConfig& config,
                             const std::vector<std::vector<std::string>>* presegmented) {
  DocumentCluster cluster;
  cluster.id = std::move(id);
  cluster.documents = std::move(documents);
  cluster.summary = std::move(summary);
  cluster.presegmented = presegmented != nullptr;
  const std::size_t docs = presegmented ? presegmented->size() : cluster.documents.size();
  for (std::size_t d = 0; d < docs; ++d) {
    const std::vector<std::string> raws =
        presegmented ? (*presegmented)[d] : split_sentences(cluster.documents[d]);
    for (const auto& raw : raws) {
      Sentence s;
      s.index = cluster.sentences.size();
      s.raw = raw;
      s.tokens = tokenize(raw, config);
      s.doc_index = d;
      cluster.sentences.push_back(std::move(s));
    }
  }
  return cluster;
}

std::optional<DocumentCluster> parse_cluster_line(std::string_view line, std::size_t line_number,
                                                  const TokenizerConfig& config) {
  using nlohmann::json;
  auto fail = [&](const std::string& what) -> DataError {
    return DataError("line " + std::to_string(line_number) + ": " + what);
  };
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw fail(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw fail("expected a JSON object");
  if (!j.contains("id") || !j["id"].is_string()) throw fail("missing string field 'id'");
  if (!j.contains("documents") || !j["documents"].is_array()) {
    throw fail("missing array field 'documents'");
  }
  std::vector<std::string> documents;
  for (const auto& d : j["documents"]) {
    if (!d.is_string()) throw fail("'documents' must contain strings");
    documents.push_back(d.get<std::string>());
  }
  std::optional<std::string> summary;
  if (j.contains("summary") && !j["summary"].is_null()) {
    if (!j["summary"].is_string()) throw fail("'summary' must be a string");
    summary = j["summary"].get<std::string>();
  }
  std::optional<std::vector<std::vector<std::string>>> preseg;
  if (j.contains("sentences") && !j["sentences"].is_null()) {
    const auto& s = j["sentences"];
    if (!s.is_array()) throw fail("'sentences' must be an array");
    std::vector<std::vector<std::string>> per_doc;
    const bool nested = !s.empty() && s[0].is_array();
    if (nested) {
      for (const auto& doc : s) {
        if (!doc.is_array()) throw fail("'sentences' must be uniformly nested");
        std::vector<std::string> list;
        for (const auto& x : doc) {
          if (!x.is_string()) throw fail("'sentences' must contain strings");
          list.push_back(x.get<std::string>());
        }
        per_doc.push_back(std::move(list));
      }
    } else {
      std::vector<std::string> list;
      for (const auto& x : s) {
        if (!x.is_string()) throw fail("'sentences' must contain strings");
        list.push_back(x.get<std::string>());
      }
      per_doc.push_back(std::move(list));
    }
    preseg = std::move(per_doc);
  }
  DocumentCluster cluster = make_cluster(j["id"].get<std::string>(), std::move(documents),
                                         std::move(summary), config,
                                         preseg ? &*preseg : nullptr);
  if (cluster.sentences.empty()) {
    warn("line " + std::to_string(line_number) + ": cluster '" + cluster.id +
         "' has no sentences; skipped");
    return std::nullopt;
  }
  return cluster;
}

void for_each_cluster(std::istream& in, const TokenizerConfig& config,
                      const std::function<void(DocumentCluster&&)>& sink) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    if (auto cluster = parse_cluster_line(line, number, config)) sink(std::move(*cluster));
  }
}

std::vector<DocumentCluster> load_clusters(std::istream& in, const TokenizerConfig& config) {
  std::vector<DocumentCluster> out;
  for_each_cluster(in, config, [&](DocumentCluster&& c) { out.push_back(std::move(c)); });
  return out;
}

std::vector<DocumentCluster> load_clusters(const std::string& path, const TokenizerConfig& config) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return load_clusters(in, config);
}

std::string serialize_cluster(const DocumentCluster& cluster) {
  nlohmann::ordered_json j;
  j["id"] = cluster.id;
  j["documents"] = cluster.documents;
  if (cluster.summary) j["summary"] = *cluster.summary;
  if (cluster.presegmented) {
    std::size_t docs = 0;
    for (const auto& s : cluster.sentences) docs = std::max(docs, s.doc_index + 1);
    std::vector<std::vector<std::string>> per_doc(docs);
    for (const auto& s : cluster.sentences) per_doc[s.doc_index].push_back(s.raw);
    j["sentences"] = per_doc;
  }
  return j.dump();
}

std::vector<std::size_t> ChunkPlan::chunk_of() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    for (std::size_t i = chunks[k].begin; i < chunks[k].end; ++i) out.push_back(k);
  }
  return out;
}

ChunkPlan make_chunk_plan(const std::vector<std::size_t>& token_counts, std::size_t budget) {
  ChunkPlan plan;
  plan.budget = std::max<std::size_t>(budget, 1);
  std::size_t used = 0;
  for (std::size_t i = 0; i < token_counts.size(); ++i) {
    const std::size_t n = token_counts[i];
    if (plan.chunks.empty() || used + n > plan.budget) {
      plan.chunks.push_back({i, i + 1, n > plan.budget});
      used = n;
    } else {
      plan.chunks.back().end = i + 1;
      used += n;
    }
  }
  return plan;
}

ChunkPlan make_chunk_plan(const DocumentCluster& cluster, std::size_t budget) {
  std::vector<std::size_t> counts;
  counts.reserve(cluster.sentences.size());
  for (const auto& s : cluster.sentences) counts.push_back(s.tokens.size());
  return make_chunk_plan(counts, budget);
}

}  // namespace reflect
