#include "reflect/rouge.hpp"

#include <cctype>

namespace reflect {

double f1_of(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

RougeVariant parse_rouge_variant(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s.rfind("rouge", 0) == 0) s = "r" + s.substr(5);
  if (s == "r-lsum" || s == "rlsum") return RougeVariant::lsum();
  if (s == "r-l" || s == "rl") return RougeVariant::lcs();
  if (s.size() >= 2 && s[0] == 'r') {
    std::string digits = s.substr(s[1] == '-' ? 2 : 1);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      const auto n = static_cast<std::size_t>(std::stoul(digits));
      if (n >= 1) return RougeVariant::ngram(n);
    }
  }
  throw UsageError("unknown ROUGE variant '" + name + "'");
}

RougeStat parse_rouge_stat(const std::string& name) {
  if (name == "f1" || name == "f" || name == "fmeasure") return RougeStat::F1;
  if (name == "recall" || name == "r") return RougeStat::Recall;
  if (name == "precision" || name == "p") return RougeStat::Precision;
  throw UsageError("unknown ROUGE statistic '" + name + "'");
}

double pick(const RougeScore& score, RougeStat stat) {
  switch (stat) {
    case RougeStat::Precision: return score.precision;
    case RougeStat::Recall: return score.recall;
    case RougeStat::F1: return score.f1;
  }
  return score.f1;
}

namespace {
bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}
}  // namespace

std::string stem(std::string_view token) {
  std::string t(token);
  if (t.size() <= 3) return t;
  if (ends_with(t, "sses")) return t.substr(0, t.size() - 2);
  if (ends_with(t, "ies")) return t.substr(0, t.size() - 2);
  if (ends_with(t, "ing") && t.size() > 5) return t.substr(0, t.size() - 3);
  if (ends_with(t, "ed") && t.size() > 4) return t.substr(0, t.size() - 2);
  if (ends_with(t, "ly") && t.size() > 4) return t.substr(0, t.size() - 2);
  if (ends_with(t, "s") && !ends_with(t, "ss") && !ends_with(t, "us")) return t.substr(0, t.size() - 1);
  return t;
}

Tokens stem_tokens(const Tokens& tokens) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(stem(t));
  return out;
}

std::vector<Tokens> split_token_sentences(const Tokens& tokens) {
  std::vector<Tokens> out;
  Tokens current;
  for (const auto& t : tokens) {
    current.push_back(t);
    if (t == "." || t == "?" || t == "!") {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace reflect
