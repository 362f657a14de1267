#include "reflect/synthetic.hpp"

#include <algorithm>
#include <string>

namespace reflect {

namespace {

const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
const char* const kVowels[] = {"a", "e", "i", "o", "u"};
const char* const kCommon[] = {"the", "a", "of", "in", "on", "and", "to", "with", "after", "for"};

std::string pseudo_word(Rng& rng) {
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t i = 0; i < syllables; ++i) {
    w += kOnsets[rng.below(std::size(kOnsets))];
    w += kVowels[rng.below(std::size(kVowels))];
  }
  return w;
}

std::vector<std::string> vocabulary(Rng& rng, std::size_t n) {
  std::vector<std::string> words;
  while (words.size() < n) {
    std::string w = pseudo_word(rng);
    if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(std::move(w));
  }
  return words;
}

std::vector<std::string> phrase(Rng& rng, const std::vector<std::string>& topic, std::size_t length) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < length; ++i) {
    if (i % 3 == 1) {
      words.push_back(kCommon[rng.below(std::size(kCommon))]);
    } else {
      words.push_back(topic[rng.below(topic.size())]);
    }
  }
  return words;
}

std::string render(std::vector<std::string> words) {
  words.front()[0] = static_cast<char>(words.front()[0] - 'a' + 'A');
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out + " .";
}

}  // namespace

std::vector<DocumentCluster> make_synthetic_corpus(const SyntheticCorpusConfig& config,
                                                   const TokenizerConfig& tokenizer) {
  std::vector<DocumentCluster> corpus;
  corpus.reserve(config.clusters);
  for (std::size_t c = 0; c < config.clusters; ++c) {
    Rng rng(derive_seed(config.seed, "cluster", c));
    const auto topic = vocabulary(rng, 24);
    const auto background = vocabulary(rng, 60);

    std::vector<std::vector<std::string>> facts;
    for (std::size_t f = 0; f < config.facts; ++f) facts.push_back(phrase(rng, topic, 8 + rng.below(4)));

    std::vector<std::vector<std::string>> sentences(config.documents);
    std::vector<std::string> documents;
    for (std::size_t d = 0; d < config.documents; ++d) {
      std::vector<std::vector<std::string>> doc;
      std::vector<std::size_t> order(config.facts);
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      const std::size_t keep = std::min(config.facts_per_document, config.facts);
      for (std::size_t i = 0; i < keep; ++i) {
        auto words = facts[order[i]];
        if (rng.uniform() < config.paraphrase_rate) {
          // swap two content words for background ones
          for (int k = 0; k < 2; ++k) words[3 * rng.below((words.size() + 2) / 3)] = background[rng.below(background.size())];
        }
        doc.push_back(std::move(words));
      }
      for (std::size_t i = 0; i < config.fillers_per_document; ++i) {
        // filler borrows a few topic words so it overlaps the summary weakly
        auto words = phrase(rng, background, 7 + rng.below(6));
        words[rng.below(words.size())] = topic[rng.below(topic.size())];
        doc.push_back(std::move(words));
      }
      for (std::size_t i = doc.size(); i > 1; --i) std::swap(doc[i - 1], doc[rng.below(i)]);
      std::string text;
      for (auto& s : doc) {
        const std::string r = render(s);
        sentences[d].push_back(r);
        if (!text.empty()) text += ' ';
        text += r;
      }
      documents.push_back(std::move(text));
    }
    std::string summary;
    for (const auto& f : facts) {
      if (!summary.empty()) summary += ' ';
      summary += render(f);
    }
    corpus.push_back(make_cluster("syn-" + std::to_string(c), std::move(documents), summary,
                                  tokenizer, &sentences));
  }
  return corpus;
}

}  // namespace reflect
