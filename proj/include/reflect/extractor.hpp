#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "reflect/common.hpp"
#include "reflect/corpus.hpp"

namespace reflect {

// Column layout of the per-sentence feature vector.
namespace feature {
inline constexpr std::size_t kPosInDoc = 0;
inline constexpr std::size_t kPosInCluster = 1;
inline constexpr std::size_t kLogLength = 2;
inline constexpr std::size_t kCentroidUnigram = 3;
inline constexpr std::size_t kCentroidBigram = 4;
inline constexpr std::size_t kNovelty = 5;
inline constexpr std::size_t kRefRouge1 = 6;
inline constexpr std::size_t kRefRouge2 = 7;
inline constexpr std::size_t kRefLcsRatio = 8;
inline constexpr std::size_t kRefPresent = 9;
inline constexpr std::size_t kDim = 10;
}  // namespace feature

// Row-major N x D matrix plus the chunk id of each row. The context layer
// never mixes rows from different chunks.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<std::size_t> chunk;

  double at(std::size_t r, std::size_t c) const { return values[r * dim + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * dim + c]; }

  bool operator==(const FeatureMatrix&) const = default;
};

// Features of every sentence. Oversized sentences are cut to the chunk
// budget before any feature is computed.
FeatureMatrix encode(const DocumentCluster& cluster, const ChunkPlan& plan,
                     const Tokens* reference = nullptr);

// Windowed linear context layer followed by a two-logit affine head:
//   hᵢ = Σ_o W_o f_{i+o} + c     (o ∈ [-(w-1)/2, (w-1)/2], same chunk only)
//   zᵢ = A hᵢ + a
// The hidden width equals the feature dimension.
class ScorerParams {
 public:
  ScorerParams() = default;
  ScorerParams(std::size_t dim, std::size_t window);

  // Center tap is the identity, every other parameter zero: logits start at
  // zero and the context layer starts as a pass-through.
  static ScorerParams initial(std::size_t dim, std::size_t window);

  std::size_t dim() const { return dim_; }
  std::size_t window() const { return window_; }
  std::size_t hidden() const { return dim_; }
  std::size_t size() const { return values_.size(); }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  // Offsets into values().
  std::size_t context_weight(std::size_t tap, std::size_t h, std::size_t d) const {
    return (tap * dim_ + h) * dim_ + d;
  }
  std::size_t context_bias(std::size_t h) const { return window_ * dim_ * dim_ + h; }
  std::size_t head_weight(std::size_t k, std::size_t h) const {
    return window_ * dim_ * dim_ + dim_ + k * dim_ + h;
  }
  std::size_t head_bias(std::size_t k) const { return window_ * dim_ * dim_ + 3 * dim_ + k; }

  bool finite() const;

  bool operator==(const ScorerParams&) const = default;

 private:
  std::size_t dim_ = 0;
  std::size_t window_ = 0;
  std::vector<double> values_;
};

struct Checkpoint {
  ScorerParams params;
  bool summary_reference = false;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
// Throws DataError on malformed input or when D / w differ from the expected
// values (0 means "accept any").
Checkpoint parse_checkpoint(const std::string& text, std::size_t expect_dim = 0,
                            std::size_t expect_window = 0);
Checkpoint load_checkpoint(const std::string& path, std::size_t expect_dim = 0,
                           std::size_t expect_window = 0);
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);

struct LogitPair {
  double z0 = 0.0;
  double z1 = 0.0;

  bool operator==(const LogitPair&) const = default;
};
using SentenceLogits = std::vector<LogitPair>;

// Throws UsageError when the feature dimension does not match.
SentenceLogits score(const FeatureMatrix& features, const ScorerParams& params);

// Gradient of a loss with respect to the parameters given dL/dz per sentence.
std::vector<double> score_backward(const FeatureMatrix& features, const ScorerParams& params,
                                   const SentenceLogits& dlogits);

// exp(z1) / (exp(z0) + exp(z1)), kept strictly inside (0, 1).
double select_probability(const LogitPair& z);
// log of the probability of the realized action; finite for any finite z.
double log_prob(const LogitPair& z, bool selected);

struct Selection {
  IndexSet indices;
  bool fallback = false;  // empty policy output replaced by the argmax
};

// {i : pᵢ > 0.5}; falls back to the most probable sentence when empty.
Selection greedy_select(const SentenceLogits& logits);

struct SampledSelection {
  std::vector<int> outcomes;  // mᵢ ∈ {0, 1}
  IndexSet indices;           // support of outcomes
  bool fallback = false;
};

// Independent Bernoulli(pᵢ) draws. An all-zero draw is replaced by the argmax
// sentence, whose outcome is set to 1 so that indices == support(outcomes).
SampledSelection sample_select(const SentenceLogits& logits, Rng& rng);

// Σ log p(action) over the mask (every sentence when mask is null).
double select_log_prob(const SentenceLogits& logits, const IndexSet& chosen,
                       const IndexSet* mask = nullptr);

}  // namespace reflect
