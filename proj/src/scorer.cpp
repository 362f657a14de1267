#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "reflect/extractor.hpp"

namespace reflect {

ScorerParams::ScorerParams(std::size_t dim, std::size_t window) : dim_(dim), window_(window) {
  if (dim == 0) throw UsageError("scorer dimension must be positive");
  if (window == 0 || window % 2 == 0) throw UsageError("scorer window must be odd");
  values_.assign(window * dim * dim + dim + 2 * dim + 2, 0.0);
}

ScorerParams ScorerParams::initial(std::size_t dim, std::size_t window) {
  ScorerParams p(dim, window);
  const std::size_t center = window / 2;
  for (std::size_t h = 0; h < dim; ++h) p.values_[p.context_weight(center, h, h)] = 1.0;
  return p;
}

bool ScorerParams::finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["D"] = checkpoint.params.dim();
  j["w"] = checkpoint.params.window();
  j["sr"] = checkpoint.summary_reference;
  j["params"] = checkpoint.params.values();
  return j.dump();
}

Checkpoint parse_checkpoint(const std::string& text, std::size_t expect_dim,
                            std::size_t expect_window) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1) throw DataError("unsupported checkpoint version");
    const auto dim = j.at("D").get<std::size_t>();
    const auto window = j.at("w").get<std::size_t>();
    if (expect_dim != 0 && dim != expect_dim) {
      throw DataError("checkpoint D=" + std::to_string(dim) + " but expected " +
                      std::to_string(expect_dim));
    }
    if (expect_window != 0 && window != expect_window) {
      throw DataError("checkpoint w=" + std::to_string(window) + " but expected " +
                      std::to_string(expect_window));
    }
    Checkpoint c;
    c.params = ScorerParams(dim, window);
    auto values = j.at("params").get<std::vector<double>>();
    if (values.size() != c.params.size()) throw DataError("checkpoint parameter count mismatch");
    c.params.values() = std::move(values);
    c.summary_reference = j.value("sr", false);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad checkpoint: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("bad checkpoint: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::string& path, std::size_t expect_dim,
                           std::size_t expect_window) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str(), expect_dim, expect_window);
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << serialize_checkpoint(checkpoint) << '\n';
}

namespace {

void check_dims(const FeatureMatrix& features, const ScorerParams& params) {
  if (features.dim != params.dim()) {
    throw UsageError("feature dimension " + std::to_string(features.dim) +
                     " does not match scorer dimension " + std::to_string(params.dim()));
  }
}

// Hidden activations, N x H.
std::vector<double> context(const FeatureMatrix& f, const ScorerParams& p) {
  const std::size_t n = f.rows, dim = p.dim(), half = p.window() / 2;
  const auto& v = p.values();
  std::vector<double> h(n * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* hi = &h[i * dim];
    for (std::size_t k = 0; k < dim; ++k) hi[k] = v[p.context_bias(k)];
    for (std::size_t tap = 0; tap < p.window(); ++tap) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i + tap) - static_cast<std::ptrdiff_t>(half);
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;
      const auto ju = static_cast<std::size_t>(j);
      if (f.chunk[ju] != f.chunk[i]) continue;
      for (std::size_t k = 0; k < dim; ++k) {
        const double* w = &v[p.context_weight(tap, k, 0)];
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) acc += w[d] * f.at(ju, d);
        hi[k] += acc;
      }
    }
  }
  return h;
}

}  // namespace

SentenceLogits score(const FeatureMatrix& features, const ScorerParams& params) {
  check_dims(features, params);
  const std::size_t dim = params.dim();
  const auto h = context(features, params);
  const auto& v = params.values();
  SentenceLogits out(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i) {
    double z[2];
    for (std::size_t k = 0; k < 2; ++k) {
      double acc = v[params.head_bias(k)];
      for (std::size_t hh = 0; hh < dim; ++hh) acc += v[params.head_weight(k, hh)] * h[i * dim + hh];
      z[k] = acc;
    }
    out[i] = {z[0], z[1]};
  }
  return out;
}

std::vector<double> score_backward(const FeatureMatrix& features, const ScorerParams& params,
                                   const SentenceLogits& dlogits) {
  check_dims(features, params);
  const std::size_t n = features.rows, dim = params.dim(), half = params.window() / 2;
  const auto h = context(features, params);
  const auto& v = params.values();
  std::vector<double> g(params.size(), 0.0);
  std::vector<double> dh(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double dz[2] = {dlogits[i].z0, dlogits[i].z1};
    if (dz[0] == 0.0 && dz[1] == 0.0) continue;
    for (std::size_t k = 0; k < 2; ++k) {
      g[params.head_bias(k)] += dz[k];
      for (std::size_t hh = 0; hh < dim; ++hh) g[params.head_weight(k, hh)] += dz[k] * h[i * dim + hh];
    }
    for (std::size_t hh = 0; hh < dim; ++hh) {
      dh[hh] = v[params.head_weight(0, hh)] * dz[0] + v[params.head_weight(1, hh)] * dz[1];
      g[params.context_bias(hh)] += dh[hh];
    }
    for (std::size_t tap = 0; tap < params.window(); ++tap) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i + tap) - static_cast<std::ptrdiff_t>(half);
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;
      const auto ju = static_cast<std::size_t>(j);
      if (features.chunk[ju] != features.chunk[i]) continue;
      for (std::size_t hh = 0; hh < dim; ++hh) {
        double* gw = &g[params.context_weight(tap, hh, 0)];
        for (std::size_t d = 0; d < dim; ++d) gw[d] += dh[hh] * features.at(ju, d);
      }
    }
  }
  return g;
}

double select_probability(const LogitPair& z) {
  const double d = z.z1 - z.z0;
  double p;
  if (d >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-d));
  } else {
    const double e = std::exp(d);
    p = e / (1.0 + e);
  }
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(p, lo, hi);
}

namespace {
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
}  // namespace

double log_prob(const LogitPair& z, bool selected) {
  const double d = z.z1 - z.z0;
  return selected ? -softplus(-d) : -softplus(d);
}

namespace {
std::size_t argmax_margin(const SentenceLogits& logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i].z1 - logits[i].z0 > logits[best].z1 - logits[best].z0) best = i;
  }
  return best;
}
}  // namespace

Selection greedy_select(const SentenceLogits& logits) {
  Selection s;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i].z1 > logits[i].z0) s.indices.push_back(i);
  }
  if (s.indices.empty() && !logits.empty()) {
    s.indices.push_back(argmax_margin(logits));
    s.fallback = true;
  }
  return s;
}

SampledSelection sample_select(const SentenceLogits& logits, Rng& rng) {
  SampledSelection s;
  s.outcomes.assign(logits.size(), 0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (rng.uniform() < select_probability(logits[i])) {
      s.outcomes[i] = 1;
      s.indices.push_back(i);
    }
  }
  if (s.indices.empty() && !logits.empty()) {
    const std::size_t best = argmax_margin(logits);
    s.outcomes[best] = 1;
    s.indices.push_back(best);
    s.fallback = true;
  }
  return s;
}

double select_log_prob(const SentenceLogits& logits, const IndexSet& chosen, const IndexSet* mask) {
  double total = 0.0;
  if (mask != nullptr) {
    for (std::size_t i : *mask) total += log_prob(logits.at(i), contains(chosen, i));
    return total;
  }
  for (std::size_t i = 0; i < logits.size(); ++i) total += log_prob(logits[i], contains(chosen, i));
  return total;
}

}  // namespace reflect
