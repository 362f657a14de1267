#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reflect {

// Sorted, duplicate-free sentence indices. Every function that returns an
// IndexSet keeps it sorted ascending (original document order).
using IndexSet = std::vector<std::size_t>;

IndexSet make_index_set(std::vector<std::size_t> raw);
IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
IndexSet set_symmetric_difference(const IndexSet& a, const IndexSet& b);
bool contains(const IndexSet& s, std::size_t i);
IndexSet all_indices(std::size_t n);

// Error taxonomy; the CLI maps each kind to an exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ExternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void warn(std::string_view message);
// Redirects warnings (tests capture them); nullptr restores stderr.
using WarnSink = void (*)(std::string_view);
void set_warn_sink(WarnSink sink);

// xoshiro256** seeded through splitmix64. Draws are derived here rather than
// through <random> distributions, whose outputs vary between standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  double uniform();  // [0, 1), 53-bit resolution
  double normal();   // Box-Muller
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_[4];
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(std::string_view s);
// Stream seed for one (seed, key, epoch) triple; independent of thread layout.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t epoch);

}  // namespace reflect
