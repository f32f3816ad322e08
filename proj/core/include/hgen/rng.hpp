#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace hgen {

/// Deterministic random stream. Wraps std::mt19937_64 but generates
/// doubles with fixed bit-level mappings so results are identical across
/// standard library implementations. State round-trips through strings.
class Rng {
 public:
  Rng() : engine_(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Mixes a seed with a tag and indices into a decorrelated stream seed,
  /// so per-component streams do not depend on construction order.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag,
                              std::uint64_t i = 0, std::uint64_t j = 0);

  /// Uniform in [0, 1).
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached spare, keeps state minimal).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);

  std::uint64_t next_u64() { return engine_(); }

  std::string serialize() const;
  static Rng deserialize(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace hgen
