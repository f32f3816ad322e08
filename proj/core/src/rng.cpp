#include "hgen/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hgen/error.hpp"

namespace hgen {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t tag,
                          std::uint64_t i, std::uint64_t j) {
  std::uint64_t h = mix64(seed ^ mix64(tag));
  h = mix64(h ^ mix64(i + 1));
  h = mix64(h ^ mix64(j + 1));
  return h;
}

double Rng::uniform() {
  // 53 high bits -> [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // u1 in (0, 1] so log is finite
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) return 0;
  // rejection sampling to avoid modulo bias
  std::uint64_t limit = ~0ULL - (~0ULL % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::string Rng::serialize() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

Rng Rng::deserialize(const std::string& state) {
  Rng r;
  std::istringstream in(state);
  in >> r.engine_;
  if (!in) throw ParseError("rng: bad serialized engine state");
  return r;
}

}  // namespace hgen
