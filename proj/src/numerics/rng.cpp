#include "gradlore/numerics/rng.hpp"

#include "gradlore/error.hpp"

#include <cmath>
#include <numbers>

namespace gradlore {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) word = splitmix64(x);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (stream * 0xD1B54A32D192ED03ULL);
  splitmix64(x);
  return Rng(splitmix64(x));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double a, double b) { return a + (b - a) * uniform01(); }

double Rng::normal(double mean, double stddev) {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::BadParams, "Rng::below: n must be positive");
  const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

Sampled sample(Rng rng, const Distribution& dist, std::size_t n) {
  std::vector<double> out(n);
  if (const auto* nd = std::get_if<NormalDist>(&dist)) {
    if (!(nd->stddev > 0.0)) throw Error(ErrorCode::BadParams, "sample: normal stddev must be > 0");
    for (auto& v : out) v = rng.normal(nd->mean, nd->stddev);
  } else {
    const auto& ud = std::get<UniformDist>(dist);
    if (!(ud.lo < ud.hi)) throw Error(ErrorCode::BadParams, "sample: uniform requires lo < hi");
    for (auto& v : out) v = rng.uniform(ud.lo, ud.hi);
  }
  return {std::move(out), rng};
}

}  // namespace gradlore
