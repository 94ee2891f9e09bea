#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace gradlore {

/// xoshiro256** seeded through splitmix64. The stream for a given seed is
/// fixed by the constants below and never changes within `kAlgorithm`.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256ss-splitmix64-v1";

  explicit Rng(std::uint64_t seed = 0);

  /// Independent stream for (seed, stream) pairs; used to give every seed,
  /// trial or candidate its own generator.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double a, double b);
  /// Box-Muller, cosine branch only; two uniforms per draw.
  double normal(double mean = 0.0, double stddev = 1.0);
  /// Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_;
};

struct NormalDist {
  double mean = 0.0;
  double stddev = 1.0;
};

struct UniformDist {
  double lo = 0.0;
  double hi = 1.0;
};

using Distribution = std::variant<NormalDist, UniformDist>;

struct Sampled {
  std::vector<double> values;
  Rng next;  ///< generator state after drawing `values`
};

/// Draws n values without touching `rng`; the advanced state is returned.
/// Throws BadParams on stddev <= 0 or lo >= hi.
Sampled sample(Rng rng, const Distribution& dist, std::size_t n);

}  // namespace gradlore
