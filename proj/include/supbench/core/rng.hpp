#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace supbench::rng {

// Derives an independent stream seed from a root seed and a stream name.
// Every consumer of randomness (weight init, shuffles, latent noise, scene
// synthesis, ...) opens its own named stream so that runs stay reproducible
// and streams stay decorrelated when code adds or removes draws elsewhere.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);

// Deterministic random stream. mt19937_64 output is pinned by the C++
// standard and uniform/normal below are built from raw 64-bit draws, so the
// byte stream is identical across platforms and standard libraries.
class Stream {
 public:
  Stream(std::uint64_t root, std::string_view name)
      : engine_(derive_seed(root, name)) {}
  explicit Stream(std::uint64_t raw_seed) : engine_(raw_seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Knuth's Poisson sampler; adequate for the small rates used here.
  int poisson(double rate);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace supbench::rng
