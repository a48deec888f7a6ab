#ifndef NATS_RNG_HPP
#define NATS_RNG_HPP

#include <cstdint>
#include <random>

namespace nats {

// Fixed stream ids so every component draws from its own engine and runs
// stay reproducible no matter which modules are active.
enum : std::uint64_t {
  kStreamWorld = 0,   // ground-truth generation
  kStreamBus = 1,     // message drops and delays
  kStreamAgent0 = 2,  // agent j uses kStreamAgent0 + j
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive an independent engine seed from (master seed, stream id).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t state = master ^ (0x2545f4914f6cdd1dULL * (stream + 1));
  std::uint64_t s = splitmix64(state);
  return splitmix64(state) ^ s;
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
  return std::mt19937_64(derive_seed(master, stream));
}

/// |N(0, sigma^2)| draw; sigma^2 == 0 yields exactly 0.
inline double half_normal(double variance, std::mt19937_64& rng) {
  if (variance <= 0.0) return 0.0;
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance));
  double n = gauss(rng);
  return n < 0.0 ? -n : n;
}

}  // namespace nats

#endif  // NATS_RNG_HPP
