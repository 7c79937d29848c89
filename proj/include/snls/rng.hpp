#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace snls {

/// Consumers of randomness. Every stream is keyed by (master seed, role, index)
/// so that no two consumers ever share a stream.
enum class StreamRole : std::uint64_t {
  path = 1,
  sync_pair = 2,
  birkhoff = 3,
  gn_restart = 4,
  corpus_fit = 5,
  corpus_holdout = 6,
  initial_condition = 7,
  corpus_refine = 8,
};

/// SplitMix64 finalizer; used only for seeding.
constexpr std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** generator. The full state is four 64-bit words, which is what
/// checkpoints persist. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;
  static constexpr std::size_t kStateWords = 4;
  using StateWords = std::array<std::uint64_t, kStateWords>;

  RandomStream() : RandomStream(derive(0, StreamRole::path, 0)) {}
  explicit RandomStream(const StateWords& words);

  /// Independent stream for (master seed, role, index).
  static RandomStream derive(std::uint64_t master_seed, StreamRole role, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform double in (0, 1].
  double uniform();
  /// Standard normal via Box-Muller; one call consumes two raw draws and
  /// nothing is cached, so the four state words are the whole state.
  double normal();

  const StateWords& state() const { return s_; }

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  StateWords s_;
};

}  // namespace snls
