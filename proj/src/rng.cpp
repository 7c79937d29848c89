#include "snls/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace snls {

RandomStream::RandomStream(const StateWords& words) : s_(words) {
  if (s_[0] == 0 && s_[1] == 0 && s_[2] == 0 && s_[3] == 0) {
    s_[0] = 0x9e3779b97f4a7c15ULL;  // all-zero is the one forbidden state
  }
}

RandomStream RandomStream::derive(std::uint64_t master_seed, StreamRole role,
                                  std::uint64_t index) {
  std::uint64_t x = master_seed;
  std::uint64_t key = splitmix64(x);
  x = key ^ (static_cast<std::uint64_t>(role) * 0xd1b54a32d192ed03ULL);
  key = splitmix64(x);
  x = key ^ (index * 0x8cb92ba72f3d8dd7ULL + 0x632be59bd9b4e019ULL);
  StateWords words{};
  for (auto& w : words) w = splitmix64(x);
  return RandomStream(words);
}

RandomStream::result_type RandomStream::operator()() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double RandomStream::uniform() {
  // 53 random mantissa bits, shifted into (0, 1].
  return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
}

double RandomStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace snls
