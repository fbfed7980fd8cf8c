#include "perfectsim/randsource.hpp"

namespace perfectsim {

namespace {

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ull;
constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

}  // namespace

void philox2x64(std::uint64_t c0, std::uint64_t c1, std::uint64_t key, std::uint64_t out[2]) {
  std::uint64_t x0 = c0, x1 = c1, k = key;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi, lo;
    mulhilo(kPhiloxM, x0, hi, lo);
    x0 = hi ^ k ^ x1;
    x1 = lo;
    k += kWeyl;
  }
  out[0] = x0;
  out[1] = x1;
}

double uniform(const RandomKey& key) {
  std::uint64_t out[2];
  philox2x64(encode_index(key.time_index), static_cast<std::uint64_t>(key.stream), key.seed, out);
  // Top 53 bits -> [0,1); 1.0 is unreachable.
  return static_cast<double>(out[0] >> 11) * 0x1.0p-53;
}

}  // namespace perfectsim
