#ifndef PERFECTSIM_TEST_HELPERS_HPP
#define PERFECTSIM_TEST_HELPERS_HPP

#include <cstdint>
#include <vector>

#include "perfectsim/kernels.hpp"
#include "perfectsim/randsource.hpp"

namespace testutil {

using namespace perfectsim;

// Deterministic test RNG, independent of the library's source.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}
  std::uint64_t next_u64() {
    std::uint64_t x = state_;
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    return state_ = x;
  }
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  int next_int(int bound) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(bound)); }
  bool next_bool() { return next_u64() & 1; }

 private:
  std::uint64_t state_;
};

// Uniform source patched before a cutoff: at(t) = base for t >= cutoff, alt
// below.  Exercises the stopping-time property of the backward scans.
class PatchedSource final : public UniformSource {
 public:
  PatchedSource(const UniformSource& base, const UniformSource& alt, std::int64_t cutoff)
      : base_(base), alt_(alt), cutoff_(cutoff) {}
  double at(std::int64_t t, std::uint32_t stream = 0) const override {
    return t >= cutoff_ ? base_.at(t, stream) : alt_.at(t, stream);
  }

 private:
  const UniformSource& base_;
  const UniformSource& alt_;
  std::int64_t cutoff_;
};

inline Word random_word(Rng& rng, int letters, int length) {
  std::vector<Letter> v;
  v.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) v.push_back(rng.next_int(letters));
  return Word::most_recent_first(std::move(v));
}

inline HistorySpec random_binary_history(Rng& rng, int recent_len) {
  std::vector<Letter> v;
  for (int i = 0; i < recent_len; ++i) v.push_back(rng.next_int(2));
  Tail tail = rng.next_bool() ? Tail::constant(rng.next_int(2))
                              : Tail::periodic({rng.next_int(2), rng.next_int(2), 1});
  return HistorySpec(Word::most_recent_first(std::move(v)), tail);
}

// The acceptance-criterion walk kernel: 3 letters, arcs {(w,g): g != w},
// history-modulated on-arc probabilities within [0.2, 0.8].
inline GeneralizedWalkKernel::Params triangle_walk_params(int memory = 0) {
  GeneralizedWalkKernel::Params p;
  p.alphabet = Alphabet::indexed(3);
  p.arcs.assign(3, std::vector<bool>(3, true));
  for (int i = 0; i < 3; ++i) p.arcs[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = false;
  p.p_low = {{0.0, 0.7, 0.3}, {0.7, 0.0, 0.3}, {0.7, 0.3, 0.0}};
  p.p_high = {{0.0, 0.3, 0.7}, {0.3, 0.0, 0.7}, {0.3, 0.7, 0.0}};
  p.omega = 0.5;
  p.memory = memory;
  return p;
}

}  // namespace testutil

#endif
