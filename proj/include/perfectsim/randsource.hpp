#ifndef PERFECTSIM_RANDSOURCE_HPP
#define PERFECTSIM_RANDSOURCE_HPP

#include <cstdint>

namespace perfectsim {

// Index-addressable uniform randomness.  Backward-coalescence scans consume
// U_0, U_-1, ... lazily and window sampling revisits indices, so the
// generator is counter-based (stateless): the value at (seed, time t,
// stream) is a pure function of the key.  Stream 0 is the main sequence
// U_t; streams 1..|G| carry the per-state uniforms of the vectorized
// coupling.
struct RandomKey {
  std::uint64_t seed = 0;
  std::int64_t time_index = 0;
  std::uint32_t stream = 0;
};

// Zig-zag bijection Z -> N: 0,-1,1,-2,2,... -> 0,1,2,3,4,...
constexpr std::uint64_t encode_index(std::int64_t t) {
  return t >= 0 ? 2ull * static_cast<std::uint64_t>(t)
                : 2ull * static_cast<std::uint64_t>(-(t + 1)) + 1ull;
}

constexpr std::int64_t decode_index(std::uint64_t c) {
  return (c & 1ull) ? -static_cast<std::int64_t>(c >> 1) - 1
                    : static_cast<std::int64_t>(c >> 1);
}

// Philox2x64-10 block output (both lanes), exposed for tests.
void philox2x64(std::uint64_t counter0, std::uint64_t counter1, std::uint64_t key,
                std::uint64_t out[2]);

// Uniform in [0,1) with 53-bit resolution; never returns 1.0.
double uniform(const RandomKey& key);

// Abstract indexable source.  Samplers are written against this so that
// tests can splice streams (pre-tau perturbation, shifts) without touching
// the algorithms.
class UniformSource {
 public:
  virtual ~UniformSource() = default;
  virtual double at(std::int64_t t, std::uint32_t stream = 0) const = 0;
};

class SeededSource final : public UniformSource {
 public:
  explicit SeededSource(std::uint64_t seed) : seed_(seed) {}
  double at(std::int64_t t, std::uint32_t stream = 0) const override {
    return uniform(RandomKey{seed_, t, stream});
  }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// View of `base` with time indices shifted by `offset`: at(t) = base(t + offset).
class ShiftedSource final : public UniformSource {
 public:
  ShiftedSource(const UniformSource& base, std::int64_t offset)
      : base_(base), offset_(offset) {}
  double at(std::int64_t t, std::uint32_t stream = 0) const override {
    return base_.at(t + offset_, stream);
  }

 private:
  const UniformSource& base_;
  std::int64_t offset_;
};

// Counts draws; used to report uniforms_consumed.
class CountingSource final : public UniformSource {
 public:
  explicit CountingSource(const UniformSource& base) : base_(base) {}
  double at(std::int64_t t, std::uint32_t stream = 0) const override {
    ++count_;
    return base_.at(t, stream);
  }
  std::uint64_t count() const { return count_; }

 private:
  const UniformSource& base_;
  mutable std::uint64_t count_ = 0;
};

}  // namespace perfectsim

#endif
