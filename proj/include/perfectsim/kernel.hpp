#ifndef PERFECTSIM_KERNEL_HPP
#define PERFECTSIM_KERNEL_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "perfectsim/alphabet.hpp"
#include "perfectsim/errors.hpp"

namespace perfectsim {

constexpr Letter kNoPin = -1;

// Partial pinning of the positions -1..-depth: pins[k-1] is the letter forced
// at position -k, or kNoPin.  Pins arise from band-0 hits of the uniforms.
struct PinnedPattern {
  int depth = 0;
  std::vector<Letter> pins;

  void push(Letter pin_or_none) {
    pins.push_back(pin_or_none);
    ++depth;
  }
};

// Incremental evaluator for the pinned infimum A_h: push() extends the
// pattern one position deeper, value() returns A_depth.  Kernels provide
// O(1)-per-push implementations; the depth scans in the adaptive sampler and
// the regeneration diagnostics are linear because of this.
class PinnedEvaluator {
 public:
  virtual ~PinnedEvaluator() = default;
  virtual void push(Letter pin_or_none) = 0;
  virtual double value() const = 0;
  virtual int depth() const = 0;
};

// Conditional kernel p(g | past) together with its closed-form infimum
// bounds.  The bounds are part of the interface rather than computed by
// search: the infima range over uncountably many extensions and are only
// tractable in closed form.  Implementations are immutable and reentrant.
class Kernel {
 public:
  virtual ~Kernel() = default;

  const Alphabet& alphabet() const { return alphabet_; }
  virtual std::string id() const = 0;

  // Exact conditional probability p(g | h).  Throws InadmissibleHistory.
  virtual double eval(Letter g, const HistorySpec& h) const = 0;

  // a_k(g | w) with k = w.length(); k = 0 gives a_0(g).  The word must be an
  // admissible prefix.
  virtual double ak_bound(Letter g, const Word& w) const = 0;

  // Global infimum a_k over all admissible histories.
  virtual double ak_inf(int k) const = 0;

  // Pinned infimum A_h over the histories matching the pattern.
  virtual bool supports_pinned() const { return false; }
  virtual double ak_pinned(const PinnedPattern&) const {
    throw UnsupportedKernel(id() + ": no pinned infimum bound");
  }
  virtual std::unique_ptr<PinnedEvaluator> pinned_evaluator() const {
    throw UnsupportedKernel(id() + ": no pinned infimum bound");
  }

  // Forbidden-word oracle: true iff p(g | z) = 0 for every history z whose
  // recent word equals w.  The default asserts "no forbidden words".
  virtual bool uniformly_null(Letter /*g*/, const Word& /*w*/) const { return false; }
  virtual bool all_histories_admissible() const { return true; }
  virtual bool history_admissible(const HistorySpec& /*h*/) const { return true; }

  // Exact finite memory, when the kernel certifies one: eval depends only on
  // the last m letters.
  virtual std::optional<int> finite_memory_order() const { return std::nullopt; }
  virtual double eval_word(Letter /*g*/, const Word& /*w*/) const {
    throw NotFiniteMemory(id() + ": eval_word requires a certified finite memory");
  }

  double ak_word_total(const Word& w) const {
    double s = 0.0;
    for (Letter g = 0; g < alphabet().size(); ++g) s += ak_bound(g, w);
    return s;
  }

 protected:
  explicit Kernel(Alphabet a) : alphabet_(std::move(a)) {}
  Kernel(const Kernel&) = default;

 private:
  Alphabet alphabet_;
};

}  // namespace perfectsim

#endif
