#ifndef PERFECTSIM_COUPLING_HPP
#define PERFECTSIM_COUPLING_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "perfectsim/kernel.hpp"

namespace perfectsim {

// Floating-point noise tolerance for band increments: more negative values
// signal an invalid ak_bound and are hard errors.
constexpr double kIncrementClip = 1e-9;
constexpr int kDefaultDepthCap = 1000000;

struct BandSegment {
  Letter letter;
  double lo, hi;  // [lo, hi)
};

struct Band {
  int k = 0;  // number of past letters the band reads
  double lo = 0.0, hi = 0.0;
  std::vector<BandSegment> segments;  // ascending letter, left-packed
};

// The interval partition of [0, a_d(w)) realizing the coupling function up
// to depth d, for the word w read from a history.
struct BandLayout {
  Word word;
  std::vector<Band> bands;  // bands[k] reads k letters

  // Total measure assigned to g through depth d (sum of segment lengths).
  double letter_measure(Letter g) const;
  double coverage() const { return bands.empty() ? 0.0 : bands.back().hi; }
};

BandLayout build_layout(const Kernel& kernel, const HistorySpec& h, int depth);

// CSV dump: rows k,letter,start,end with 17-significant-digit endpoints.
void dump_layout_csv(const BandLayout& layout, std::ostream& os);

struct FResult {
  Letter letter;
  int depth_used;  // band index = past letters actually read
};

// Evaluate the coupling function f(u | h): the letter whose band
// sub-interval contains u.  Boundaries resolve rightward ([c,d)).
FResult eval_f(const Kernel& kernel, double u, const HistorySpec& h,
               int depth_cap = kDefaultDepthCap);

// Forward trajectory f^(1),...,f^(n): us is most-recent-first (us.back() is
// consumed first).  Returns the produced word, most recent first.
Word iterate_f(const Kernel& kernel, std::span<const double> us, const HistorySpec& h,
               int depth_cap = kDefaultDepthCap);

// The nondecreasing global sequence a_k with a lazily extended cache.  The
// cache is not synchronized: use one instance per run (they are cheap).
class AkSequence {
 public:
  explicit AkSequence(const Kernel& kernel, int prefill = 64);
  explicit AkSequence(const Kernel&& kernel, int prefill = 64) = delete;  // no temporaries

  const Kernel& kernel() const { return *kernel_; }
  double at(int k) const;

  // K(u) = least k with a_k > u; throws DepthCapExceeded when the sequence
  // does not pass u within the cap.
  int depth_K(double u, int depth_cap = kDefaultDepthCap) const;

 private:
  const Kernel* kernel_;
  mutable std::vector<double> values_;
};

struct ConditionsReport {
  int n_max = 0;
  double partial_sum = 0.0;        // S_n = sum_{k<=n} prod_{j<=k} a_j
  double partial_product = 0.0;    // P_n = prod_{j<=n} a_j
  double log_partial_product = 0.0;
  double partial_sum_from1 = 0.0;  // products starting at j = 1 (markovian-regime variant)
  double tail_ratio = 0.0;         // (S_n - S_{n/2}) / S_n
  double tail_ratio_from1 = 0.0;
  bool condition_a_diverges = false;  // heuristic verdict on the tail ratio
  bool condition_b_positive = false;  // P_n bounded away from 0 at n_max
  bool condition_i_diverges = false;  // same heuristic for the j>=1 products
  bool heuristic = true;              // finite-horizon verdicts only
};

ConditionsReport check_conditions(const AkSequence& a_seq, int n_max);

}  // namespace perfectsim

#endif
