#include "perfectsim/coupling.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace perfectsim {

namespace {

// Clip a band increment; anything below the clip threshold indicates an
// inconsistent ak_bound.
double clip_increment(double inc, int k, Letter g) {
  if (inc < -kIncrementClip) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "band increment b_%d(g=%d) = %.3e < -%.0e", k,
                  static_cast<int>(g), inc, kIncrementClip);
    throw NegativeIncrement(buf);
  }
  return inc < 0.0 ? 0.0 : inc;
}

}  // namespace

double BandLayout::letter_measure(Letter g) const {
  double total = 0.0;
  for (const Band& band : bands)
    for (const BandSegment& seg : band.segments)
      if (seg.letter == g) total += seg.hi - seg.lo;
  return total;
}

BandLayout build_layout(const Kernel& kernel, const HistorySpec& h, int depth) {
  const int n = kernel.alphabet().size();
  BandLayout layout;
  std::vector<double> prev(static_cast<std::size_t>(n), 0.0);
  Word word;
  double cursor = 0.0;
  for (int k = 0; k <= depth; ++k) {
    if (k > 0) word.extend_past(h.at_depth(k));
    Band band;
    band.k = k;
    band.lo = cursor;
    for (Letter g = 0; g < n; ++g) {
      const double ak = kernel.ak_bound(g, word);
      const double inc = clip_increment(ak - prev[static_cast<std::size_t>(g)], k, g);
      prev[static_cast<std::size_t>(g)] = ak;
      if (inc > 0.0) {
        band.segments.push_back(BandSegment{g, cursor, cursor + inc});
        cursor += inc;
      }
    }
    band.hi = cursor;
    // gross violations only: fine discrepancies are the measure audit's job
    if (cursor > 1.0 + 1e-5)
      throw NormalizationError("band layout exceeds the unit interval");
    layout.bands.push_back(std::move(band));
  }
  layout.word = std::move(word);
  return layout;
}

void dump_layout_csv(const BandLayout& layout, std::ostream& os) {
  os << "k,letter,start,end\n";
  char buf[64];
  for (const Band& band : layout.bands) {
    for (const BandSegment& seg : band.segments) {
      os << band.k << ',' << seg.letter << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", seg.lo);
      os << buf << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", seg.hi);
      os << buf << '\n';
    }
  }
}

FResult eval_f(const Kernel& kernel, double u, const HistorySpec& h, int depth_cap) {
  const int n = kernel.alphabet().size();
  std::vector<double> prev(static_cast<std::size_t>(n), 0.0);
  Word word;
  double cursor = 0.0;
  for (int k = 0; k <= depth_cap; ++k) {
    if (k > 0) word.extend_past(h.at_depth(k));
    for (Letter g = 0; g < n; ++g) {
      const double ak = kernel.ak_bound(g, word);
      const double inc = clip_increment(ak - prev[static_cast<std::size_t>(g)], k, g);
      prev[static_cast<std::size_t>(g)] = ak;
      cursor += inc;
      if (u < cursor) return FResult{g, k};
    }
  }
  throw DepthCapExceeded("eval_f: a_d(w) <= u at the depth cap");
}

Word iterate_f(const Kernel& kernel, std::span<const double> us, const HistorySpec& h,
               int depth_cap) {
  HistorySpec cur = h;
  for (std::size_t i = us.size(); i-- > 0;)
    cur.push_recent(eval_f(kernel, us[i], cur, depth_cap).letter);
  return cur.prefix(static_cast<int>(us.size()));
}

AkSequence::AkSequence(const Kernel& kernel, int prefill) : kernel_(&kernel) {
  values_.reserve(static_cast<std::size_t>(prefill));
  for (int k = 0; k < prefill; ++k) values_.push_back(kernel_->ak_inf(k));
}

double AkSequence::at(int k) const {
  while (static_cast<int>(values_.size()) <= k)
    values_.push_back(kernel_->ak_inf(static_cast<int>(values_.size())));
  return values_[static_cast<std::size_t>(k)];
}

int AkSequence::depth_K(double u, int depth_cap) const {
  // a_k is nondecreasing, so scan in widening steps then binary-search the
  // first index with a_k > u.
  if (at(0) > u) return 0;
  int lo = 0, hi = 1;
  while (at(hi) <= u) {
    lo = hi;
    hi *= 2;
    if (hi > depth_cap) {
      if (at(depth_cap) <= u) throw DepthCapExceeded("depth_K: a_k <= u at the depth cap");
      hi = depth_cap;
      break;
    }
  }
  while (lo + 1 < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (at(mid) > u)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

ConditionsReport check_conditions(const AkSequence& a_seq, int n_max) {
  ConditionsReport rep;
  rep.n_max = n_max;
  double prod = 1.0, sum = 0.0, logp = 0.0;
  double prod1 = 1.0, sum1 = 0.0;
  double sum_half = 0.0, sum1_half = 0.0;
  const int half = n_max / 2;
  for (int k = 0; k <= n_max; ++k) {
    const double a = a_seq.at(k);
    prod *= a;
    sum += prod;
    logp += std::log(a > 0.0 ? a : 1e-300);
    if (k >= 1) {
      prod1 *= a;
      sum1 += prod1;
    }
    if (k == half) {
      sum_half = sum;
      sum1_half = sum1;
    }
  }
  rep.partial_sum = sum;
  rep.partial_product = prod;
  rep.log_partial_product = logp;
  rep.partial_sum_from1 = sum1;
  rep.tail_ratio = sum > 0.0 ? (sum - sum_half) / sum : 0.0;
  rep.tail_ratio_from1 = sum1 > 0.0 ? (sum1 - sum1_half) / sum1 : 0.0;
  rep.condition_a_diverges = rep.tail_ratio > 0.01;
  rep.condition_b_positive = prod > 1e-6;
  rep.condition_i_diverges = rep.tail_ratio_from1 > 0.01;
  rep.heuristic = true;
  return rep;
}

}  // namespace perfectsim
