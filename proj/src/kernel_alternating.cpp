#include <algorithm>
#include <cmath>
#include <sstream>

#include "perfectsim/kernels.hpp"

namespace perfectsim {

namespace {

Alphabet sign_alphabet() { return Alphabet({"-1", "+1"}); }

class ArPinned final : public PinnedEvaluator {
 public:
  explicit ArPinned(const AlternatingRenewalKernel& k) : kernel_(k) {}
  void push(Letter pin) override {
    if (pin == 0) seen_minus_ = true;
    if (pin == 1) seen_plus_ = true;
    ++depth_;
  }
  double value() const override {
    if (depth_ == 0) return kernel_.ak_inf(0);
    if (seen_minus_ && seen_plus_) return 1.0;
    // The infimum is attained on constant words; only signs matching every
    // pin admit one.
    double v = 1.0;
    for (Letter i = 0; i < 2; ++i) {
      const bool blocked = (i == 0 && seen_plus_) || (i == 1 && seen_minus_);
      if (blocked) continue;
      v = std::min(v, 1.0 - (kernel_.suffix_sup(i, depth_) - kernel_.suffix_inf(i, depth_)));
    }
    return v;
  }
  int depth() const override { return depth_; }

 private:
  const AlternatingRenewalKernel& kernel_;
  bool seen_minus_ = false, seen_plus_ = false;
  int depth_ = 0;
};

}  // namespace

AlternatingRenewalKernel::AlternatingRenewalKernel(bool sqrt_rule, Params p)
    : Kernel(sign_alphabet()), sqrt_rule_(sqrt_rule), params_(std::move(p)) {
  if (!sqrt_rule_) {
    if (params_.survival_minus.size() != params_.survival_plus.size())
      throw ConfigError("alternating renewal: survival tables must have equal length");
    for (int i = 0; i < 2; ++i) {
      const auto& table = i == 0 ? params_.survival_minus : params_.survival_plus;
      const double limit = i == 0 ? params_.limit_minus : params_.limit_plus;
      for (double v : table)
        if (!(v > 0.0 && v < 1.0)) throw ConfigError("alternating renewal: rates must lie in (0,1)");
      if (!(limit > 0.0 && limit < 1.0))
        throw ConfigError("alternating renewal: limit rate must lie in (0,1)");
      // suffix min/max over {table[k-1..m-1]} united with the limit value
      const int m = static_cast<int>(table.size());
      suffix_min_[i].assign(static_cast<std::size_t>(m) + 1, limit);
      suffix_max_[i].assign(static_cast<std::size_t>(m) + 1, limit);
      for (int k = m; k >= 1; --k) {
        suffix_min_[i][static_cast<std::size_t>(k - 1)] =
            std::min(table[static_cast<std::size_t>(k - 1)], suffix_min_[i][static_cast<std::size_t>(k)]);
        suffix_max_[i][static_cast<std::size_t>(k - 1)] =
            std::max(table[static_cast<std::size_t>(k - 1)], suffix_max_[i][static_cast<std::size_t>(k)]);
      }
    }
  }
}

AlternatingRenewalKernel AlternatingRenewalKernel::table(Params p) {
  return AlternatingRenewalKernel(false, std::move(p));
}

AlternatingRenewalKernel AlternatingRenewalKernel::table_symmetric(std::vector<double> survival,
                                                                   double limit) {
  Params p;
  p.survival_minus = survival;
  p.survival_plus = std::move(survival);
  p.limit_minus = p.limit_plus = limit;
  return table(std::move(p));
}

AlternatingRenewalKernel AlternatingRenewalKernel::slow_sqrt() {
  return AlternatingRenewalKernel(true, Params{});
}

std::string AlternatingRenewalKernel::id() const {
  if (sqrt_rule_) return "alternating_renewal(slow_sqrt)";
  std::ostringstream os;
  os << "alternating_renewal(m=" << params_.survival_minus.size() << ")";
  return os.str();
}

double AlternatingRenewalKernel::survival(Letter i, int run) const {
  if (sqrt_rule_) {
    if (run == kInfiniteRun) return 0.5;
    return 0.5 * (1.0 - 1.0 / std::sqrt(static_cast<double>(run) + 1.0));
  }
  const auto& table = i == 0 ? params_.survival_minus : params_.survival_plus;
  const double limit = i == 0 ? params_.limit_minus : params_.limit_plus;
  if (run == kInfiniteRun || run > static_cast<int>(table.size())) return limit;
  return table[static_cast<std::size_t>(run - 1)];
}

double AlternatingRenewalKernel::suffix_inf(Letter i, int k) const {
  if (sqrt_rule_) return survival(i, k);  // increasing in the run length
  const int m = static_cast<int>(params_.survival_minus.size());
  if (k > m) return i == 0 ? params_.limit_minus : params_.limit_plus;
  return suffix_min_[i][static_cast<std::size_t>(k - 1)];
}

double AlternatingRenewalKernel::suffix_sup(Letter i, int k) const {
  if (sqrt_rule_) return 0.5;  // limit value, attained at the infinite run
  const int m = static_cast<int>(params_.survival_minus.size());
  if (k > m) return i == 0 ? params_.limit_minus : params_.limit_plus;
  return suffix_max_[i][static_cast<std::size_t>(k - 1)];
}

int AlternatingRenewalKernel::run_length(const HistorySpec& h) const {
  const Letter i = h.at_depth(1);
  const int bound = h.explicit_depth() + h.tail().period() + 1;
  for (int j = 2; j <= bound; ++j)
    if (h.at_depth(j) != i) return j - 1;
  return kInfiniteRun;
}

double AlternatingRenewalKernel::eval(Letter g, const HistorySpec& h) const {
  const Letter i = h.at_depth(1);
  const double s = survival(i, run_length(h));
  return g == i ? s : 1.0 - s;
}

double AlternatingRenewalKernel::ak_bound(Letter g, const Word& w) const {
  const int k = w.length();
  if (k == 0) {
    const Letter other = 1 - g;
    return std::min(suffix_inf(g, 1), 1.0 - suffix_sup(other, 1));
  }
  const Letter i = w.at_depth(1);
  for (int j = 2; j <= k; ++j) {
    if (w.at_depth(j) != i) {  // run length determined by the word
      const double s = survival(i, j - 1);
      return g == i ? s : 1.0 - s;
    }
  }
  // Constant word: the run length of any extension is >= k.
  return g == i ? suffix_inf(i, k) : 1.0 - suffix_sup(i, k);
}

double AlternatingRenewalKernel::ak_inf(int k) const {
  if (k == 0) return ak_bound(0, {}) + ak_bound(1, {});
  return 1.0 - std::max(oscillation(0, k), oscillation(1, k));
}

double AlternatingRenewalKernel::ak_pinned(const PinnedPattern& pattern) const {
  ArPinned ev(*this);
  for (Letter p : pattern.pins) ev.push(p);
  return ev.value();
}

std::unique_ptr<PinnedEvaluator> AlternatingRenewalKernel::pinned_evaluator() const {
  return std::make_unique<ArPinned>(*this);
}

std::optional<int> AlternatingRenewalKernel::finite_memory_order() const {
  if (sqrt_rule_) return std::nullopt;
  return static_cast<int>(params_.survival_minus.size()) + 1;
}

double AlternatingRenewalKernel::eval_word(Letter g, const Word& w) const {
  const Letter i = w.at_depth(1);
  int run = kInfiniteRun;  // run length at least w.length(): table is constant there
  for (int j = 2; j <= w.length(); ++j) {
    if (w.at_depth(j) != i) {
      run = j - 1;
      break;
    }
  }
  if (run == kInfiniteRun) run = w.length();
  const double s = survival(i, run);
  return g == i ? s : 1.0 - s;
}

}  // namespace perfectsim
