#include <cmath>
#include <sstream>

#include "perfectsim/kernels.hpp"

namespace perfectsim {

namespace {

constexpr std::int64_t kScanCap = 100000000;  // safety bound for T scans

// Euler-Maclaurin tail sum_{x=M}^{inf} (first + x*step)^{-alpha}, with the
// first `explicit_terms` summands taken literally before the expansion.
double power_tail(double first, double step, double alpha, int explicit_terms = 32) {
  double s = 0.0;
  for (int j = 0; j < explicit_terms; ++j) s += std::pow(first + step * j, -alpha);
  const double x = first + step * explicit_terms;
  const double fx = std::pow(x, -alpha);
  s += std::pow(x, 1.0 - alpha) / (step * (alpha - 1.0));  // integral part
  s += 0.5 * fx;
  s += alpha * step * std::pow(x, -alpha - 1.0) / 12.0;
  s -= alpha * (alpha + 1.0) * (alpha + 2.0) * step * step * step * std::pow(x, -alpha - 3.0) / 720.0;
  return s;
}

class ChangepointPinned final : public PinnedEvaluator {
 public:
  explicit ChangepointPinned(const ChangepointBinaryKernel& k) : kernel_(k) {}
  void push(Letter pin) override {
    ++depth_;
    if (pin == 1) ++ones_;
    // Certification is monotone: once the all-zeros completion crosses sigma
    // within the depth, it stays crossed for larger depths.
    if (!certified_ &&
        static_cast<double>(ones_) >= kernel_.sigma() * static_cast<double>(depth_))
      certified_ = true;
  }
  double value() const override {
    if (depth_ == 0) return kernel_.ak_inf(0);
    const double tail = certified_ ? kernel_.gamma_tail(depth_) : kernel_.beta_tail(depth_);
    return 1.0 - kernel_.p1() * kernel_.c() * tail;
  }
  int depth() const override { return depth_; }

 private:
  const ChangepointBinaryKernel& kernel_;
  std::int64_t ones_ = 0;
  int depth_ = 0;
  bool certified_ = false;
};

}  // namespace

ChangepointBinaryKernel::ChangepointBinaryKernel(double p1, double c, double sigma, double alpha)
    : Kernel(Alphabet({"0", "1"})), p1_(p1), c_(c), sigma_(sigma), alpha_(alpha) {
  if (!(p1 > 0.0 && p1 < 1.0)) throw ConfigError("changepoint: p1 must lie in (0,1)");
  if (!(c > 0.0)) throw ConfigError("changepoint: c must be positive");
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("changepoint: sigma must lie in (0,1)");
  if (!(alpha > 1.0 && alpha < 2.0)) throw ConfigError("changepoint: alpha must lie in (1,2)");
  beta_total_ = beta_tail(0);
  if (!(p1 * (1.0 - c * beta_total_) > sigma))
    throw ConfigError("changepoint: p1 (1 - c sum beta) > sigma violated");
  for (std::int64_t i = 1; i <= 64; ++i)
    if (beta(i) < gamma(i)) throw ConfigError("changepoint: beta(i) >= gamma(i) violated");
}

std::string ChangepointBinaryKernel::id() const {
  std::ostringstream os;
  os << "changepoint_binary(p1=" << p1_ << ",c=" << c_ << ",sigma=" << sigma_
     << ",alpha=" << alpha_ << ")";
  return os.str();
}

double ChangepointBinaryKernel::beta(std::int64_t i) const {
  return std::pow(static_cast<double>(i), -alpha_);
}

double ChangepointBinaryKernel::gamma(std::int64_t i) const {
  return std::pow(2.0, -static_cast<double>(i));
}

double ChangepointBinaryKernel::beta_tail(std::int64_t k) const {
  return power_tail(static_cast<double>(k) + 1.0, 1.0, alpha_);
}

double ChangepointBinaryKernel::gamma_tail(std::int64_t k) const {
  return std::pow(2.0, -static_cast<double>(k));
}

double ChangepointBinaryKernel::beta_tail_arith(std::int64_t first, std::int64_t step) const {
  return power_tail(static_cast<double>(first), static_cast<double>(step), alpha_);
}

std::int64_t ChangepointBinaryKernel::decide_T_word(const Word& w) const {
  std::int64_t ones = 0;
  for (int k = 1; k <= w.length(); ++k) {
    ones += w.at_depth(k) == 1;
    if (density_reaches(ones, k)) return k;
  }
  return kInfiniteRun;
}

std::int64_t ChangepointBinaryKernel::decide_T(const HistorySpec& h) const {
  const std::int64_t d = h.explicit_depth();
  std::int64_t ones = 0;
  for (std::int64_t k = 1; k <= d; ++k) {
    ones += h.at_depth(static_cast<int>(k)) == 1;
    if (density_reaches(ones, k)) return k;
  }
  const Tail& tail = h.tail();
  const std::int64_t period = tail.period();
  std::int64_t tail_ones = 0;
  for (int r = 1; r <= period; ++r) tail_ones += tail.at(r) == 1;
  const double rho = static_cast<double>(tail_ones) / static_cast<double>(period);

  std::int64_t bound;
  if (rho > sigma_) {
    // Crossing certain: density tends to rho above sigma.
    bound = static_cast<std::int64_t>(
                std::ceil((static_cast<double>(period) + rho * static_cast<double>(d) -
                           static_cast<double>(ones)) /
                          (rho - sigma_))) +
            period + 2;
  } else if (rho < sigma_) {
    // Beyond the bound the density stays under sigma forever.
    bound = static_cast<std::int64_t>(
                std::ceil((static_cast<double>(ones) - rho * static_cast<double>(d) +
                           static_cast<double>(period)) /
                          (sigma_ - rho))) +
            period + 2;
  } else {
    // Per-period drift is exactly zero, so the excess is periodic: one
    // period decides.
    bound = d + period;
  }
  if (bound > kScanCap)
    throw UnsupportedKernel("changepoint: T decision scan bound exceeded");
  std::int64_t running = ones;
  for (std::int64_t k = d + 1; k <= bound; ++k) {
    running += tail.at(static_cast<int>(k - d)) == 1;
    if (density_reaches(running, k)) return k;
  }
  return kInfiniteRun;
}

// Sum of beta or gamma over the zero positions of the tail part, i >= from.
double ChangepointBinaryKernel::zeros_tail_sum(const HistorySpec& h, std::int64_t from,
                                               bool use_gamma) const {
  const std::int64_t d = h.explicit_depth();
  const Tail& tail = h.tail();
  const std::int64_t period = tail.period();
  double s = 0.0;
  for (int r = 1; r <= period; ++r) {
    if (tail.at(r) != 0) continue;
    std::int64_t i0 = d + r;  // first tail position with this phase
    if (i0 < from) i0 += period * ((from - i0 + period - 1) / period);
    if (use_gamma)
      s += gamma(i0) / (1.0 - std::pow(2.0, -static_cast<double>(period)));
    else
      s += beta_tail_arith(i0, period);
  }
  return s;
}

double ChangepointBinaryKernel::eval(Letter g, const HistorySpec& h) const {
  const std::int64_t d = h.explicit_depth();
  const std::int64_t T = decide_T(h);
  double S = 0.0;
  for (std::int64_t i = 1; i <= d; ++i) {
    if (h.at_depth(static_cast<int>(i)) != 0) continue;
    S += (T == kInfiniteRun || i < T) ? beta(i) : gamma(i);
  }
  if (T == kInfiniteRun) {
    S += zeros_tail_sum(h, d + 1, /*use_gamma=*/false);
  } else if (T <= d) {
    S += zeros_tail_sum(h, d + 1, /*use_gamma=*/true);
  } else {
    for (std::int64_t i = d + 1; i < T; ++i)
      if (h.at_depth(static_cast<int>(i)) == 0) S += beta(i);
    S += zeros_tail_sum(h, T, /*use_gamma=*/true);
  }
  const double p_one = p1_ * (1.0 - c_ * S);
  return g == 1 ? p_one : 1.0 - p_one;
}

double ChangepointBinaryKernel::ak_bound(Letter g, const Word& w) const {
  // Infima are attained at the constant extensions: all-zeros for letter 1,
  // all-ones for letter 0.
  if (g == 1) return eval(1, HistorySpec(w, Tail::constant(0)));
  return 1.0 - eval(1, HistorySpec(w, Tail::constant(1)));
}

double ChangepointBinaryKernel::ak_inf(int k) const {
  return 1.0 - p1_ * c_ * beta_tail(k);
}

double ChangepointBinaryKernel::ak_pinned(const PinnedPattern& pattern) const {
  ChangepointPinned ev(*this);
  for (Letter p : pattern.pins) ev.push(p);
  return ev.value();
}

std::unique_ptr<PinnedEvaluator> ChangepointBinaryKernel::pinned_evaluator() const {
  return std::make_unique<ChangepointPinned>(*this);
}

}  // namespace perfectsim
