#include "perfectsim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "perfectsim/coupling.hpp"
#include "perfectsim/samplers.hpp"

namespace perfectsim {

namespace {

constexpr double kStationaryResidual = 1e-12;
constexpr int kDenseSolveLimit = 512;

// Enumerate admissible words of the given length, most-recent-first.
void enumerate_words(const Kernel& kernel, int length, Word& scratch,
                     std::vector<Word>& out) {
  if (scratch.length() == length) {
    out.push_back(scratch);
    return;
  }
  for (Letter g = 0; g < kernel.alphabet().size(); ++g) {
    Word next = scratch;
    next.extend_past(g);
    // extending into the past keeps the suffix set; prune forbidden prefixes
    if (is_admissible_prefix(next, kernel)) enumerate_words(kernel, length, next, out);
  }
}

std::vector<double> power_iteration(const std::vector<std::vector<double>>& P,
                                    double* residual_out) {
  const std::size_t n = P.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
  double residual = 1.0;
  for (int it = 0; it < 200000 && residual > kStationaryResidual; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * P[i][j];
    residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) residual += std::abs(next[j] - pi[j]);
    pi.swap(next);
  }
  if (residual_out) *residual_out = residual;
  return pi;
}

// Solve pi P = pi, sum pi = 1 by Gaussian elimination on (P^T - I) with the
// last row replaced by the normalization.
std::vector<double> dense_stationary(const std::vector<std::vector<double>>& P) {
  const std::size_t n = P.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A[i][j] = P[j][i] - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) A[n - 1][j] = 1.0;
  A[n - 1][n] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    if (std::abs(A[col][col]) < 1e-14) continue;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      for (std::size_t j = col; j <= n; ++j) A[r][j] -= f * A[col][j];
    }
  }
  std::vector<double> pi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    pi[i] = std::abs(A[i][i]) < 1e-14 ? 0.0 : A[i][n] / A[i][i];
  double s = 0.0;
  for (double v : pi) s += std::max(v, 0.0);
  for (auto& v : pi) v = std::max(v, 0.0) / s;
  return pi;
}

}  // namespace

TruncatedChainOracle TruncatedChainOracle::build(const Kernel& kernel) {
  const auto order = kernel.finite_memory_order();
  if (!order) throw NotFiniteMemory(kernel.id() + ": no certified finite memory");
  TruncatedChainOracle o;
  o.memory_ = *order;
  o.letters_ = kernel.alphabet().size();
  Word scratch;
  enumerate_words(kernel, o.memory_, scratch, o.states_);
  for (int i = 0; i < static_cast<int>(o.states_.size()); ++i)
    o.index_[o.states_[static_cast<std::size_t>(i)]] = i;

  const std::size_t ns = o.states_.size();
  o.transition_.assign(ns, std::vector<double>(ns, 0.0));
  for (std::size_t si = 0; si < ns; ++si) {
    const Word& s = o.states_[si];
    double row = 0.0;
    for (Letter g = 0; g < o.letters_; ++g) {
      const double p = kernel.eval_word(g, s);
      if (p <= 0.0) continue;
      // shift: new state (g, s_1, ..., s_{m-1})
      std::vector<Letter> letters{g};
      for (int j = 1; j < o.memory_; ++j) letters.push_back(s.at_depth(j));
      const Word next = Word::most_recent_first(std::move(letters));
      auto it = o.index_.find(next);
      if (it == o.index_.end())
        throw NotFiniteMemory(kernel.id() + ": transition leaves the admissible state set");
      o.transition_[si][static_cast<std::size_t>(it->second)] += p;
      row += p;
    }
    if (std::abs(row - 1.0) > 1e-12)
      throw NormalizationError("oracle transition row does not sum to 1");
  }

  o.stationary_ = power_iteration(o.transition_, &o.residual_);
  if (o.residual_ > kStationaryResidual && ns <= kDenseSolveLimit) {
    o.stationary_ = dense_stationary(o.transition_);
    // report the fixed-point residual of the solved vector
    double res = 0.0;
    for (std::size_t j = 0; j < ns; ++j) {
      double pj = 0.0;
      for (std::size_t i = 0; i < ns; ++i) pj += o.stationary_[i] * o.transition_[i][j];
      res += std::abs(pj - o.stationary_[j]);
    }
    o.residual_ = res;
  }
  return o;
}

std::vector<double> TruncatedChainOracle::window_law(int length) const {
  const int n = letters_;
  std::size_t cells = 1;
  for (int i = 0; i < length; ++i) cells *= static_cast<std::size_t>(n);
  std::vector<double> law(cells, 0.0);
  // forward word x_1..x_L indexed base-n with x_1 as the most significant digit
  for (std::size_t si = 0; si < states_.size(); ++si) {
    struct Item {
      std::size_t state;
      std::size_t code;
      double prob;
    };
    std::vector<Item> frontier{{si, 0, stationary_[si]}};
    for (int step = 0; step < length; ++step) {
      std::vector<Item> next;
      for (const Item& item : frontier) {
        for (std::size_t sj = 0; sj < states_.size(); ++sj) {
          const double p = transition_[item.state][sj];
          if (p <= 0.0) continue;
          const Letter emitted = states_[sj].at_depth(1);
          next.push_back(Item{sj,
                              item.code * static_cast<std::size_t>(n) +
                                  static_cast<std::size_t>(emitted),
                              item.prob * p});
        }
      }
      frontier.swap(next);
    }
    for (const Item& item : frontier) law[item.code] += item.prob;
  }
  return law;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw SupportMismatch("tv_distance: supports differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a, sum = term;
  for (int n = 1; n < 1000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  // Lentz continued fraction for Q(a,x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

ChiSquare chi_square(const std::vector<std::uint64_t>& observed,
                     const std::vector<double>& expected_probs) {
  if (observed.size() != expected_probs.size())
    throw SupportMismatch("chi_square: supports differ in size");
  std::uint64_t total = 0;
  for (auto o : observed) total += o;
  ChiSquare out;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected_probs[i] * static_cast<double>(total);
    if (e <= 0.0) {
      if (observed[i] > 0) {
        out.statistic = std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
      }
      continue;
    }
    const double d = static_cast<double>(observed[i]) - e;
    out.statistic += d * d / e;
    ++cells;
  }
  out.dof = std::max(1, cells - 1);
  if (std::isfinite(out.statistic))
    out.p_value = gamma_q(0.5 * out.dof, 0.5 * out.statistic);
  return out;
}

HistorySpec random_admissible_history(const Kernel& kernel, int recent_length,
                                      std::uint64_t seed) {
  const int n = kernel.alphabet().size();
  SeededSource src(seed);
  std::int64_t t = 0;
  auto draw = [&](int bound) {
    return static_cast<int>(src.at(t++, 0) * bound);
  };
  if (kernel.all_histories_admissible()) {
    std::vector<Letter> letters;
    letters.reserve(static_cast<std::size_t>(recent_length));
    for (int i = 0; i < recent_length; ++i) letters.push_back(draw(n));
    Tail tail = Tail::constant(static_cast<Letter>(draw(n)));
    return HistorySpec(Word::most_recent_first(std::move(letters)), tail);
  }
  // Build a random backward path: choose letters deepest-last so that each
  // extension keeps the prefix admissible; rejection over the letter set.
  for (int attempt = 0; attempt < 4096; ++attempt) {
    Word w;
    bool ok = true;
    for (int i = 0; i < recent_length && ok; ++i) {
      bool placed = false;
      const int start = draw(n);
      for (int d = 0; d < n; ++d) {
        Word cand = w;
        cand.extend_past(static_cast<Letter>((start + d) % n));
        if (is_admissible_prefix(cand, kernel)) {
          w = cand;
          placed = true;
          break;
        }
      }
      ok = placed;
    }
    if (!ok) continue;
    HistorySpec base = make_reference_history(kernel, w.empty() ? 0 : w.at_depth(w.length()));
    // glue the explicit word onto a rotation of the admissible tail
    const Tail& t0 = base.tail();
    const int period = t0.period();
    for (int rot = 0; rot < period; ++rot) {
      std::vector<Letter> pattern;
      pattern.reserve(static_cast<std::size_t>(period));
      for (int i = 0; i < period; ++i)
        pattern.push_back(t0.pattern[static_cast<std::size_t>((i + rot) % period)]);
      HistorySpec glued(w, Tail::periodic(std::move(pattern)));
      if (kernel.history_admissible(glued)) return glued;
    }
  }
  throw UnsupportedKernel(kernel.id() + ": could not draw an admissible history");
}

MeasureAuditResult measure_audit(const Kernel& kernel, int depth, int n_histories,
                                 std::uint64_t seed) {
  MeasureAuditResult res;
  res.histories = n_histories;
  for (int i = 0; i < n_histories; ++i) {
    HistorySpec h = random_admissible_history(kernel, depth, seed + static_cast<std::uint64_t>(i));
    BandLayout layout = build_layout(kernel, h, depth);
    for (Letter g = 0; g < kernel.alphabet().size(); ++g) {
      const double ad = kernel.ak_bound(g, layout.word);
      const double measured = layout.letter_measure(g);
      res.max_discrepancy = std::max(res.max_discrepancy, std::abs(measured - ad));
    }
  }
  return res;
}

}  // namespace perfectsim
