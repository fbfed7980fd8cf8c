#ifndef PERFECTSIM_VERIFY_HPP
#define PERFECTSIM_VERIFY_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "perfectsim/kernel.hpp"
#include "perfectsim/randsource.hpp"

namespace perfectsim {

// Exact stationary law of a kernel with certified finite memory m: the
// compatible process is an order-m Markov chain on the admissible words of
// length m.
class TruncatedChainOracle {
 public:
  static TruncatedChainOracle build(const Kernel& kernel);

  int memory() const { return memory_; }
  int state_count() const { return static_cast<int>(states_.size()); }
  const std::vector<Word>& states() const { return states_; }
  const std::vector<std::vector<double>>& transition() const { return transition_; }
  const std::vector<double>& stationary() const { return stationary_; }
  double stationary_residual() const { return residual_; }

  // Law of a forward window (X_1,...,X_L) under stationarity, as a dense
  // vector over G^L indexed base-|G| by the forward word.
  std::vector<double> window_law(int length) const;

 private:
  int memory_ = 0;
  int letters_ = 0;
  std::vector<Word> states_;
  std::map<Word, int> index_;
  std::vector<std::vector<double>> transition_;
  std::vector<double> stationary_;
  double residual_ = 0.0;
};

// TV = (1/2) sum |p_i - q_i|; throws SupportMismatch on size mismatch.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

struct ChiSquare {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
};

// Pearson chi-square of observed counts against expected probabilities.
ChiSquare chi_square(const std::vector<std::uint64_t>& observed,
                     const std::vector<double>& expected_probs);

// Regularized upper incomplete gamma Q(a, x) (chi-square tail).
double gamma_q(double a, double x);

struct MeasureAuditResult {
  double max_discrepancy = 0.0;
  int histories = 0;
};

// Max over sampled (g, w) of | sum_k |B_k(g|w)| - a_d(g|w) | at depth d.
// Histories are drawn admissibly from the given seed.
MeasureAuditResult measure_audit(const Kernel& kernel, int depth, int n_histories,
                                 std::uint64_t seed = 1);

// Draw an admissible HistorySpec (random recent word of the given length
// plus an admissible constant or cyclic tail), for audits and tests.
HistorySpec random_admissible_history(const Kernel& kernel, int recent_length,
                                      std::uint64_t seed);

}  // namespace perfectsim

#endif
