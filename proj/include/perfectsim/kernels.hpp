#ifndef PERFECTSIM_KERNELS_HPP
#define PERFECTSIM_KERNELS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "perfectsim/kernel.hpp"

namespace perfectsim {

constexpr int kInfiniteRun = -1;

// Alternating renewal process on G = {-1,+1} (letter 0 is "-1", letter 1 is
// "+1").  p(j | h) = p_r(w_{-1}, j) where r is the current run length of
// w_{-1} (r = infinity for a constant history).  Two parameterizations:
//   - finite table: survival rates p_r(i,i) for r = 1..m, constant = limit
//     value beyond m (this one certifies memory m+1);
//   - the slow closed-form rule p_r(i,i) = (1 - 1/sqrt(r+1))/2, whose a_k
//     converge too slowly for the plain depth sampler.
class AlternatingRenewalKernel final : public Kernel {
 public:
  struct Params {
    std::vector<double> survival_minus;  // p_r(-1,-1), r = 1..m
    std::vector<double> survival_plus;   // p_r(+1,+1)
    double limit_minus = 0.5;
    double limit_plus = 0.5;
  };

  static AlternatingRenewalKernel table(Params p);
  static AlternatingRenewalKernel table_symmetric(std::vector<double> survival, double limit);
  static AlternatingRenewalKernel slow_sqrt();

  std::string id() const override;
  double eval(Letter g, const HistorySpec& h) const override;
  double ak_bound(Letter g, const Word& w) const override;
  double ak_inf(int k) const override;
  bool supports_pinned() const override { return true; }
  double ak_pinned(const PinnedPattern& pattern) const override;
  std::unique_ptr<PinnedEvaluator> pinned_evaluator() const override;
  std::optional<int> finite_memory_order() const override;
  double eval_word(Letter g, const Word& w) const override;

  // Survival rate p_r(i,i); run = kInfiniteRun selects the limit value.
  double survival(Letter i, int run) const;
  double suffix_inf(Letter i, int k) const;  // inf_{r >= k} p_r(i,i), including infinity
  double suffix_sup(Letter i, int k) const;
  int run_length(const HistorySpec& h) const;  // kInfiniteRun for constant histories

 private:
  AlternatingRenewalKernel(bool sqrt_rule, Params p);
  double oscillation(Letter i, int k) const { return suffix_sup(i, k) - suffix_inf(i, k); }

  bool sqrt_rule_;
  Params params_;
  // suffix_min_[i][k-1] = min over table entries r >= k and the limit
  std::vector<double> suffix_min_[2], suffix_max_[2];
};

// Binary kernel with a data-driven change of regime (G = {0,1}):
//   p(1|h) = p1 (1 - c sum_i [ beta(i) 1{w_{-i}=0, T(h)>i} + gamma(i) 1{w_{-i}=0, T(h)<=i} ])
// with T(h) the first k whose running ones-density reaches sigma,
// beta(i) = i^{-alpha} (alpha in (1,2)) and gamma(i) = 2^{-i}.
class ChangepointBinaryKernel final : public Kernel {
 public:
  ChangepointBinaryKernel(double p1, double c, double sigma, double alpha);
  static ChangepointBinaryKernel defaults() { return {0.5, 0.1, 0.2, 1.5}; }

  std::string id() const override;
  double eval(Letter g, const HistorySpec& h) const override;
  double ak_bound(Letter g, const Word& w) const override;
  double ak_inf(int k) const override;
  bool supports_pinned() const override { return true; }
  double ak_pinned(const PinnedPattern& pattern) const override;
  std::unique_ptr<PinnedEvaluator> pinned_evaluator() const override;

  double p1() const { return p1_; }
  double c() const { return c_; }
  double sigma() const { return sigma_; }
  double alpha() const { return alpha_; }

  double beta(std::int64_t i) const;
  double gamma(std::int64_t i) const;
  double beta_tail(std::int64_t k) const;   // sum_{i>k} beta(i)
  double gamma_tail(std::int64_t k) const;  // sum_{i>k} gamma(i) = 2^{-k}

  // First k with running ones-density >= sigma, or kInfiniteRun.
  std::int64_t decide_T(const HistorySpec& h) const;
  std::int64_t decide_T_word(const Word& w) const;  // first crossing within the word, else kInfiniteRun

 private:
  bool density_reaches(std::int64_t ones, std::int64_t k) const {
    return static_cast<double>(ones) >= sigma_ * static_cast<double>(k);
  }
  double beta_tail_arith(std::int64_t first, std::int64_t step) const;
  double zeros_tail_sum(const HistorySpec& h, std::int64_t from, bool use_gamma) const;

  double p1_, c_, sigma_, alpha_;
  double beta_total_;  // sum_{i>=1} beta(i)
};

// Generalized random walk on a finite digraph (G, A): p(g|h) = 0 off-arc;
// on-arc, the two per-state distributions P0(.|w), P1(.|w) are interpolated
// by the geometric-weight average of the deeper past,
//   s(h) = sum_{i>=2} (1-omega) omega^{i-2} ind(h_i),  ind(g) = g/(|G|-1).
// memory = m truncates s at depth m (an order-m Markov kernel, used as the
// depth-certified oracle target); memory = 0 keeps the full dependence.
class GeneralizedWalkKernel final : public Kernel {
 public:
  struct Params {
    Alphabet alphabet = Alphabet::indexed(2);
    std::vector<std::vector<bool>> arcs;        // arcs[w][g]: w -> g allowed
    std::vector<std::vector<double>> p_low;     // P0, rows sum to 1, zero off-arc
    std::vector<std::vector<double>> p_high;    // P1
    double omega = 0.5;
    int memory = 0;
  };

  explicit GeneralizedWalkKernel(Params p);

  std::string id() const override;
  double eval(Letter g, const HistorySpec& h) const override;
  double ak_bound(Letter g, const Word& w) const override;
  double ak_inf(int k) const override;
  bool uniformly_null(Letter g, const Word& w) const override;
  bool all_histories_admissible() const override { return all_arcs_; }
  bool history_admissible(const HistorySpec& h) const override;
  std::optional<int> finite_memory_order() const override;
  double eval_word(Letter g, const Word& w) const override;

  bool arc(Letter w, Letter g) const {
    return params_.arcs[static_cast<std::size_t>(w)][static_cast<std::size_t>(g)];
  }
  int memory() const { return params_.memory; }
  double omega() const { return params_.omega; }
  const std::vector<bool>& viable() const { return viable_; }

 private:
  double ind(Letter g) const {
    return alphabet().size() > 1 ? static_cast<double>(g) / (alphabet().size() - 1) : 0.0;
  }
  double weight(int i) const;           // (1-omega) omega^{i-2}, i >= 2
  double free_mass(int k) const;        // sum of weights at positions > k (within memory)
  double modulation(const HistorySpec& h) const;
  double interpolate(Letter w, Letter g, double s) const {
    const auto wi = static_cast<std::size_t>(w), gi = static_cast<std::size_t>(g);
    return params_.p_low[wi][gi] + s * (params_.p_high[wi][gi] - params_.p_low[wi][gi]);
  }

  Params params_;
  std::vector<bool> viable_;      // letters with an infinite admissible past
  std::vector<double> tv_;        // per-state total variation between P0 and P1
  double max_tv_viable_ = 0.0;
  bool all_arcs_ = false;
};

}  // namespace perfectsim

#endif
