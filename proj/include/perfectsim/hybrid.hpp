#ifndef PERFECTSIM_HYBRID_HPP
#define PERFECTSIM_HYBRID_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "perfectsim/coupling.hpp"
#include "perfectsim/kernel.hpp"
#include "perfectsim/randsource.hpp"
#include "perfectsim/run_types.hpp"

namespace perfectsim {

// Restriction of the coupling to the markovian regime u < a_1, where it
// reads a single past letter: tilde(v|w) = f(a_1 v | ..., w) and the induced
// one-step kernel M(g|w).
class MarkovRestriction {
 public:
  static MarkovRestriction build(const Kernel& kernel);

  double a1() const { return a1_; }
  Letter tilde(double v, Letter w) const;  // v in [0,1)
  double M(Letter g, Letter w) const {
    return M_[static_cast<std::size_t>(w)][static_cast<std::size_t>(g)];
  }
  int letters() const { return static_cast<int>(M_.size()); }

 private:
  double a1_ = 0.0, a0_ = 0.0;
  std::vector<double> band0_cum_;
  // cum_[w][g] = upper endpoints of the band-1 segments on top of band 0
  std::vector<std::vector<double>> cum_, M_;
};

// The coupling actually driven by the hybrid sampler.  Shared mode keeps the
// maximal coupling (single stream) and applies when band 0 has mass; vector
// mode applies when a_0 = 0: the band-1 segments are split proportionally
// between [a_0, a_1) and [a_1, a_1(w)) so that every letter with
// a_1(g|w) > 0 has one-step mass, and trajectories read per-state streams
// until they merge.
class ModifiedCoupling {
 public:
  enum class Mode { shared, vector };

  static ModifiedCoupling build(const Kernel& kernel);

  Mode mode() const { return mode_; }
  const Kernel& kernel() const { return *kernel_; }
  double a0() const { return a0_; }
  double a1() const { return a1_; }
  // Rearranged one-step kernel; equals the plain restriction in shared mode.
  double Mbar(Letter g, Letter w) const {
    return Mbar_[static_cast<std::size_t>(w)][static_cast<std::size_t>(g)];
  }

  // One markovian step from state w on uniform v in [0,1).
  Letter tilde(double v, Letter w) const;

  // Full coupling evaluation (the rearranged bar-coupling in vector mode).
  FResult bar_eval(double u, const HistorySpec& h, int depth_cap = kDefaultDepthCap) const;

  // Measure of {u < a1(w) : bar letter = g}; equals a_1(g|w) by construction.
  double one_step_measure(Letter g, Letter w) const;

  // Uniform stream driving a trajectory currently at `state` (main stream in
  // shared mode, per-state streams in vector mode).
  std::uint32_t stream_for(Letter state) const {
    return mode_ == Mode::shared ? 0u : 1u + static_cast<std::uint32_t>(state);
  }

 private:
  const Kernel* kernel_ = nullptr;
  Mode mode_ = Mode::shared;
  double a0_ = 0.0, a1_ = 0.0;
  std::vector<double> band0_cum_;                 // cumulative a_0(g)
  std::vector<double> a1_of_;                     // a_1(w) per state
  std::vector<std::vector<double>> inside_cum_;   // per state: cumulative widths in [a0, a1)
  std::vector<std::vector<double>> outside_cum_;  // per state: cumulative widths in [a1, a1(w))
  std::vector<std::vector<double>> Mbar_;
};

// Track one trajectory per starting letter through `steps` applications of
// step(t, state) and report whether they all merged.
template <class StepFn>
bool detect_merge(int n_letters, int steps, StepFn&& step) {
  std::vector<Letter> state(static_cast<std::size_t>(n_letters));
  for (int g = 0; g < n_letters; ++g) state[static_cast<std::size_t>(g)] = g;
  for (int t = 0; t < steps; ++t)
    for (auto& s : state) s = step(t, s);
  for (const Letter s : state)
    if (s != state.front()) return false;
  return true;
}

// All-states coalescence over a block of shared rescaled uniforms
// (E_n of the tilde composition).  Block is oldest-first; raw U values,
// all < a_1.
bool detect_coalescence(const ModifiedCoupling& coupling, std::span<const double> u_block);

// Same, but trajectories draw their per-state streams from the source at
// absolute times t_begin..t_end (vector form).
bool detect_coalescence_streams(const ModifiedCoupling& coupling, const UniformSource& source,
                                std::int64_t t_begin, std::int64_t t_end);

struct GraphReport {
  std::vector<std::vector<bool>> arcs;  // (w,g) with a_1(g|w) > 0
  std::vector<std::vector<int>> components;  // strongly connected components
  int closed_classes = 0;
  bool single_class = false;   // exactly one closed communicating class
  int period = 0;              // of the closed class when unique
  bool aperiodic = false;
  bool condition_iii = false;  // every g misses some in-arc
};

GraphReport graph_conditions(const Kernel& kernel);

// Backward coalescence time of the combined construction: largest m <= anchor
// admitting l in [m, anchor] with the block [m,l] in the markovian regime and
// coalescent, and K(U_j) <= j - l past the block.
CoalescenceResult tau0_hybrid(const Kernel& kernel, const ModifiedCoupling& coupling,
                              const AkSequence& a_seq, const UniformSource& source,
                              std::int64_t anchor, const SamplerOptions& opt = {});

}  // namespace perfectsim

#endif
