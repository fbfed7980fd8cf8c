#ifndef PERFECTSIM_SAMPLERS_HPP
#define PERFECTSIM_SAMPLERS_HPP

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "perfectsim/coupling.hpp"
#include "perfectsim/hybrid.hpp"
#include "perfectsim/kernel.hpp"
#include "perfectsim/randsource.hpp"
#include "perfectsim/run_types.hpp"

namespace perfectsim {

// Shared per-run memo of depths and band-0 pins, so that windowed sampling
// never rescans a time index.  Single-threaded by construction; independent
// runs use independent caches.
class DepthCache {
 public:
  std::unordered_map<std::int64_t, int> depth;           // K_j or K'_j
  std::unordered_map<std::int64_t, Letter> pins;         // band-0 pin (kNoPin = none)
};

// Band-0 pin of a uniform: the letter whose band-0 interval contains u, or
// kNoPin.  Pins are what J_h keeps fixed.
Letter band0_pin(const Kernel& kernel, double u);

// A_h(U_{anchor-1},...,U_{anchor-h}) per the pinned infimum.
double adaptive_A(const Kernel& kernel, const UniformSource& source, std::int64_t anchor, int h);

// tau_0 at `anchor` for the plain depth K(U_j).  Requires a_0 > 0.
CoalescenceResult tau0_cff(const Kernel& kernel, const AkSequence& a_seq,
                           const UniformSource& source, std::int64_t anchor,
                           const SamplerOptions& opt = {}, DepthCache* cache = nullptr);

// tau_0 with the history-adaptive depth K' (pins from band-0 hits).
CoalescenceResult tau0_adaptive(const Kernel& kernel, const UniformSource& source,
                                std::int64_t anchor, const SamplerOptions& opt = {},
                                DepthCache* cache = nullptr);

// Reference history: constant `opt.reference_tail` when admissible, else a
// deterministic periodic tail from the shortest cycle of the arc digraph.
HistorySpec make_reference_history(const Kernel& kernel, Letter preferred);

// Perfect sample of the window [m, n]: backward inspection to tau[m,n], then
// forward iteration of the coupling from the reference history.
SampleRun sample_window(const Kernel& kernel, Algorithm algorithm, const UniformSource& source,
                        std::int64_t m, std::int64_t n, const SamplerOptions& opt = {});

SampleRun sample_window_seeded(const Kernel& kernel, Algorithm algorithm, std::uint64_t seed,
                               std::int64_t m, std::int64_t n, const SamplerOptions& opt = {});

struct MartingaleEstimate {
  int n = 0;
  std::uint64_t seeds = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Monte Carlo estimate of E[Y_n] for the forward-indexed likelihood-ratio
// martingale built from the pinned infima; the theory value is 1.
MartingaleEstimate martingale_diagnostic(const Kernel& kernel, std::uint64_t seed_count, int n,
                                         std::uint64_t base_seed = 1);

struct RegenerationEstimate {
  std::vector<double> q;  // q[n] = empirical P(K_j <= j, 0 <= j <= n)
  std::uint64_t seeds = 0;
  double q_last_lcb95 = 0.0;  // normal-approx 95% lower confidence bound on q.back()
};

// Nonincreasing q_n estimating P(K_j <= j for all j <= n); its limit is the
// regeneration probability P(R^K).
RegenerationEstimate regeneration_diagnostic(const Kernel& kernel, Algorithm which, // cff or adaptive
                                             std::uint64_t seed_count, int n_max,
                                             std::uint64_t base_seed = 1,
                                             const SamplerOptions& opt = {});

}  // namespace perfectsim

#endif
