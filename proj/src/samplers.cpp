#include "perfectsim/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace perfectsim {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::cff: return "cff";
    case Algorithm::adaptive: return "adaptive";
    case Algorithm::hybrid: return "hybrid";
  }
  return "?";
}

Letter band0_pin(const Kernel& kernel, double u) {
  double cum = 0.0;
  for (Letter g = 0; g < kernel.alphabet().size(); ++g) {
    cum += kernel.ak_bound(g, {});
    if (u < cum) return g;
  }
  return kNoPin;
}

namespace {

void require_adaptive_support(const Kernel& kernel) {
  if (!kernel.supports_pinned())
    throw UnsupportedKernel(kernel.id() + ": adaptive depth needs pinned infimum bounds");
  if (!kernel.all_histories_admissible())
    throw UnsupportedKernel(kernel.id() +
                            ": adaptive depth is restricted to kernels without forbidden words");
}

Letter pin_at(const Kernel& kernel, const UniformSource& src, std::int64_t t, DepthCache* cache) {
  if (cache) {
    auto it = cache->pins.find(t);
    if (it != cache->pins.end()) return it->second;
  }
  const Letter pin = band0_pin(kernel, src.at(t, 0));
  if (cache) cache->pins.emplace(t, pin);
  return pin;
}

int adaptive_depth(const Kernel& kernel, const UniformSource& src, std::int64_t t,
                   const SamplerOptions& opt, DepthCache* cache) {
  if (cache) {
    auto it = cache->depth.find(t);
    if (it != cache->depth.end()) return it->second;
  }
  const double u = src.at(t, 0);
  auto ev = kernel.pinned_evaluator();
  int k = -1;
  for (int h = 0; h <= opt.depth_cap; ++h) {
    if (u < ev->value()) {
      k = h;
      break;
    }
    ev->push(pin_at(kernel, src, t - (h + 1), cache));
  }
  if (k < 0) throw DepthCapExceeded("adaptive depth: A_h <= u at the depth cap");
  if (cache) cache->depth.emplace(t, k);
  return k;
}

int cff_depth(const AkSequence& a_seq, const UniformSource& src, std::int64_t t,
              const SamplerOptions& opt, DepthCache* cache) {
  if (cache) {
    auto it = cache->depth.find(t);
    if (it != cache->depth.end()) return it->second;
  }
  const int k = a_seq.depth_K(src.at(t, 0), opt.depth_cap);
  if (cache) cache->depth.emplace(t, k);
  return k;
}

// Common backward scan: tau = largest s <= anchor with K_j <= j - s for all
// j in [s, anchor].
CoalescenceResult tau_scan(const std::function<int(std::int64_t)>& depth_at,
                           std::int64_t anchor, const SamplerOptions& opt,
                           std::uint64_t* consumed) {
  CoalescenceResult res;
  res.anchor = anchor;
  double running_min = std::numeric_limits<double>::infinity();  // min_{j>s} (j - K_j)
  for (std::int64_t s = anchor; s >= anchor - opt.max_back; --s) {
    const int k = depth_at(s);
    if (static_cast<std::int64_t>(res.depth_trace.size()) < opt.trace_cap)
      res.depth_trace.push_back({s, k});
    if (k == 0 && static_cast<double>(s) <= running_min) {
      res.tau = s;
      res.status = RunStatus::coalesced;
      if (consumed) res.uniforms_consumed = *consumed;
      return res;
    }
    running_min = std::min(running_min, static_cast<double>(s - k));
  }
  res.status = RunStatus::depth_cap_hit;
  res.tau = anchor - opt.max_back;
  if (consumed) res.uniforms_consumed = *consumed;
  return res;
}

}  // namespace

double adaptive_A(const Kernel& kernel, const UniformSource& source, std::int64_t anchor, int h) {
  require_adaptive_support(kernel);
  auto ev = kernel.pinned_evaluator();
  for (int k = 1; k <= h; ++k) ev->push(band0_pin(kernel, source.at(anchor - k, 0)));
  return ev->value();
}

CoalescenceResult tau0_cff(const Kernel& kernel, const AkSequence& a_seq,
                           const UniformSource& source, std::int64_t anchor,
                           const SamplerOptions& opt, DepthCache* cache) {
  if (!(kernel.ak_inf(0) > 0.0))
    throw UnsupportedKernel(kernel.id() + ": the plain depth sampler needs a_0 > 0");
  CountingSource src(source);
  std::uint64_t consumed = 0;
  auto depth_at = [&](std::int64_t t) {
    const int k = cff_depth(a_seq, src, t, opt, cache);
    consumed = src.count();
    return k;
  };
  return tau_scan(depth_at, anchor, opt, &consumed);
}

CoalescenceResult tau0_adaptive(const Kernel& kernel, const UniformSource& source,
                                std::int64_t anchor, const SamplerOptions& opt,
                                DepthCache* cache) {
  require_adaptive_support(kernel);
  if (!(kernel.ak_inf(0) > 0.0))
    throw UnsupportedKernel(kernel.id() + ": the adaptive depth sampler needs a_0 > 0");
  CountingSource src(source);
  std::uint64_t consumed = 0;
  auto depth_at = [&](std::int64_t t) {
    const int k = adaptive_depth(kernel, src, t, opt, cache);
    consumed = src.count();
    return k;
  };
  return tau_scan(depth_at, anchor, opt, &consumed);
}

HistorySpec make_reference_history(const Kernel& kernel, Letter preferred) {
  const int n = kernel.alphabet().size();
  std::vector<Letter> candidates;
  if (preferred >= 0 && preferred < n) candidates.push_back(preferred);
  for (Letter g = 0; g < n; ++g) candidates.push_back(g);
  for (Letter g : candidates) {
    HistorySpec h = HistorySpec::constant(g);
    if (kernel.history_admissible(h)) return h;
  }
  // No constant tail is admissible: use the shortest cycle of the digraph
  // through the smallest vertex, reversed into a periodic tail.
  std::vector<std::vector<bool>> arcs(static_cast<std::size_t>(n),
                                      std::vector<bool>(static_cast<std::size_t>(n)));
  for (Letter w = 0; w < n; ++w) {
    Word word = Word::most_recent_first({w});
    for (Letter g = 0; g < n; ++g)
      arcs[static_cast<std::size_t>(w)][static_cast<std::size_t>(g)] =
          !kernel.uniformly_null(g, word);
  }
  for (Letter v = 0; v < n; ++v) {
    // BFS from v; close the cycle on the first re-entry to v.
    std::vector<int> parent(static_cast<std::size_t>(n), -2);
    std::vector<Letter> queue{v};
    parent[static_cast<std::size_t>(v)] = -1;
    std::vector<Letter> cycle;
    for (std::size_t qi = 0; qi < queue.size() && cycle.empty(); ++qi) {
      const Letter u = queue[qi];
      for (Letter g = 0; g < n; ++g) {
        if (!arcs[static_cast<std::size_t>(u)][static_cast<std::size_t>(g)]) continue;
        if (g == v) {  // reconstruct v -> ... -> u -> v
          for (Letter x = u; x != -1; x = static_cast<Letter>(parent[static_cast<std::size_t>(x)]))
            cycle.push_back(x);
          std::reverse(cycle.begin(), cycle.end());
          break;
        }
        if (parent[static_cast<std::size_t>(g)] == -2) {
          parent[static_cast<std::size_t>(g)] = u;
          queue.push_back(g);
        }
      }
    }
    if (!cycle.empty()) {
      std::reverse(cycle.begin(), cycle.end());  // deeper positions are earlier on the cycle
      HistorySpec h(Word(), Tail::periodic(cycle));
      if (kernel.history_admissible(h)) return h;
    }
  }
  throw UnsupportedKernel(kernel.id() + ": no admissible reference history found");
}

SampleRun sample_window(const Kernel& kernel, Algorithm algorithm, const UniformSource& source,
                        std::int64_t m, std::int64_t n, const SamplerOptions& opt) {
  if (m > n) throw ConfigError("window requires m <= n", "window.invalid");
  CountingSource src(source);
  DepthCache cache;
  AkSequence a_seq(kernel);
  std::optional<ModifiedCoupling> coupling;
  if (algorithm == Algorithm::hybrid) coupling.emplace(ModifiedCoupling::build(kernel));

  std::int64_t tau = n + 1;
  for (std::int64_t anchor = m; anchor <= n; ++anchor) {
    CoalescenceResult r;
    switch (algorithm) {
      case Algorithm::cff:
        r = tau0_cff(kernel, a_seq, src, anchor, opt, &cache);
        break;
      case Algorithm::adaptive:
        r = tau0_adaptive(kernel, src, anchor, opt, &cache);
        break;
      case Algorithm::hybrid:
        r = tau0_hybrid(kernel, *coupling, a_seq, src, anchor, opt);
        break;
    }
    if (r.status != RunStatus::coalesced)
      throw DepthCapExceeded("sample_window: backward scan budget exhausted");
    tau = std::min(tau, r.tau);
  }

  HistorySpec cur = make_reference_history(kernel, opt.reference_tail);
  const bool vector_mode =
      coupling && coupling->mode() == ModifiedCoupling::Mode::vector;
  for (std::int64_t j = tau; j <= n; ++j) {
    Letter letter;
    const double u = src.at(j, 0);
    if (vector_mode && u < coupling->a1()) {
      const Letter prev = cur.at_depth(1);
      letter = coupling->tilde(src.at(j, coupling->stream_for(prev)), prev);
    } else if (vector_mode) {
      letter = coupling->bar_eval(u, cur, opt.depth_cap).letter;
    } else {
      letter = eval_f(kernel, u, cur, opt.depth_cap).letter;
    }
    cur.push_recent(letter);
  }

  SampleRun run;
  run.seed = 0;
  run.m = m;
  run.n = n;
  run.tau_window = tau;
  run.letters = cur.prefix(static_cast<int>(n - m + 1));
  run.kernel_id = kernel.id();
  run.algorithm = algorithm;
  run.uniforms_consumed = src.count();
  return run;
}

SampleRun sample_window_seeded(const Kernel& kernel, Algorithm algorithm, std::uint64_t seed,
                               std::int64_t m, std::int64_t n, const SamplerOptions& opt) {
  SeededSource source(seed);
  SampleRun run = sample_window(kernel, algorithm, source, m, n, opt);
  run.seed = seed;
  return run;
}

MartingaleEstimate martingale_diagnostic(const Kernel& kernel, std::uint64_t seed_count, int n,
                                         std::uint64_t base_seed) {
  require_adaptive_support(kernel);
  if (!(kernel.ak_inf(0) > 0.0))
    throw UnsupportedKernel(kernel.id() + ": the martingale diagnostic needs a_0 > 0");
  double sum = 0.0, sumsq = 0.0;
  std::vector<Letter> pins(static_cast<std::size_t>(n), kNoPin);
  for (std::uint64_t s = 0; s < seed_count; ++s) {
    SeededSource src(base_seed + s);
    for (int t = 0; t < n; ++t)
      pins[static_cast<std::size_t>(t)] = band0_pin(kernel, src.at(t, 0));
    double y = 1.0;
    for (int h = 0; h <= n; ++h) {
      // A_h(U_{h-1},...,U_0): position -k holds the pin of U_{h-k}
      PinnedPattern pat;
      for (int k = 1; k <= h; ++k) pat.push(pins[static_cast<std::size_t>(h - k)]);
      const double A = h == 0 ? kernel.ak_inf(0) : kernel.ak_pinned(pat);
      if (!(src.at(h, 0) < A)) {
        y = 0.0;
        break;
      }
      y /= A;
    }
    sum += y;
    sumsq += y * y;
  }
  MartingaleEstimate est;
  est.n = n;
  est.seeds = seed_count;
  est.mean = sum / static_cast<double>(seed_count);
  const double var =
      std::max(0.0, sumsq / static_cast<double>(seed_count) - est.mean * est.mean);
  est.stderr_ = std::sqrt(var / static_cast<double>(seed_count));
  return est;
}

RegenerationEstimate regeneration_diagnostic(const Kernel& kernel, Algorithm which,
                                             std::uint64_t seed_count, int n_max,
                                             std::uint64_t base_seed,
                                             const SamplerOptions& /*opt*/) {
  if (which == Algorithm::hybrid)
    throw UnsupportedKernel("regeneration diagnostic applies to the depth samplers");
  if (!(kernel.ak_inf(0) > 0.0))
    throw UnsupportedKernel(kernel.id() + ": the regeneration diagnostic needs a_0 > 0");
  const bool adaptive = which == Algorithm::adaptive;
  if (adaptive) require_adaptive_support(kernel);
  AkSequence a_seq(kernel);
  std::vector<std::uint64_t> survive(static_cast<std::size_t>(n_max) + 1, 0);
  std::vector<Letter> pins(static_cast<std::size_t>(n_max), kNoPin);
  for (std::uint64_t s = 0; s < seed_count; ++s) {
    SeededSource src(base_seed + s);
    if (adaptive)
      for (int t = 0; t < n_max; ++t)
        pins[static_cast<std::size_t>(t)] = band0_pin(kernel, src.at(t, 0));
    int fail_at = n_max + 1;
    for (int j = 0; j <= n_max; ++j) {
      double bound;
      if (adaptive) {
        PinnedPattern pat;
        for (int k = 1; k <= j; ++k) pat.push(pins[static_cast<std::size_t>(j - k)]);
        bound = j == 0 ? kernel.ak_inf(0) : kernel.ak_pinned(pat);
      } else {
        bound = a_seq.at(j);  // K_j <= j  <=>  U_j < a_j
      }
      if (!(src.at(j, 0) < bound)) {
        fail_at = j;
        break;
      }
    }
    for (int nn = 0; nn <= n_max && nn < fail_at; ++nn) ++survive[static_cast<std::size_t>(nn)];
  }
  RegenerationEstimate est;
  est.seeds = seed_count;
  est.q.resize(static_cast<std::size_t>(n_max) + 1);
  for (int nn = 0; nn <= n_max; ++nn)
    est.q[static_cast<std::size_t>(nn)] =
        static_cast<double>(survive[static_cast<std::size_t>(nn)]) /
        static_cast<double>(seed_count);
  const double q = est.q.back();
  est.q_last_lcb95 =
      q - 1.645 * std::sqrt(std::max(0.0, q * (1.0 - q)) / static_cast<double>(seed_count));
  return est;
}

}  // namespace perfectsim
