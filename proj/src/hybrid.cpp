#include "perfectsim/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace perfectsim {

namespace {

constexpr double kArcTol = 1e-15;

std::vector<double> band0_cumulative(const Kernel& kernel) {
  const int n = kernel.alphabet().size();
  std::vector<double> cum(static_cast<std::size_t>(n), 0.0);
  double c = 0.0;
  for (Letter g = 0; g < n; ++g) {
    c += kernel.ak_bound(g, {});
    cum[static_cast<std::size_t>(g)] = c;
  }
  return cum;
}

Letter locate(const std::vector<double>& cum, double x) {
  for (std::size_t g = 0; g < cum.size(); ++g)
    if (x < cum[g]) return static_cast<Letter>(g);
  return static_cast<Letter>(cum.size() - 1);  // x at the top boundary: last letter
}

}  // namespace

MarkovRestriction MarkovRestriction::build(const Kernel& kernel) {
  MarkovRestriction r;
  r.a1_ = kernel.ak_inf(1);
  if (!(r.a1_ > 0.0)) throw DegenerateRegime("markovian regime needs a_1 > 0");
  const int n = kernel.alphabet().size();
  const double a0 = kernel.ak_inf(0);
  r.band0_cum_ = band0_cumulative(kernel);
  r.a0_ = a0;
  r.cum_.assign(static_cast<std::size_t>(n), {});
  r.M_.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (Letter w = 0; w < n; ++w) {
    Word word = Word::most_recent_first({w});
    // band-1 cumulative on top of band 0
    std::vector<double> cum(static_cast<std::size_t>(n), 0.0);
    double c = a0;
    for (Letter g = 0; g < n; ++g) {
      const double b1 = std::max(0.0, kernel.ak_bound(g, word) -
                                          kernel.ak_bound(g, {}));
      c += b1;
      cum[static_cast<std::size_t>(g)] = c;
    }
    r.cum_[static_cast<std::size_t>(w)] = cum;
    // measures within [0, a1)
    for (Letter g = 0; g < n; ++g) {
      const double b0 = kernel.ak_bound(g, {});
      const double lo = g == 0 ? a0 : cum[static_cast<std::size_t>(g - 1)];
      const double hi = cum[static_cast<std::size_t>(g)];
      const double clipped = std::max(0.0, std::min(r.a1_, hi) - std::min(r.a1_, lo));
      r.M_[static_cast<std::size_t>(w)][static_cast<std::size_t>(g)] = (b0 + clipped) / r.a1_;
    }
  }
  return r;
}

Letter MarkovRestriction::tilde(double v, Letter w) const {
  const double x = a1_ * v;
  if (x < a0_) return locate(band0_cum_, x);
  return locate(cum_[static_cast<std::size_t>(w)], x);
}

ModifiedCoupling ModifiedCoupling::build(const Kernel& kernel) {
  ModifiedCoupling c;
  c.kernel_ = &kernel;
  c.a0_ = kernel.ak_inf(0);
  c.a1_ = kernel.ak_inf(1);
  if (!(c.a1_ > 0.0)) throw DegenerateRegime("hybrid coupling needs a_1 > 0");
  c.mode_ = c.a0_ > kArcTol ? Mode::shared : Mode::vector;
  const int n = kernel.alphabet().size();
  c.band0_cum_ = band0_cumulative(kernel);
  c.a1_of_.assign(static_cast<std::size_t>(n), 0.0);
  c.inside_cum_.assign(static_cast<std::size_t>(n), {});
  c.outside_cum_.assign(static_cast<std::size_t>(n), {});
  c.Mbar_.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (Letter w = 0; w < n; ++w) {
    Word word = Word::most_recent_first({w});
    std::vector<double> b1(static_cast<std::size_t>(n), 0.0);
    double total = 0.0;
    for (Letter g = 0; g < n; ++g) {
      b1[static_cast<std::size_t>(g)] =
          std::max(0.0, kernel.ak_bound(g, word) - kernel.ak_bound(g, {}));
      total += b1[static_cast<std::size_t>(g)];
    }
    const double a1w = c.a0_ + total;
    c.a1_of_[static_cast<std::size_t>(w)] = a1w;
    if (c.mode_ == Mode::vector) {
      // Proportional split of each letter's band-1 mass between the inside
      // window [a0, a1) and the outside region [a1, a1(w)): preserves each
      // letter's one-step measure and gives every positive-mass letter inside mass.
      const double denom = a1w - c.a0_;
      const double inside_frac = denom > 0.0 ? (c.a1_ - c.a0_) / denom : 0.0;
      std::vector<double> icum(static_cast<std::size_t>(n), 0.0),
          ocum(static_cast<std::size_t>(n), 0.0);
      double ic = 0.0, oc = 0.0;
      for (Letter g = 0; g < n; ++g) {
        const double x = b1[static_cast<std::size_t>(g)] * inside_frac;
        ic += x;
        oc += b1[static_cast<std::size_t>(g)] - x;
        icum[static_cast<std::size_t>(g)] = ic;
        ocum[static_cast<std::size_t>(g)] = oc;
        const double b0 = kernel.ak_bound(g, {});
        c.Mbar_[static_cast<std::size_t>(w)][static_cast<std::size_t>(g)] = (b0 + x) / c.a1_;
      }
      c.inside_cum_[static_cast<std::size_t>(w)] = std::move(icum);
      c.outside_cum_[static_cast<std::size_t>(w)] = std::move(ocum);
    } else {
      // Unmodified coupling: Mbar is the plain restriction measure.
      std::vector<double> cum(static_cast<std::size_t>(n), 0.0);
      double cc = c.a0_;
      for (Letter g = 0; g < n; ++g) {
        cc += b1[static_cast<std::size_t>(g)];
        cum[static_cast<std::size_t>(g)] = cc;
      }
      for (Letter g = 0; g < n; ++g) {
        const double b0 = kernel.ak_bound(g, {});
        const double lo = g == 0 ? c.a0_ : cum[static_cast<std::size_t>(g - 1)];
        const double hi = cum[static_cast<std::size_t>(g)];
        const double clipped = std::max(0.0, std::min(c.a1_, hi) - std::min(c.a1_, lo));
        c.Mbar_[static_cast<std::size_t>(w)][static_cast<std::size_t>(g)] = (b0 + clipped) / c.a1_;
      }
      c.inside_cum_[static_cast<std::size_t>(w)] = std::move(cum);  // plain band-1 cumulative
    }
  }
  return c;
}

Letter ModifiedCoupling::tilde(double v, Letter w) const {
  const double x = a1_ * v;
  if (x < a0_) return locate(band0_cum_, x);
  if (mode_ == Mode::shared)
    return locate(inside_cum_[static_cast<std::size_t>(w)], x);
  // vector mode: rearranged inside slices, offset from a0
  const auto& icum = inside_cum_[static_cast<std::size_t>(w)];
  const double off = x - a0_;
  for (std::size_t g = 0; g < icum.size(); ++g)
    if (off < icum[g]) return static_cast<Letter>(g);
  return static_cast<Letter>(icum.size() - 1);
}

FResult ModifiedCoupling::bar_eval(double u, const HistorySpec& h, int depth_cap) const {
  if (mode_ == Mode::shared) return eval_f(*kernel_, u, h, depth_cap);
  if (u < a0_) return FResult{locate(band0_cum_, u), 0};
  const Letter w = h.at_depth(1);
  const auto wi = static_cast<std::size_t>(w);
  if (u < a1_) {
    const double off = u - a0_;
    const auto& icum = inside_cum_[wi];
    for (std::size_t g = 0; g < icum.size(); ++g)
      if (off < icum[g]) return FResult{static_cast<Letter>(g), 1};
  }
  const double a1w = a1_of_[wi];
  if (u < a1w) {
    const double off = u - a1_;
    const auto& ocum = outside_cum_[wi];
    for (std::size_t g = 0; g < ocum.size(); ++g)
      if (off < ocum[g]) return FResult{static_cast<Letter>(g), 1};
  }
  // beyond the one-step region: continue the generic band scan from depth 2
  const int n = kernel_->alphabet().size();
  std::vector<double> prev(static_cast<std::size_t>(n), 0.0);
  Word word = Word::most_recent_first({w});
  for (Letter g = 0; g < n; ++g)
    prev[static_cast<std::size_t>(g)] = kernel_->ak_bound(g, word);
  double cursor = a1w;
  for (int k = 2; k <= depth_cap; ++k) {
    word.extend_past(h.at_depth(k));
    for (Letter g = 0; g < n; ++g) {
      const double ak = kernel_->ak_bound(g, word);
      double inc = ak - prev[static_cast<std::size_t>(g)];
      if (inc < -kIncrementClip)
        throw NegativeIncrement("bar_eval: negative band increment");
      if (inc < 0.0) inc = 0.0;
      prev[static_cast<std::size_t>(g)] = ak;
      cursor += inc;
      if (u < cursor) return FResult{g, k};
    }
  }
  throw DepthCapExceeded("bar_eval: a_d(w) <= u at the depth cap");
}

double ModifiedCoupling::one_step_measure(Letter g, Letter w) const {
  const auto wi = static_cast<std::size_t>(w);
  const auto gi = static_cast<std::size_t>(g);
  const double b0 = band0_cum_[gi] - (g == 0 ? 0.0 : band0_cum_[gi - 1]);
  if (mode_ == Mode::vector) {
    const double in = inside_cum_[wi][gi] - (g == 0 ? 0.0 : inside_cum_[wi][gi - 1]);
    const double out = outside_cum_[wi][gi] - (g == 0 ? 0.0 : outside_cum_[wi][gi - 1]);
    return b0 + in + out;
  }
  const double lo = g == 0 ? a0_ : inside_cum_[wi][gi - 1];
  return b0 + (inside_cum_[wi][gi] - lo);
}

bool detect_coalescence(const ModifiedCoupling& coupling, std::span<const double> u_block) {
  const int n = coupling.kernel().alphabet().size();
  return detect_merge(n, static_cast<int>(u_block.size()), [&](int t, Letter s) {
    return coupling.tilde(u_block[static_cast<std::size_t>(t)] / coupling.a1(), s);
  });
}

bool detect_coalescence_streams(const ModifiedCoupling& coupling, const UniformSource& source,
                                std::int64_t t_begin, std::int64_t t_end) {
  const int n = coupling.kernel().alphabet().size();
  return detect_merge(n, static_cast<int>(t_end - t_begin + 1), [&](int t, Letter s) {
    const std::int64_t at = t_begin + t;
    const double v = coupling.mode() == ModifiedCoupling::Mode::shared
                         ? source.at(at, 0) / coupling.a1()
                         : source.at(at, coupling.stream_for(s));
    return coupling.tilde(v, s);
  });
}

GraphReport graph_conditions(const Kernel& kernel) {
  const int n = kernel.alphabet().size();
  GraphReport rep;
  rep.arcs.assign(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
  for (Letter w = 0; w < n; ++w) {
    Word word = Word::most_recent_first({w});
    for (Letter g = 0; g < n; ++g)
      rep.arcs[static_cast<std::size_t>(w)][static_cast<std::size_t>(g)] =
          kernel.ak_bound(g, word) > kArcTol;
  }
  // Kosaraju SCC
  std::vector<int> order;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  auto dfs1 = [&](auto&& self, int v) -> void {
    seen[static_cast<std::size_t>(v)] = true;
    for (int g = 0; g < n; ++g)
      if (rep.arcs[static_cast<std::size_t>(v)][static_cast<std::size_t>(g)] &&
          !seen[static_cast<std::size_t>(g)])
        self(self, g);
    order.push_back(v);
  };
  for (int v = 0; v < n; ++v)
    if (!seen[static_cast<std::size_t>(v)]) dfs1(dfs1, v);
  int ncomp = 0;
  auto dfs2 = [&](auto&& self, int v, int c) -> void {
    comp[static_cast<std::size_t>(v)] = c;
    for (int w = 0; w < n; ++w)
      if (rep.arcs[static_cast<std::size_t>(w)][static_cast<std::size_t>(v)] &&
          comp[static_cast<std::size_t>(w)] < 0)
        self(self, w, c);
  };
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (comp[static_cast<std::size_t>(*it)] < 0) dfs2(dfs2, *it, ncomp++);
  rep.components.assign(static_cast<std::size_t>(ncomp), {});
  for (int v = 0; v < n; ++v) rep.components[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])].push_back(v);

  // closed classes: no arc leaving the component
  std::vector<bool> closed(static_cast<std::size_t>(ncomp), true);
  for (int v = 0; v < n; ++v)
    for (int g = 0; g < n; ++g)
      if (rep.arcs[static_cast<std::size_t>(v)][static_cast<std::size_t>(g)] &&
          comp[static_cast<std::size_t>(v)] != comp[static_cast<std::size_t>(g)])
        closed[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] = false;
  int closed_idx = -1;
  for (int c = 0; c < ncomp; ++c)
    if (closed[static_cast<std::size_t>(c)]) {
      ++rep.closed_classes;
      closed_idx = c;
    }
  rep.single_class = rep.closed_classes == 1;

  if (rep.single_class) {
    // period = gcd over internal arcs of level(u) + 1 - level(v), via BFS
    const auto& members = rep.components[static_cast<std::size_t>(closed_idx)];
    std::vector<int> level(static_cast<std::size_t>(n), -1);
    std::vector<int> queue{members.front()};
    level[static_cast<std::size_t>(members.front())] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int u = queue[qi];
      for (int g = 0; g < n; ++g)
        if (rep.arcs[static_cast<std::size_t>(u)][static_cast<std::size_t>(g)] &&
            comp[static_cast<std::size_t>(g)] == closed_idx &&
            level[static_cast<std::size_t>(g)] < 0) {
          level[static_cast<std::size_t>(g)] = level[static_cast<std::size_t>(u)] + 1;
          queue.push_back(g);
        }
    }
    int period = 0;
    for (int u : members)
      for (int g = 0; g < n; ++g)
        if (rep.arcs[static_cast<std::size_t>(u)][static_cast<std::size_t>(g)] &&
            comp[static_cast<std::size_t>(g)] == closed_idx)
          period = std::gcd(period, std::abs(level[static_cast<std::size_t>(u)] + 1 -
                                             level[static_cast<std::size_t>(g)]));
    rep.period = period == 0 ? 1 : period;
    rep.aperiodic = rep.period == 1;
  }

  rep.condition_iii = true;
  for (int g = 0; g < n; ++g) {
    bool missing = false;
    for (int w = 0; w < n; ++w)
      missing = missing || !rep.arcs[static_cast<std::size_t>(w)][static_cast<std::size_t>(g)];
    rep.condition_iii = rep.condition_iii && missing;
  }
  return rep;
}

CoalescenceResult tau0_hybrid(const Kernel& kernel, const ModifiedCoupling& coupling,
                              const AkSequence& a_seq, const UniformSource& source,
                              std::int64_t anchor, const SamplerOptions& opt) {
  CountingSource src(source);
  CoalescenceResult res;
  res.anchor = anchor;
  const double a1 = coupling.a1();
  const int n = kernel.alphabet().size();

  std::unordered_map<std::int64_t, double> mainU;
  auto u_at = [&](std::int64_t t) {
    auto it = mainU.find(t);
    if (it != mainU.end()) return it->second;
    const double u = src.at(t, 0);
    mainU.emplace(t, u);
    return u;
  };
  // guard_min[anchor - l] = min_{j in (l, anchor]} (j - K_j); guard(l) <=> l <= guard_min
  std::vector<double> guard_min{std::numeric_limits<double>::infinity()};
  auto ensure_guard = [&](std::int64_t l) {
    while (static_cast<std::int64_t>(guard_min.size()) <= anchor - l) {
      const std::int64_t j = anchor - static_cast<std::int64_t>(guard_min.size()) + 1;
      const int kj = a_seq.depth_K(u_at(j), opt.depth_cap);
      guard_min.push_back(std::min(guard_min.back(), static_cast<double>(j - kj)));
    }
  };
  auto guard_ok = [&](std::int64_t l) {
    ensure_guard(l);
    return static_cast<double>(l) <= guard_min[static_cast<std::size_t>(anchor - l)];
  };

  for (std::int64_t m = anchor; m >= anchor - opt.max_back; --m) {
    if (!(u_at(m) < a1)) continue;
    // all-states trajectories through the markovian run starting at m
    std::vector<Letter> state(static_cast<std::size_t>(n));
    std::iota(state.begin(), state.end(), 0);
    bool has_merged = false;
    std::int64_t merged_at = m;
    std::int64_t t = m;
    while (t <= anchor && u_at(t) < a1) {
      for (auto& s : state) {
        const double v = coupling.mode() == ModifiedCoupling::Mode::shared
                             ? u_at(t) / a1
                             : src.at(t, coupling.stream_for(s));
        s = coupling.tilde(v, s);
      }
      const bool merged = std::all_of(state.begin(), state.end(),
                                      [&](Letter s) { return s == state.front(); });
      if (merged) {  // stays merged; extending the block only helps the guard
        has_merged = true;
        merged_at = t;
        break;
      }
      ++t;
    }
    if (!has_merged) continue;
    const std::int64_t run_end = [&] {
      std::int64_t e = merged_at;
      while (e + 1 <= anchor && u_at(e + 1) < a1) ++e;
      return e;
    }();
    for (std::int64_t l = merged_at; l <= run_end; ++l) {
      if (guard_ok(l)) {
        res.tau = m;
        res.merge_end = l;
        res.status = RunStatus::coalesced;
        res.uniforms_consumed = src.count();
        // depth trace over the guarded stretch
        for (std::int64_t j = l + 1; j <= anchor &&
             static_cast<std::int64_t>(res.depth_trace.size()) < opt.trace_cap; ++j)
          res.depth_trace.push_back({j, a_seq.depth_K(u_at(j), opt.depth_cap)});
        return res;
      }
    }
  }
  res.status = RunStatus::depth_cap_hit;
  res.tau = anchor - opt.max_back;
  res.uniforms_consumed = src.count();
  return res;
}

}  // namespace perfectsim
