#include <algorithm>
#include <cmath>
#include <sstream>

#include "perfectsim/kernels.hpp"

namespace perfectsim {

GeneralizedWalkKernel::GeneralizedWalkKernel(Params p)
    : Kernel(p.alphabet), params_(std::move(p)) {
  const int n = alphabet().size();
  const auto sz = static_cast<std::size_t>(n);
  if (params_.arcs.size() != sz || params_.p_low.size() != sz || params_.p_high.size() != sz)
    throw ConfigError("walk: arcs/p_low/p_high must be |G| x |G|");
  if (!(params_.omega > 0.0 && params_.omega < 1.0))
    throw ConfigError("walk: omega must lie in (0,1)");
  if (params_.memory < 0) throw ConfigError("walk: memory must be >= 0");

  all_arcs_ = true;
  for (std::size_t w = 0; w < sz; ++w) {
    if (params_.arcs[w].size() != sz || params_.p_low[w].size() != sz ||
        params_.p_high[w].size() != sz)
      throw ConfigError("walk: arcs/p_low/p_high must be |G| x |G|");
    double s0 = 0.0, s1 = 0.0;
    bool any_arc = false;
    for (std::size_t g = 0; g < sz; ++g) {
      const bool a = params_.arcs[w][g];
      all_arcs_ = all_arcs_ && a;
      any_arc = any_arc || a;
      if (!a) {
        if (params_.p_low[w][g] != 0.0 || params_.p_high[w][g] != 0.0)
          throw ConfigError("walk: off-arc probabilities must be zero");
        continue;
      }
      if (!(params_.p_low[w][g] > 0.0) || !(params_.p_high[w][g] > 0.0))
        throw ConfigError("walk: on-arc probabilities must be positive");
      s0 += params_.p_low[w][g];
      s1 += params_.p_high[w][g];
    }
    if (!any_arc) throw ConfigError("walk: every state needs an out-arc");
    if (std::abs(s0 - 1.0) > 1e-12 || std::abs(s1 - 1.0) > 1e-12)
      throw ConfigError("walk: p_low/p_high rows must sum to 1");
  }

  // viable = letters with an infinite admissible past, i.e. reachable along
  // arcs from a vertex that lies on a cycle.
  std::vector<bool> on_cycle(sz, false);
  for (std::size_t v = 0; v < sz; ++v) {
    // BFS from v; v is on a cycle iff v is reachable from one of its successors.
    std::vector<bool> seen(sz, false);
    std::vector<std::size_t> queue;
    for (std::size_t g = 0; g < sz; ++g)
      if (params_.arcs[v][g] && !seen[g]) {
        seen[g] = true;
        queue.push_back(g);
      }
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::size_t u = queue[qi];
      for (std::size_t g = 0; g < sz; ++g)
        if (params_.arcs[u][g] && !seen[g]) {
          seen[g] = true;
          queue.push_back(g);
        }
    }
    on_cycle[v] = seen[v];
  }
  viable_.assign(sz, false);
  std::vector<std::size_t> queue;
  for (std::size_t v = 0; v < sz; ++v)
    if (on_cycle[v]) {
      viable_[v] = true;
      queue.push_back(v);
    }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::size_t u = queue[qi];
    for (std::size_t g = 0; g < sz; ++g)
      if (params_.arcs[u][g] && !viable_[g]) {
        viable_[g] = true;
        queue.push_back(g);
      }
  }
  bool any_viable = false;
  for (std::size_t v = 0; v < sz; ++v) any_viable = any_viable || viable_[v];
  if (!any_viable) throw ConfigError("walk: the digraph has no cycle, no admissible history exists");

  tv_.assign(sz, 0.0);
  for (std::size_t w = 0; w < sz; ++w) {
    for (std::size_t g = 0; g < sz; ++g)
      tv_[w] += std::max(0.0, params_.p_high[w][g] - params_.p_low[w][g]);
    if (viable_[w]) max_tv_viable_ = std::max(max_tv_viable_, tv_[w]);
  }
}

std::string GeneralizedWalkKernel::id() const {
  std::ostringstream os;
  os << "generalized_walk(n=" << alphabet().size() << ",omega=" << params_.omega
     << ",memory=" << params_.memory << ")";
  return os.str();
}

double GeneralizedWalkKernel::weight(int i) const {
  return (1.0 - params_.omega) * std::pow(params_.omega, i - 2);
}

double GeneralizedWalkKernel::free_mass(int k) const {
  const double beyond_k = std::pow(params_.omega, std::max(k, 1) - 1);
  if (params_.memory == 0) return beyond_k;
  const double beyond_m = std::pow(params_.omega, std::max(params_.memory, 1) - 1);
  return std::max(0.0, beyond_k - beyond_m);
}

double GeneralizedWalkKernel::modulation(const HistorySpec& h) const {
  const int d = h.explicit_depth();
  const int m = params_.memory;
  double s = 0.0;
  const int explicit_top = m == 0 ? d : std::min(d, m);
  for (int i = 2; i <= explicit_top; ++i) s += weight(i) * ind(h.at_depth(i));
  if (m != 0) {
    for (int i = std::max(2, d + 1); i <= m; ++i) s += weight(i) * ind(h.at_depth(i));
    return s;
  }
  // Infinite dependence: close the tail in geometric form, one period at a time.
  const Tail& tail = h.tail();
  const int period = tail.period();
  const int start = std::max(2, d + 1);
  const double ratio = std::pow(params_.omega, period);
  double period_sum = 0.0;
  for (int i = start; i < start + period; ++i) period_sum += weight(i) * ind(h.at_depth(i));
  s += period_sum / (1.0 - ratio);
  return s;
}

double GeneralizedWalkKernel::eval(Letter g, const HistorySpec& h) const {
  if (!history_admissible(h)) throw InadmissibleHistory(id() + ": history leaves the arc set");
  const Letter w = h.at_depth(1);
  if (!arc(w, g)) return 0.0;
  return interpolate(w, g, modulation(h));
}

double GeneralizedWalkKernel::ak_bound(Letter g, const Word& w) const {
  const int k = w.length();
  if (k == 0) {
    double v = 1.0;
    for (Letter p = 0; p < alphabet().size(); ++p) {
      if (!viable_[static_cast<std::size_t>(p)]) continue;
      if (!arc(p, g)) return 0.0;
      v = std::min(v, std::min(params_.p_low[static_cast<std::size_t>(p)][static_cast<std::size_t>(g)],
                               params_.p_high[static_cast<std::size_t>(p)][static_cast<std::size_t>(g)]));
    }
    return v;
  }
  const Letter v = w.at_depth(1);
  if (!arc(v, g)) return 0.0;
  const int m = params_.memory;
  double s_known = 0.0;
  const int top = m == 0 ? k : std::min(k, m);
  for (int i = 2; i <= top; ++i) s_known += weight(i) * ind(w.at_depth(i));
  const double free = free_mass(k);
  const double delta = params_.p_high[static_cast<std::size_t>(v)][static_cast<std::size_t>(g)] -
                       params_.p_low[static_cast<std::size_t>(v)][static_cast<std::size_t>(g)];
  const double s_worst = delta >= 0.0 ? s_known : s_known + free;
  return interpolate(v, g, s_worst);
}

double GeneralizedWalkKernel::ak_inf(int k) const {
  if (k == 0) {
    double s = 0.0;
    for (Letter g = 0; g < alphabet().size(); ++g) s += ak_bound(g, {});
    return s;
  }
  return 1.0 - free_mass(k) * max_tv_viable_;
}

bool GeneralizedWalkKernel::uniformly_null(Letter g, const Word& w) const {
  if (w.empty()) {
    for (Letter v = 0; v < alphabet().size(); ++v)
      if (arc(v, g)) return false;
    return true;
  }
  return !arc(w.at_depth(1), g);
}

bool GeneralizedWalkKernel::history_admissible(const HistorySpec& h) const {
  if (all_arcs_) return true;
  const int d = h.explicit_depth();
  const int bound = d + h.tail().period() + 1;
  for (int j = 1; j < bound; ++j)
    if (!arc(h.at_depth(j + 1), h.at_depth(j))) return false;
  return true;
}

std::optional<int> GeneralizedWalkKernel::finite_memory_order() const {
  if (params_.memory == 0) return std::nullopt;
  return std::max(params_.memory, 1);
}

double GeneralizedWalkKernel::eval_word(Letter g, const Word& w) const {
  if (params_.memory == 0) throw NotFiniteMemory(id() + ": memory = 0");
  const Letter v = w.at_depth(1);
  if (!arc(v, g)) return 0.0;
  double s = 0.0;
  const int top = std::min(w.length(), params_.memory);
  for (int i = 2; i <= top; ++i) s += weight(i) * ind(w.at_depth(i));
  return interpolate(v, g, s);
}

}  // namespace perfectsim
