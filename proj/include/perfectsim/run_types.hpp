#ifndef PERFECTSIM_RUN_TYPES_HPP
#define PERFECTSIM_RUN_TYPES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "perfectsim/alphabet.hpp"
#include "perfectsim/coupling.hpp"

namespace perfectsim {

enum class Algorithm { cff, adaptive, hybrid };

std::string algorithm_name(Algorithm a);

enum class RunStatus { coalesced, depth_cap_hit };

struct SamplerOptions {
  std::int64_t max_back = 10000000;  // backward uniforms scanned before giving up
  int depth_cap = kDefaultDepthCap;  // band depth cap for K and eval_f
  Letter reference_tail = 0;         // constant reference-history letter (when admissible)
  std::int64_t trace_cap = 100000;   // depth-trace entries retained
};

struct DepthTraceEntry {
  std::int64_t time;
  int depth;  // K_j (or K'_j) at that time
};

struct CoalescenceResult {
  std::int64_t anchor = 0;
  std::int64_t tau = 0;
  RunStatus status = RunStatus::coalesced;
  std::uint64_t uniforms_consumed = 0;
  std::vector<DepthTraceEntry> depth_trace;
  // Hybrid runs also record the witness block [tau, merge_end].
  std::int64_t merge_end = 0;
};

struct SampleRun {
  std::uint64_t seed = 0;
  std::int64_t m = 0, n = 0;
  std::int64_t tau_window = 0;
  Word letters;  // most recent first; serialize oldest-first
  std::string kernel_id;
  Algorithm algorithm = Algorithm::cff;
  std::uint64_t uniforms_consumed = 0;
};

}  // namespace perfectsim

#endif
