#ifndef PERFECTSIM_CONFIG_HPP
#define PERFECTSIM_CONFIG_HPP

#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "perfectsim/kernel.hpp"
#include "perfectsim/run_types.hpp"

namespace perfectsim {

enum class OutputFormat { csv, json };

struct RunConfig {
  std::shared_ptr<const Kernel> kernel;
  nlohmann::ordered_json kernel_spec;  // echoed into reports
  Algorithm algorithm = Algorithm::cff;
  std::uint64_t seed_lo = 1, seed_hi = 1;  // inclusive
  std::int64_t window_m = 0, window_n = 0;
  SamplerOptions sampler;
  OutputFormat format = OutputFormat::csv;
  int threads = 1;
  int check_n_max = 10000;       // horizon for the condition report
  std::uint64_t diag_seeds = 100000;  // replicates for diagnostics
  int diag_n = 50;               // horizon for martingale/regeneration
  int audit_depth = 20;
  int audit_histories = 1000;
};

// Construct a kernel from {"type": ..., parameters...}; unknown fields are
// rejected.
std::shared_ptr<const Kernel> make_kernel(const nlohmann::json& spec);

// Parse the full run config (strict).  max_back may be overridden by the
// PERFECTSIM_MAX_BACK environment variable.
RunConfig parse_run_config(const nlohmann::json& doc);

RunConfig load_run_config(const std::string& path);

}  // namespace perfectsim

#endif
