#include "perfectsim/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "perfectsim/kernels.hpp"

namespace perfectsim {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown field '" + it.key() + "'");
}

std::vector<double> as_doubles(const json& a, const std::string& where) {
  if (!a.is_array()) throw ConfigError(where + " must be an array");
  std::vector<double> v;
  for (const auto& x : a) v.push_back(x.get<double>());
  return v;
}

std::shared_ptr<const Kernel> make_alternating(const json& spec) {
  reject_unknown(spec,
                 {"type", "rule", "survival", "survival_limit", "survival_minus",
                  "survival_plus", "limit_minus", "limit_plus"},
                 "kernel(alternating_renewal)");
  if (spec.contains("rule")) {
    const std::string rule = spec.at("rule").get<std::string>();
    if (rule != "slow_sqrt")
      throw ConfigError("alternating_renewal: unknown rule '" + rule + "'");
    return std::make_shared<AlternatingRenewalKernel>(AlternatingRenewalKernel::slow_sqrt());
  }
  if (spec.contains("survival")) {
    return std::make_shared<AlternatingRenewalKernel>(AlternatingRenewalKernel::table_symmetric(
        as_doubles(spec.at("survival"), "survival"), spec.at("survival_limit").get<double>()));
  }
  AlternatingRenewalKernel::Params p;
  p.survival_minus = as_doubles(spec.at("survival_minus"), "survival_minus");
  p.survival_plus = as_doubles(spec.at("survival_plus"), "survival_plus");
  p.limit_minus = spec.at("limit_minus").get<double>();
  p.limit_plus = spec.at("limit_plus").get<double>();
  return std::make_shared<AlternatingRenewalKernel>(AlternatingRenewalKernel::table(std::move(p)));
}

std::shared_ptr<const Kernel> make_changepoint(const json& spec) {
  reject_unknown(spec, {"type", "p1", "c", "sigma", "alpha"}, "kernel(changepoint_binary)");
  return std::make_shared<ChangepointBinaryKernel>(
      spec.at("p1").get<double>(), spec.at("c").get<double>(), spec.at("sigma").get<double>(),
      spec.at("alpha").get<double>());
}

std::shared_ptr<const Kernel> make_walk(const json& spec) {
  reject_unknown(spec, {"type", "size", "labels", "arcs", "p_low", "p_high", "omega", "memory"},
                 "kernel(generalized_walk)");
  GeneralizedWalkKernel::Params p;
  if (spec.contains("labels")) {
    std::vector<std::string> labels;
    for (const auto& l : spec.at("labels")) labels.push_back(l.get<std::string>());
    p.alphabet = Alphabet(std::move(labels));
  } else {
    p.alphabet = Alphabet::indexed(spec.at("size").get<int>());
  }
  const auto n = static_cast<std::size_t>(p.alphabet.size());
  p.arcs.assign(n, std::vector<bool>(n, false));
  for (const auto& arc : spec.at("arcs")) {
    if (!arc.is_array() || arc.size() != 2) throw ConfigError("walk arcs must be [from,to] pairs");
    const auto w = arc[0].get<std::size_t>(), g = arc[1].get<std::size_t>();
    if (w >= n || g >= n) throw ConfigError("walk arc letter out of range");
    p.arcs[w][g] = true;
  }
  auto matrix = [&](const json& rows, const char* name) {
    if (!rows.is_array() || rows.size() != n)
      throw ConfigError(std::string(name) + " must be a |G|x|G| matrix");
    std::vector<std::vector<double>> m;
    for (const auto& r : rows) m.push_back(as_doubles(r, name));
    return m;
  };
  p.p_low = matrix(spec.at("p_low"), "p_low");
  p.p_high = matrix(spec.at("p_high"), "p_high");
  if (spec.contains("omega")) p.omega = spec.at("omega").get<double>();
  if (spec.contains("memory")) p.memory = spec.at("memory").get<int>();
  return std::make_shared<GeneralizedWalkKernel>(std::move(p));
}

}  // namespace

std::shared_ptr<const Kernel> make_kernel(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("type"))
    throw ConfigError("kernel spec must be an object with a 'type' field");
  const std::string type = spec.at("type").get<std::string>();
  if (type == "alternating_renewal") return make_alternating(spec);
  if (type == "changepoint_binary") return make_changepoint(spec);
  if (type == "generalized_walk") return make_walk(spec);
  throw ConfigError("unknown kernel type '" + type + "'");
}

RunConfig parse_run_config(const nlohmann::json& doc) {
  reject_unknown(doc,
                 {"kernel", "algorithm", "seed", "seeds", "window", "replicates", "max_back",
                  "depth_cap", "format", "reference_tail_letter", "threads", "check_n_max",
                  "diag_seeds", "diag_n", "audit_depth", "audit_histories"},
                 "config");
  RunConfig cfg;
  if (!doc.contains("kernel")) throw ConfigError("config: missing 'kernel'");
  cfg.kernel = make_kernel(doc.at("kernel"));
  cfg.kernel_spec = doc.at("kernel");

  if (doc.contains("algorithm")) {
    const std::string a = doc.at("algorithm").get<std::string>();
    if (a == "cff")
      cfg.algorithm = Algorithm::cff;
    else if (a == "adaptive")
      cfg.algorithm = Algorithm::adaptive;
    else if (a == "hybrid")
      cfg.algorithm = Algorithm::hybrid;
    else
      throw ConfigError("config: unknown algorithm '" + a + "'");
  }
  if (doc.contains("seed") && doc.contains("seeds"))
    throw ConfigError("config: give either 'seed' or 'seeds'");
  if (doc.contains("seed")) cfg.seed_lo = cfg.seed_hi = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("seeds")) {
    const auto& s = doc.at("seeds");
    if (!s.is_array() || s.size() != 2) throw ConfigError("config: 'seeds' must be [lo, hi]");
    cfg.seed_lo = s[0].get<std::uint64_t>();
    cfg.seed_hi = s[1].get<std::uint64_t>();
    if (cfg.seed_hi < cfg.seed_lo) throw ConfigError("config: seeds hi < lo");
  }
  if (doc.contains("replicates")) {
    if (doc.contains("seeds")) throw ConfigError("config: give either 'seeds' or 'replicates'");
    cfg.seed_hi = cfg.seed_lo + doc.at("replicates").get<std::uint64_t>() - 1;
  }
  if (doc.contains("window")) {
    const auto& w = doc.at("window");
    if (!w.is_array() || w.size() != 2) throw ConfigError("config: 'window' must be [m, n]");
    cfg.window_m = w[0].get<std::int64_t>();
    cfg.window_n = w[1].get<std::int64_t>();
    if (cfg.window_m > cfg.window_n)
      throw ConfigError("config: window requires m <= n", "window.invalid");
  }
  if (doc.contains("max_back")) cfg.sampler.max_back = doc.at("max_back").get<std::int64_t>();
  if (const char* env = std::getenv("PERFECTSIM_MAX_BACK"))
    cfg.sampler.max_back = std::strtoll(env, nullptr, 10);
  if (doc.contains("depth_cap")) cfg.sampler.depth_cap = doc.at("depth_cap").get<int>();
  if (cfg.sampler.max_back <= 0 || cfg.sampler.depth_cap <= 0)
    throw ConfigError("config: caps must be positive");
  if (doc.contains("reference_tail_letter"))
    cfg.sampler.reference_tail = doc.at("reference_tail_letter").get<Letter>();
  if (doc.contains("format")) {
    const std::string f = doc.at("format").get<std::string>();
    if (f == "csv")
      cfg.format = OutputFormat::csv;
    else if (f == "json")
      cfg.format = OutputFormat::json;
    else
      throw ConfigError("config: unknown format '" + f + "'");
  }
  if (doc.contains("threads")) cfg.threads = doc.at("threads").get<int>();
  if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
  if (doc.contains("check_n_max")) cfg.check_n_max = doc.at("check_n_max").get<int>();
  if (doc.contains("diag_seeds")) cfg.diag_seeds = doc.at("diag_seeds").get<std::uint64_t>();
  if (doc.contains("diag_n")) cfg.diag_n = doc.at("diag_n").get<int>();
  if (doc.contains("audit_depth")) cfg.audit_depth = doc.at("audit_depth").get<int>();
  if (doc.contains("audit_histories"))
    cfg.audit_histories = doc.at("audit_histories").get<int>();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_run_config(doc);
}

}  // namespace perfectsim
