// perfectsim: exact sampling from long-memory conditional kernels via
// backward coalescence.  Subcommands: sample, tau-stats, check, verify.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "perfectsim/config.hpp"
#include "perfectsim/hybrid.hpp"
#include "perfectsim/samplers.hpp"
#include "perfectsim/verify.hpp"

namespace ps = perfectsim;
using nlohmann::ordered_json;

namespace {

std::string letters_forward(const ps::Alphabet& alphabet, const ps::Word& w) {
  std::string out;
  const auto fw = w.forward_letters();
  for (std::size_t i = 0; i < fw.size(); ++i) {
    if (i) out += ' ';
    out += alphabet.label(fw[i]);
  }
  return out;
}

ordered_json letters_json(const ps::Alphabet& alphabet, const ps::Word& w) {
  ordered_json arr = ordered_json::array();
  for (ps::Letter g : w.forward_letters()) arr.push_back(alphabet.label(g));
  return arr;
}

struct Output {
  std::optional<std::string> path;
  std::ostream& stream() {
    if (!path) return std::cout;
    if (!file.is_open()) {
      file.open(*path);
      if (!file) throw ps::ConfigError("cannot open output file '" + *path + "'");
    }
    return file;
  }
  std::ofstream file;
};

// Run fn(seed) for every configured seed, in order, optionally on worker
// threads; results land in seed order.
template <class Result, class Fn>
std::vector<Result> run_replicates(const ps::RunConfig& cfg, Fn&& fn) {
  const std::uint64_t count = cfg.seed_hi - cfg.seed_lo + 1;
  std::vector<Result> results(count);
  if (cfg.threads <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) results[i] = fn(cfg.seed_lo + i);
    return results;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.threads));
  for (int t = 0; t < cfg.threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
          results[i] = fn(cfg.seed_lo + i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

int cmd_sample(const ps::RunConfig& cfg, Output& out) {
  const ps::Kernel& kernel = *cfg.kernel;
  auto runs = run_replicates<ps::SampleRun>(cfg, [&](std::uint64_t seed) {
    return ps::sample_window_seeded(kernel, cfg.algorithm, seed, cfg.window_m, cfg.window_n,
                                    cfg.sampler);
  });
  std::ostream& os = out.stream();
  if (cfg.format == ps::OutputFormat::csv) {
    os << "# perfectsim sample v1\n";
    os << "seed,m,n,tau,uniforms,letters\n";
    for (const auto& r : runs)
      os << r.seed << ',' << r.m << ',' << r.n << ',' << r.tau_window << ','
         << r.uniforms_consumed << ',' << letters_forward(kernel.alphabet(), r.letters) << '\n';
  } else {
    ordered_json arr = ordered_json::array();
    for (const auto& r : runs) {
      ordered_json o;
      o["seed"] = r.seed;
      o["window"] = {r.m, r.n};
      o["tau"] = r.tau_window;
      o["uniforms"] = r.uniforms_consumed;
      o["letters"] = letters_json(kernel.alphabet(), r.letters);
      o["kernel"] = r.kernel_id;
      o["algorithm"] = ps::algorithm_name(r.algorithm);
      arr.push_back(std::move(o));
    }
    os << arr.dump(2) << '\n';
  }
  return 0;
}

int cmd_tau_stats(const ps::RunConfig& cfg, Output& out) {
  const ps::Kernel& kernel = *cfg.kernel;
  struct Row {
    std::uint64_t seed = 0;
    std::int64_t tau = 0;
    bool coalesced = false;
    std::uint64_t uniforms = 0;
  };
  ps::AkSequence a_seq(kernel);
  std::optional<ps::ModifiedCoupling> coupling;
  if (cfg.algorithm == ps::Algorithm::hybrid) coupling.emplace(ps::ModifiedCoupling::build(kernel));
  auto rows = run_replicates<Row>(cfg, [&](std::uint64_t seed) {
    ps::SeededSource src(seed);
    ps::CoalescenceResult r;
    switch (cfg.algorithm) {
      case ps::Algorithm::cff: {
        ps::AkSequence local(kernel);
        r = ps::tau0_cff(kernel, local, src, 0, cfg.sampler);
        break;
      }
      case ps::Algorithm::adaptive:
        r = ps::tau0_adaptive(kernel, src, 0, cfg.sampler);
        break;
      case ps::Algorithm::hybrid: {
        ps::AkSequence local(kernel);
        r = ps::tau0_hybrid(kernel, *coupling, local, src, 0, cfg.sampler);
        break;
      }
    }
    return Row{seed, r.tau, r.status == ps::RunStatus::coalesced, r.uniforms_consumed};
  });
  std::ostream& os = out.stream();
  os << "# perfectsim tau-stats v1\n";
  os << "seed,anchor,tau,status,uniforms_consumed\n";
  bool any_cap = false;
  for (const auto& r : rows) {
    os << r.seed << ",0," << r.tau << ',' << (r.coalesced ? "coalesced" : "cap") << ','
       << r.uniforms << '\n';
    any_cap = any_cap || !r.coalesced;
  }
  if (any_cap) {
    std::cerr << "error: cap.exceeded: some scans hit the backward budget\n";
    return 2;
  }
  return 0;
}

int cmd_check(const ps::RunConfig& cfg, Output& out) {
  const ps::Kernel& kernel = *cfg.kernel;
  ordered_json rep;
  rep["kernel"] = cfg.kernel_spec;

  ps::AkSequence a_seq(kernel);
  const auto cond = ps::check_conditions(a_seq, cfg.check_n_max);
  rep["conditions"] = {{"n_max", cond.n_max},
                       {"partial_sum", cond.partial_sum},
                       {"partial_product", cond.partial_product},
                       {"log_partial_product", cond.log_partial_product},
                       {"partial_sum_from1", cond.partial_sum_from1},
                       {"tail_ratio", cond.tail_ratio},
                       {"tail_ratio_from1", cond.tail_ratio_from1},
                       {"condition_a_diverges", cond.condition_a_diverges},
                       {"condition_b_positive", cond.condition_b_positive},
                       {"condition_i_diverges", cond.condition_i_diverges},
                       {"heuristic", cond.heuristic}};

  try {
    const auto graph = ps::graph_conditions(kernel);
    ordered_json g;
    ordered_json comps = ordered_json::array();
    for (const auto& c : graph.components) comps.push_back(c);
    g["components"] = comps;
    g["closed_classes"] = graph.closed_classes;
    g["single_class"] = graph.single_class;
    g["period"] = graph.period;
    g["aperiodic"] = graph.aperiodic;
    g["condition_iii"] = graph.condition_iii;
    rep["graph"] = std::move(g);
  } catch (const ps::Error& e) {
    rep["graph"] = {{"unsupported", e.code()}};
  }

  try {
    const ps::Algorithm which =
        cfg.algorithm == ps::Algorithm::adaptive ? ps::Algorithm::adaptive : ps::Algorithm::cff;
    const auto regen =
        ps::regeneration_diagnostic(kernel, which, cfg.diag_seeds, cfg.diag_n, cfg.seed_lo,
                                    cfg.sampler);
    rep["regeneration"] = {{"algorithm", ps::algorithm_name(which)},
                           {"n_max", cfg.diag_n},
                           {"seeds", regen.seeds},
                           {"q_last", regen.q.back()},
                           {"q_last_lcb95", regen.q_last_lcb95}};
  } catch (const ps::Error& e) {
    rep["regeneration"] = {{"unsupported", e.code()}};
  }

  out.stream() << rep.dump(2) << '\n';
  return 0;
}

int cmd_verify(const ps::RunConfig& cfg, Output& out) {
  const ps::Kernel& kernel = *cfg.kernel;
  ordered_json rows = ordered_json::array();
  bool all_pass = true;
  auto add = [&](const std::string& test, double statistic, double threshold, bool pass) {
    rows.push_back(ordered_json{{"test", test},
                                {"statistic", statistic},
                                {"threshold", threshold},
                                {"pass", pass}});
    all_pass = all_pass && pass;
  };

  const auto audit = ps::measure_audit(kernel, cfg.audit_depth, cfg.audit_histories, cfg.seed_lo);
  add("measure_audit.max_discrepancy", audit.max_discrepancy, 1e-12,
      audit.max_discrepancy <= 1e-12);

  try {
    const auto oracle = ps::TruncatedChainOracle::build(kernel);
    const int L = 2;
    const auto expected = oracle.window_law(L);
    std::vector<std::uint64_t> counts(expected.size(), 0);
    const int n_letters = kernel.alphabet().size();
    ps::RunConfig sampling = cfg;  // diag_seeds replicates from seed_lo
    sampling.seed_hi = sampling.seed_lo + cfg.diag_seeds - 1;
    auto runs = run_replicates<ps::SampleRun>(sampling, [&](std::uint64_t seed) {
      return ps::sample_window_seeded(kernel, cfg.algorithm, seed, 0, L - 1, cfg.sampler);
    });
    for (const auto& r : runs) {
      std::size_t code = 0;
      for (ps::Letter g : r.letters.forward_letters())
        code = code * static_cast<std::size_t>(n_letters) + static_cast<std::size_t>(g);
      ++counts[code];
    }
    std::vector<double> empirical(expected.size(), 0.0);
    for (std::size_t i = 0; i < counts.size(); ++i)
      empirical[i] = static_cast<double>(counts[i]) / static_cast<double>(runs.size());
    add("oracle.window2_tv", ps::tv_distance(empirical, expected), 0.01,
        ps::tv_distance(empirical, expected) <= 0.01);
    const auto chi = ps::chi_square(counts, expected);
    add("oracle.window2_chi2_pvalue", chi.p_value, 1e-4, chi.p_value > 1e-4);
  } catch (const ps::Error& e) {
    rows.push_back(ordered_json{{"test", "oracle.window2"}, {"unsupported", e.code()}});
  }

  try {
    const auto mart = ps::martingale_diagnostic(kernel, cfg.diag_seeds, 20, cfg.seed_lo);
    const double dev = mart.stderr_ > 0.0 ? std::abs(mart.mean - 1.0) / mart.stderr_ : 0.0;
    add("martingale.y20_sigmas", dev, 3.0, dev <= 3.0);
  } catch (const ps::Error& e) {
    rows.push_back(ordered_json{{"test", "martingale.y20"}, {"unsupported", e.code()}});
  }

  ordered_json rep;
  rep["kernel"] = cfg.kernel_spec;
  rep["checks"] = std::move(rows);
  rep["pass"] = all_pass;
  out.stream() << rep.dump(2) << '\n';
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perfect simulation of long-memory processes"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::optional<std::string> seeds_flag;
  std::optional<std::string> out_path;
  std::optional<std::string> format_flag;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run config")->required();
    sub->add_option("--seed", seed_flag, "single seed (overrides config)");
    sub->add_option("--seeds", seeds_flag, "seed range LO..HI (overrides config)");
    sub->add_option("--out", out_path, "output path (default stdout)");
    sub->add_option("--format", format_flag, "csv or json");
  };

  CLI::App* sample = app.add_subcommand("sample", "perfect samples of a window");
  CLI::App* tau = app.add_subcommand("tau-stats", "backward coalescence time statistics");
  CLI::App* check = app.add_subcommand("check", "condition and graph report");
  CLI::App* verify = app.add_subcommand("verify", "exactness verification report");
  for (CLI::App* sub : {sample, tau, check, verify}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    ps::RunConfig cfg = ps::load_run_config(config_path);
    if (seed_flag) cfg.seed_lo = cfg.seed_hi = *seed_flag;
    if (seeds_flag) {
      const auto pos = seeds_flag->find("..");
      if (pos == std::string::npos)
        throw ps::ConfigError("--seeds expects LO..HI");
      cfg.seed_lo = std::stoull(seeds_flag->substr(0, pos));
      cfg.seed_hi = std::stoull(seeds_flag->substr(pos + 2));
      if (cfg.seed_hi < cfg.seed_lo) throw ps::ConfigError("--seeds hi < lo");
    }
    if (format_flag) {
      if (*format_flag == "csv")
        cfg.format = ps::OutputFormat::csv;
      else if (*format_flag == "json")
        cfg.format = ps::OutputFormat::json;
      else
        throw ps::ConfigError("--format must be csv or json");
    }
    Output out;
    out.path = out_path;
    if (sample->parsed()) return cmd_sample(cfg, out);
    if (tau->parsed()) return cmd_tau_stats(cfg, out);
    if (check->parsed()) return cmd_check(cfg, out);
    if (verify->parsed()) return cmd_verify(cfg, out);
    return 1;
  } catch (const ps::Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return e.code() == "cap.exceeded" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
}
