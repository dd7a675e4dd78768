// rank1bandit: instance generation, hardness metrics and regret experiments
// for Bernoulli rank-1 bandits.
//
// Exit codes: 0 success, 1 domain or runtime error, 2 usage error.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rank1/rank1.hpp"

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;
constexpr const char* kJobsEnv = "RANK1_JOBS";

constexpr const char* kInstanceHelp =
    "Instance file, or an inline generator spec:\n"
    "  needle:K=32,L=32,p=0.25,gap=0.5   (p_u, p_v, delta_u, delta_v also accepted)\n"
    "  pbm-like:K=16,L=16,head=0.85,decay=0.6\n"
    "  file:PATH";

std::string shortest(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

unsigned resolve_jobs(unsigned flag) {
  if (flag != 0) return flag;
  if (const char* env = std::getenv(kJobsEnv); env != nullptr && *env != '\0') {
    try {
      const unsigned long v = std::stoul(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid " << kJobsEnv << "='" << env << "'\n";
  }
  return rank1::default_jobs();
}

std::vector<std::string> policy_names() {
  std::vector<std::string> out;
  for (auto k : rank1::kAllPolicies) out.emplace_back(rank1::policy_name(k));
  return out;
}

// Thrown for flag values that parse but are malformed (bad inline spec).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

rank1::InstanceSpec instance_flag(const std::string& text) {
  try {
    return rank1::parse_instance_spec(text);
  } catch (const rank1::ConfigError& e) {
    throw UsageError(std::string("--instance: ") + e.what());
  }
}

// --- gen-instance ------------------------------------------------------------

struct GenOptions {
  std::string kind;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double p_u = 0.25, p_v = 0.25, delta_u = 0.5, delta_v = 0.5;
  double head_mass = 0.85, decay = 0.6;
  std::string out;
};

void add_gen(CLI::App& app, GenOptions& o) {
  auto* cmd = app.add_subcommand("gen-instance", "Write an instance file from a generator");
  cmd->add_option("--kind", o.kind, "Generator")
      ->required()
      ->check(CLI::IsMember({"needle", "pbm-like"}));
  cmd->add_option("--K", o.rows, "Number of rows")->required();
  cmd->add_option("--L", o.cols, "Number of columns")->required();
  cmd->add_option("--p-u", o.p_u, "needle: base row mean")->capture_default_str();
  cmd->add_option("--p-v", o.p_v, "needle: base column mean")->capture_default_str();
  cmd->add_option("--delta-u", o.delta_u, "needle: row gap")->capture_default_str();
  cmd->add_option("--delta-v", o.delta_v, "needle: column gap")->capture_default_str();
  cmd->add_option("--head-mass", o.head_mass, "pbm-like: largest mean")->capture_default_str();
  cmd->add_option("--decay", o.decay, "pbm-like: geometric decay")->capture_default_str();
  cmd->add_option("--out", o.out, "Output path")->required();
}

int cmd_gen_instance(const GenOptions& o) {
  const rank1::Rank1Instance inst =
      o.kind == "needle"
          ? rank1::needle_instance(o.rows, o.cols, o.p_u, o.p_v, o.delta_u, o.delta_v)
          : rank1::pbm_like_instance(o.rows, o.cols, o.head_mass, o.decay);
  rank1::save_instance(inst, o.out);
  return 0;
}

// --- metrics -----------------------------------------------------------------

struct MetricsOptions {
  std::string instance;
};

void add_metrics(CLI::App& app, MetricsOptions& o) {
  auto* cmd = app.add_subcommand("metrics", "Print hardness metrics of an instance");
  cmd->add_option("--instance", o.instance, kInstanceHelp)->required();
}

int cmd_metrics(const MetricsOptions& o) {
  const auto inst = rank1::resolve_instance(instance_flag(o.instance));
  const auto m = rank1::compute_metrics(inst);
  std::cout << "K = " << inst.rows() << '\n'
            << "L = " << inst.cols() << '\n'
            << "mu = " << shortest(m.mu) << '\n'
            << "p_max = " << shortest(m.p_max) << '\n'
            << "gamma = " << shortest(m.gamma) << '\n'
            << "min_row_gap = " << shortest(m.min_row_gap) << '\n'
            << "min_col_gap = " << shortest(m.min_col_gap) << '\n'
            << "best_row = " << m.best_row + 1 << '\n'
            << "best_col = " << m.best_col + 1 << '\n'
            << "best_value = " << shortest(m.best_value) << '\n';
  return 0;
}

// --- run ---------------------------------------------------------------------

struct RunOptions {
  std::string config;
  std::string instance;
  std::string policy;
  std::uint64_t horizon = 0;
  std::uint64_t runs = 20;
  std::uint64_t seed = 0;
  std::uint64_t stride = 0;
  std::string out;
  std::string meta;
  unsigned jobs = 0;
};

void add_run(CLI::App& app, RunOptions& o) {
  auto* cmd = app.add_subcommand("run", "Run one policy on one instance and write a regret CSV");
  auto* config = cmd->add_option("--config", o.config, "Experiment config file (JSON)");
  auto* instance = cmd->add_option("--instance", o.instance, kInstanceHelp);
  auto* policy = cmd->add_option("--policy", o.policy, "Policy")->check(CLI::IsMember(policy_names()));
  auto* horizon = cmd->add_option("--horizon", o.horizon, "Horizon n (>= 5)");
  auto* runs = cmd->add_option("--runs", o.runs, "Independent runs")->capture_default_str();
  auto* seed = cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  auto* stride = cmd->add_option("--checkpoint-stride", o.stride,
                                 "Record every k steps instead of the default log-spaced grid");
  for (auto* opt : {instance, policy, horizon, runs, seed, stride}) opt->excludes(config);
  cmd->add_option("--out", o.out, "Output CSV path")->required();
  cmd->add_option("--meta", o.meta, "Also write run metadata (JSON) here");
  cmd->add_option("--jobs", o.jobs, std::string("Worker threads (default: $") + kJobsEnv +
                                        " or logical processors)");
}

rank1::ExperimentConfig run_config(const RunOptions& o) {
  if (!o.config.empty()) return rank1::load_config(o.config);
  if (o.instance.empty() || o.policy.empty() || o.horizon == 0) {
    throw UsageError("run needs --instance, --policy and --horizon (or --config)");
  }
  rank1::ExperimentConfig c;
  c.instance = instance_flag(o.instance);
  c.policy = rank1::parse_policy(o.policy);
  c.horizon = o.horizon;
  c.runs = o.runs;
  c.master_seed = o.seed;
  rank1::check_horizon(c.horizon);
  if (o.stride != 0) c.checkpoints = rank1::strided_checkpoints(c.horizon, o.stride);
  rank1::validate(c);
  return c;
}

rank1::AggregateResult execute(const rank1::ExperimentConfig& c, unsigned jobs,
                               const std::string& label) {
  std::uint64_t done = 0;
  auto progress = [&](std::uint64_t) {
    ++done;
    std::cerr << '\r' << label << ": " << done << '/' << c.runs << " runs" << std::flush;
  };
  auto result = rank1::run_many(c, jobs, progress);
  std::cerr << '\n';
  return result;
}

int cmd_run(const RunOptions& o) {
  const auto config = run_config(o);
  const auto result = execute(config, resolve_jobs(o.jobs), std::string(rank1::policy_name(config.policy)));
  rank1::write_trace_csv(result, o.out);
  if (!o.meta.empty()) {
    std::ofstream meta(o.meta);
    if (!meta) throw std::runtime_error("cannot open " + o.meta + " for writing");
    meta << result.metadata.dump(2) << '\n';
  }
  return 0;
}

// --- sweep -------------------------------------------------------------------

struct SweepOptions {
  std::string instance = "needle:K=8,L=8,p=0.25,gap=0.5";
  std::vector<std::size_t> sizes;
  std::vector<std::string> policies;
  std::uint64_t horizon = 0;
  std::uint64_t runs = 20;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  unsigned jobs = 0;
};

void add_sweep(CLI::App& app, SweepOptions& o) {
  auto* cmd = app.add_subcommand("sweep", "Run every (policy, K=L size) cell; one CSV per cell");
  cmd->add_option("--instance", o.instance,
                  "Generator template; K and L are replaced by each size (needle or pbm-like)")
      ->capture_default_str();
  cmd->add_option("--sizes", o.sizes, "Comma-separated K=L values")->required()->delimiter(',');
  cmd->add_option("--policies", o.policies, "Comma-separated policies")
      ->required()
      ->delimiter(',')
      ->check(CLI::IsMember(policy_names()));
  cmd->add_option("--horizon", o.horizon, "Horizon n (>= 5)")->required();
  cmd->add_option("--runs", o.runs, "Independent runs per cell")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Master seed shared by all cells")->capture_default_str();
  cmd->add_option("--out-dir", o.out_dir, "Directory for {policy}_{K}x{L}.csv")
      ->capture_default_str();
  cmd->add_option("--jobs", o.jobs, std::string("Worker threads (default: $") + kJobsEnv +
                                        " or logical processors)");
}

template <typename T>
std::vector<T> dedup_keep_order(const std::vector<T>& xs, const char* what) {
  std::vector<T> out;
  std::set<T> seen;
  for (const auto& x : xs) {
    if (seen.insert(x).second) {
      out.push_back(x);
    } else {
      std::cerr << "warning: duplicate " << what << " " << x << " ignored\n";
    }
  }
  return out;
}

int cmd_sweep(const SweepOptions& o) {
  const auto base = instance_flag(o.instance);
  if (std::holds_alternative<rank1::FileSpec>(base)) {
    throw UsageError("sweep --instance must be a needle or pbm-like generator spec");
  }
  const auto sizes = dedup_keep_order(o.sizes, "size");
  const auto policies = dedup_keep_order(o.policies, "policy");
  const unsigned jobs = resolve_jobs(o.jobs);
  rank1::check_horizon(o.horizon);
  if (!std::filesystem::is_directory(o.out_dir)) {
    throw std::runtime_error("output directory " + o.out_dir + " does not exist");
  }
  for (const std::size_t size : sizes) {
    for (const auto& name : policies) {
      rank1::ExperimentConfig c;
      c.instance = rank1::resize_spec(base, size, size);
      c.policy = rank1::parse_policy(name);
      c.horizon = o.horizon;
      c.runs = o.runs;
      c.master_seed = o.seed;
      const std::string stem = name + "_" + std::to_string(size) + "x" + std::to_string(size);
      const auto result = execute(c, jobs, stem);
      rank1::write_trace_csv(result, (std::filesystem::path(o.out_dir) / (stem + ".csv")).string());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bernoulli rank-1 bandit experiments"};
  app.require_subcommand(1);
  GenOptions gen;
  MetricsOptions metrics;
  RunOptions run;
  SweepOptions sweep;
  add_gen(app, gen);
  add_metrics(app, metrics);
  add_run(app, run);
  add_sweep(app, sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("gen-instance")) return cmd_gen_instance(gen);
    if (app.got_subcommand("metrics")) return cmd_metrics(metrics);
    if (app.got_subcommand("run")) return cmd_run(run);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}
