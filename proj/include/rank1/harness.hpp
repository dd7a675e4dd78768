#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rank1/config.hpp"
#include "rank1/flat_policies.hpp"
#include "rank1/instance.hpp"
#include "rank1/random.hpp"
#include "rank1/rank1_elim.hpp"

namespace rank1 {

using AnyPolicy = std::variant<Rank1ElimKL, Rank1ElimHoeffding, Ucb1, Ucb1Elim, KlUcb>;

/// `seed` feeds the policy's private stream; only the elimination policies
/// draw from it.
inline AnyPolicy make_policy(PolicyKind kind, std::size_t rows, std::size_t cols,
                             std::uint64_t horizon, std::uint64_t seed) {
  switch (kind) {
    case PolicyKind::rank1elimkl: return Rank1ElimKL(rows, cols, horizon, seed);
    case PolicyKind::rank1elim: return Rank1ElimHoeffding(rows, cols, horizon, seed);
    case PolicyKind::ucb1: return Ucb1(rows, cols, horizon);
    case PolicyKind::ucb1elim: return Ucb1Elim(rows, cols, horizon);
    case PolicyKind::klucb: return KlUcb(rows, cols, horizon);
  }
  throw ConfigError("unknown policy");
}

// ---------------------------------------------------------------------------
// Single run

struct Checkpoint {
  std::uint64_t step = 0;
  double pseudo_regret = 0.0;      // cumulative
  double stochastic_regret = 0.0;  // cumulative

  bool operator==(const Checkpoint&) const = default;
};

struct RegretTrace {
  std::uint64_t run_index = 0;
  std::uint64_t env_seed = 0;
  std::uint64_t policy_seed = 0;
  std::vector<Checkpoint> checkpoints;

  bool operator==(const RegretTrace&) const = default;
};

/// Runs `horizon` select/step/update rounds, recording cumulative regrets
/// after each step listed in `checkpoints` (sorted, within [1, horizon]).
template <typename Policy>
std::vector<Checkpoint> simulate(Environment& env, Policy& policy, std::uint64_t horizon,
                                 Rng& env_rng, std::span<const std::uint64_t> checkpoints) {
  std::vector<Checkpoint> out;
  out.reserve(checkpoints.size());
  double pseudo = 0.0;
  std::int64_t stochastic = 0;
  auto next = checkpoints.begin();
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const ArmPair arm = policy.select();
    const StepOutcome o = env.step(arm.row, arm.col, env_rng);
    policy.update(arm, o.reward);
    pseudo += o.pseudo_regret;
    stochastic += o.stochastic_regret;
    while (next != checkpoints.end() && *next == t) {
      out.push_back({t, pseudo, static_cast<double>(stochastic)});
      ++next;
    }
  }
  return out;
}

inline std::uint64_t env_seed_for(const ExperimentConfig& c, std::uint64_t run_index) {
  return derive_seed(c.master_seed, run_index, StreamTag::env);
}

inline std::uint64_t policy_seed_for(const ExperimentConfig& c, std::uint64_t run_index) {
  return derive_seed(c.master_seed, run_index, StreamTag::policy);
}

inline RegretTrace run_one(const ExperimentConfig& config, const Rank1Instance& inst,
                           std::uint64_t run_index) {
  validate(config);
  RegretTrace trace;
  trace.run_index = run_index;
  trace.env_seed = env_seed_for(config, run_index);
  trace.policy_seed = policy_seed_for(config, run_index);
  const auto grid = effective_checkpoints(config);
  Environment env(inst);
  Rng env_rng(trace.env_seed);
  AnyPolicy policy =
      make_policy(config.policy, inst.rows(), inst.cols(), config.horizon, trace.policy_seed);
  trace.checkpoints = std::visit(
      [&](auto& p) { return simulate(env, p, config.horizon, env_rng, grid); }, policy);
  return trace;
}

inline RegretTrace run_one(const ExperimentConfig& config, std::uint64_t run_index) {
  return run_one(config, resolve_instance(config.instance), run_index);
}

// ---------------------------------------------------------------------------
// Aggregation

struct AggregateRow {
  std::uint64_t step = 0;
  double mean_pseudo_regret = 0.0;
  double stderr_pseudo_regret = 0.0;
  double mean_stochastic_regret = 0.0;
  double stderr_stochastic_regret = 0.0;

  bool operator==(const AggregateRow&) const = default;
};

struct AggregateResult {
  std::vector<AggregateRow> rows;
  nlohmann::json metadata;  // config echo and instance metrics; not part of the CSV
};

namespace detail {

/// Mean and standard error (sample sd / sqrt(n)); standard error is 0 for n = 1.
inline std::pair<double, double> mean_stderr(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

}  // namespace detail

/// Per-checkpoint mean and standard error; traces must share a grid and be
/// ordered by run index.
inline std::vector<AggregateRow> aggregate(std::span<const RegretTrace> traces) {
  std::vector<AggregateRow> out;
  if (traces.empty()) return out;
  const std::size_t points = traces.front().checkpoints.size();
  std::vector<double> pseudo(traces.size());
  std::vector<double> stochastic(traces.size());
  for (std::size_t k = 0; k < points; ++k) {
    AggregateRow row;
    row.step = traces.front().checkpoints[k].step;
    for (std::size_t r = 0; r < traces.size(); ++r) {
      const auto& c = traces[r].checkpoints.at(k);
      if (c.step != row.step) throw std::logic_error("traces disagree on checkpoint grid");
      pseudo[r] = c.pseudo_regret;
      stochastic[r] = c.stochastic_regret;
    }
    std::tie(row.mean_pseudo_regret, row.stderr_pseudo_regret) = detail::mean_stderr(pseudo);
    std::tie(row.mean_stochastic_regret, row.stderr_stochastic_regret) =
        detail::mean_stderr(stochastic);
    out.push_back(row);
  }
  return out;
}

inline nlohmann::json metrics_to_json(const HardnessMetrics& m) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isinf(x)) return "inf";
    return x;
  };
  return {{"mu", m.mu},
          {"p_max", m.p_max},
          {"gamma", m.gamma},
          {"min_row_gap", num(m.min_row_gap)},
          {"min_col_gap", num(m.min_col_gap)},
          {"best_row", m.best_row + 1},
          {"best_col", m.best_col + 1},
          {"best_value", m.best_value}};
}

/// Worker count used when the caller passes 0.
inline unsigned default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs every run index in [0, runs) and returns traces ordered by run
/// index. Up to `jobs` worker threads pull run indices from a shared
/// counter; the first error (by run index) is rethrown.
inline std::vector<RegretTrace> run_all(const ExperimentConfig& config, const Rank1Instance& inst,
                                        unsigned jobs = 0,
                                        const std::function<void(std::uint64_t)>& on_done = {}) {
  validate(config);
  if (jobs == 0) jobs = default_jobs();
  const std::uint64_t runs = config.runs;
  jobs = static_cast<unsigned>(std::min<std::uint64_t>(jobs, runs));
  std::vector<RegretTrace> traces(runs);
  std::vector<std::exception_ptr> errors(runs);
  std::atomic<std::uint64_t> next{0};
  std::mutex progress;
  auto worker = [&] {
    for (std::uint64_t r = next++; r < runs; r = next++) {
      try {
        traces[r] = run_one(config, inst, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
      if (on_done) {
        std::lock_guard lock(progress);
        on_done(r);
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return traces;
}

inline AggregateResult run_many(const ExperimentConfig& config, unsigned jobs = 0,
                                const std::function<void(std::uint64_t)>& on_done = {}) {
  const Rank1Instance inst = resolve_instance(config.instance);
  const auto traces = run_all(config, inst, jobs, on_done);
  AggregateResult result;
  result.rows = aggregate(traces);
  result.metadata = {{"config", config_to_json(config)},
                     {"metrics", metrics_to_json(compute_metrics(inst))}};
  return result;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCsvHeader =
    "step,mean_pseudo_regret,stderr_pseudo_regret,mean_stochastic_regret,stderr_stochastic_regret";

namespace detail {

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double read_real(const std::string& field, std::size_t line) {
  if (field.empty()) throw std::runtime_error("empty field on CSV line " + std::to_string(line));
  char* end = nullptr;
  const double x = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw std::runtime_error("malformed number '" + field + "' on CSV line " + std::to_string(line));
  }
  return x;
}

}  // namespace detail

inline void write_trace_csv(std::span<const AggregateRow> rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.step << ',' << detail::format_real(r.mean_pseudo_regret) << ','
        << detail::format_real(r.stderr_pseudo_regret) << ','
        << detail::format_real(r.mean_stochastic_regret) << ','
        << detail::format_real(r.stderr_stochastic_regret) << '\n';
  }
}

inline void write_trace_csv(const AggregateResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_trace_csv(result.rows, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline std::vector<AggregateRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("missing or unexpected CSV header");
  }
  std::vector<AggregateRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 5) {
      throw std::runtime_error("expected 5 fields on CSV line " + std::to_string(line_no));
    }
    AggregateRow r;
    const double step = detail::read_real(fields[0], line_no);
    if (step < 0 || step != std::floor(step)) {
      throw std::runtime_error("step is not a nonnegative integer on CSV line " +
                               std::to_string(line_no));
    }
    r.step = static_cast<std::uint64_t>(step);
    r.mean_pseudo_regret = detail::read_real(fields[1], line_no);
    r.stderr_pseudo_regret = detail::read_real(fields[2], line_no);
    r.mean_stochastic_regret = detail::read_real(fields[3], line_no);
    r.stderr_stochastic_regret = detail::read_real(fields[4], line_no);
    rows.push_back(r);
  }
  return rows;
}

inline AggregateResult read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  AggregateResult result;
  result.rows = read_trace_csv(in);
  return result;
}

}  // namespace rank1
