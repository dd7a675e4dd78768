// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rank1/rank1.hpp"

namespace fs = std::filesystem;
using namespace rank1;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++failures;
  std::printf("criterion %d [%s] %s: %s (%.2fs)\n", id, v.pass ? "PASS" : "FAIL", title,
              v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// --- 1 ---------------------------------------------------------------------

Verdict kl_properties() {
  const auto start = std::chrono::steady_clock::now();
  constexpr double slack = -1e-12;
  double worst_pinsker = 1.0, worst_lower = 1.0, worst_upper = 1.0, worst_pinsker_scaled = 1.0;
  for (int a = 1; a <= 99; ++a) {
    for (int b = 1; b <= 99; ++b) {
      const double p = a / 100.0, q = b / 100.0;
      worst_pinsker = std::min(worst_pinsker, kl_div(p, q) - 2.0 * (p - q) * (p - q));
    }
  }
  for (int ci = 1; ci < 20; ++ci) {
    for (int pi = 1; pi < 20; ++pi) {
      for (int qi = 1; qi < 20; ++qi) {
        const double c = ci / 20.0, p = pi / 20.0, q = qi / 20.0;
        const double d = kl_div(p, q);
        const double scaled = kl_div(c * p, c * q);
        const double m = std::max(p, q);
        worst_lower = std::min(worst_lower, scaled - c * (1.0 - m) * d);
        worst_upper = std::min(worst_upper, c * d - scaled);
        worst_pinsker_scaled = std::min(
            worst_pinsker_scaled, scaled - 2.0 * c * std::max(c, 1.0 - m) * (p - q) * (p - q));
      }
    }
  }
  const double secs = seconds_since(start);
  const bool ok = worst_pinsker >= slack && worst_lower >= slack && worst_upper >= slack &&
                  worst_pinsker_scaled >= slack && secs < 1.0;
  return {ok, fmt("min slack pinsker=%.3g scaled-lower=%.3g scaled-upper=%.3g "
                  "scaled-pinsker=%.3g, %.3fs < 1s",
                  worst_pinsker, worst_lower, worst_upper, worst_pinsker_scaled, secs)};
}

// --- 2 ---------------------------------------------------------------------

// pulls uniform on {1, ..., 10^4}; mu uniform on [0,1); delta uniform on (0, 30].
Verdict confidence_solver() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20170101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int violations = 0, below_mean = 0, at_resolution_limit = 0;
  double max_err = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double mu = unit(rng);
    const std::uint64_t pulls = 1 + rng() % 10000;
    const double delta = 30.0 * (1.0 - unit(rng));
    const double upper = kl_ucb_upper(mu, pulls, delta);
    const double n = static_cast<double>(pulls);
    const double err = std::abs(n * kl_div(mu, upper) - delta);
    max_err = std::max(max_err, err);
    if (upper < mu) ++below_mean;
    if (err > 1e-9) {
      ++violations;
      // neither bracketing double meets the tolerance
      const double next = std::nextafter(upper, 2.0);
      if (std::abs(n * kl_div(mu, next) - delta) > 1e-9) ++at_resolution_limit;
    }
  }
  double max_closed = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::uint64_t pulls = 1 + rng() % 10000;
    const double delta = 30.0 * (1.0 - unit(rng));
    const double n = static_cast<double>(pulls);
    max_closed = std::max(max_closed, std::abs(kl_ucb_upper(0.0, pulls, delta) - (1.0 - std::exp(-delta / n))));
    max_closed = std::max(max_closed, std::abs(kl_ucb_upper(1.0, pulls, delta) - 1.0));
    max_closed = std::max(max_closed, std::abs(kl_ucb_lower(1.0, pulls, delta) - std::exp(-delta / n)));
    max_closed = std::max(max_closed, std::abs(kl_ucb_lower(0.0, pulls, delta)));
  }
  const double secs = seconds_since(start);
  const bool ok = violations == 0 && below_mean == 0 && max_closed <= 1e-12 && secs < 1.0;
  return {ok, fmt("%d/10000 triples with |pulls*d(mu,U)-delta| > 1e-9 (%d of them have no "
                  "double within tolerance), max error %.3g, U < mu: %d, closed-form max error "
                  "%.3g, %.3fs < 1s",
                  violations, at_resolution_limit, max_err, below_mean, max_closed, secs)};
}

// --- 3 ---------------------------------------------------------------------

Verdict elimination_correctness() {
  const auto start = std::chrono::steady_clock::now();
  const auto inst = needle_instance(8, 8, 0.25, 0.25, 0.5, 0.5);
  constexpr std::uint64_t horizon = 100000;
  ExperimentConfig config;
  config.instance = NeedleSpec{8, 8, 0.25, 0.25, 0.5, 0.5};
  config.horizon = horizon;
  config.master_seed = 3;
  int exact = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    Environment env(inst);
    Rng env_rng(env_seed_for(config, r));
    Rank1ElimKL policy(8, 8, horizon, policy_seed_for(config, r));
    const std::vector<std::uint64_t> grid = {horizon};
    simulate(env, policy, horizon, env_rng, grid);
    const std::vector<std::size_t> best = {0};
    exact += policy.remaining_rows() == best && policy.remaining_cols() == best;
  }
  const double secs = seconds_since(start);
  return {exact >= 18 && secs < 10.0,
          fmt("%d/20 runs end with I={1}, J={1} (need >= 18), %.2fs < 10s", exact, secs)};
}

// --- 4, 5, 6, 9 --------------------------------------------------------------

constexpr std::uint64_t kLongHorizon = 1000000;
constexpr std::uint64_t kRuns = 20;
constexpr std::uint64_t kSeed = 2017;

struct FinalRegret {
  double mean = 0.0;
  double stderr_ = 0.0;
};

FinalRegret final_regret(const InstanceSpec& spec, PolicyKind policy) {
  static std::map<std::pair<std::string, PolicyKind>, FinalRegret> cache;
  const auto key = std::make_pair(format_instance_spec(spec), policy);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  ExperimentConfig c;
  c.instance = spec;
  c.policy = policy;
  c.horizon = kLongHorizon;
  c.runs = kRuns;
  c.master_seed = kSeed;
  c.checkpoints = {kLongHorizon};
  const auto rows = aggregate(run_all(c, resolve_instance(spec)));
  const FinalRegret out{rows.back().mean_pseudo_regret, rows.back().stderr_pseudo_regret};
  std::fprintf(stderr, "  %-12s %-40s final pseudo-regret %.1f +- %.1f\n",
               std::string(policy_name(policy)).c_str(), key.first.c_str(), out.mean, out.stderr_);
  return cache[key] = out;
}

InstanceSpec needle(std::size_t size) { return NeedleSpec{size, size, 0.25, 0.25, 0.5, 0.5}; }

Verdict doubling_ratio(PolicyKind policy, double lo, double hi) {
  const double r8 = final_regret(needle(8), policy).mean;
  const double r16 = final_regret(needle(16), policy).mean;
  const double ratio = r16 / r8;
  return {ratio >= lo && ratio <= hi,
          fmt("R(16)/R(8) = %.1f/%.1f = %.3f, need [%.1f, %.1f]", r16, r8, ratio, lo, hi)};
}

Verdict ordering(const InstanceSpec& spec, const std::vector<PolicyKind>& rivals, double factor) {
  const double ours = final_regret(spec, PolicyKind::rank1elimkl).mean;
  std::string detail = fmt("rank1elimkl %.1f", ours);
  bool ok = true;
  for (auto k : rivals) {
    const double theirs = final_regret(spec, k).mean;
    ok = ok && (factor == 1.0 ? ours < theirs : ours <= factor * theirs);
    detail += fmt(" vs %s %.1f", std::string(policy_name(k)).c_str(), theirs);
  }
  return {ok, detail};
}

// Geometric curves with head 0.85 (the largest mean) and the decay that
// puts the average curve value at 0.13.
PbmSpec query_like_spec() {
  constexpr std::size_t size = 16;
  const double head = 0.85;
  auto mean_of = [&](double decay) {
    const auto inst = pbm_like_instance(size, size, head, decay);
    return compute_metrics(inst).mu;
  };
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 100; ++k) {
    const double mid = 0.5 * (lo + hi);
    (mean_of(mid) < 0.13 ? lo : hi) = mid;
  }
  return {size, size, head, lo};
}

Verdict query_like() {
  const PbmSpec spec = query_like_spec();
  const auto m = compute_metrics(resolve_instance(spec));
  auto v = ordering(spec, {PolicyKind::ucb1}, 1.1);
  v.detail = fmt("decay=%.4f mu=%.3f p_max=%.3f gamma=%.3f; need rank1elimkl <= 1.1 x ucb1: ",
                 spec.decay, m.mu, m.p_max, m.gamma) +
             v.detail;
  return v;
}

// --- 7 ---------------------------------------------------------------------

Verdict oracle_equivalence() {
  std::mt19937_64 rng(77);
  int agree = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 6;
    std::vector<double> u(rows), v(cols);
    // coarse values so ties are common
    for (auto& x : u) x = static_cast<double>(rng() % 9) / 8.0;
    for (auto& x : v) x = static_cast<double>(rng() % 9) / 8.0;
    const Rank1Instance inst(u, v);
    std::size_t bi = 0, bj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        if (u[i] * v[j] > best) {
          best = u[i] * v[j];
          bi = i;
          bj = j;
        }
      }
    }
    const auto m = compute_metrics(inst);
    agree += m.best_row == bi && m.best_col == bj && m.best_value == best;
  }
  return {agree == 100, fmt("%d/100 instances match brute force exactly", agree)};
}

// --- 8 ---------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "rank1_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string args =
      " run --instance needle:K=8,L=8,p=0.25,gap=0.5 --policy rank1elimkl --horizon 100000 "
      "--runs 4 --seed 12 2>/dev/null --out ";
  std::vector<std::string> outputs;
  for (const char* name : {"a.csv", "b.csv"}) {
    const std::string cmd = std::string("'") + RANK1_CLI_PATH + "'" + args + "'" +
                            (dir / name).string() + "'";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      return {false, "cli run failed: " + cmd};
    }
    outputs.push_back(slurp(dir / name));
  }
  fs::remove_all(dir);
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, fmt("two runs wrote %zu and %zu bytes, %s", outputs[0].size(), outputs[1].size(),
                    same ? "byte-identical" : "different")};
}

}  // namespace

int main() {
  std::printf("acceptance: %llu runs per configuration, n = %llu for the regret criteria\n",
              static_cast<unsigned long long>(kRuns), static_cast<unsigned long long>(kLongHorizon));
  report(1, "KL property suite", kl_properties);
  report(2, "confidence-bound solver", confidence_solver);
  report(3, "elimination correctness", elimination_correctness);
  report(7, "oracle equivalence", oracle_equivalence);
  report(8, "determinism", determinism);
  report(4, "Rank1ElimKL regret scaling in K+L",
         [] { return doubling_ratio(PolicyKind::rank1elimkl, 1.4, 3.0); });
  report(5, "UCB1 regret scaling", [] { return doubling_ratio(PolicyKind::ucb1, 2.5, 5.5); });
  report(6, "ordering at K=L=16", [] {
    return ordering(needle(16), {PolicyKind::ucb1, PolicyKind::ucb1elim, PolicyKind::rank1elim},
                    1.0);
  });
  report(9, "query-like instance vs UCB1", query_like);
  std::printf("acceptance: %d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
