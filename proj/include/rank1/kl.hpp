#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace rank1 {

inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
  }
}

/// Bernoulli KL divergence d(p,q) in nats, extended continuously to the
/// boundary. Returns +inf when q sits on a boundary that p does not.
inline double kl_div(double p, double q) {
  check_probability(p, "p");
  check_probability(q, "q");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (p == q) return 0.0;
  if (p == 0.0) return q == 1.0 ? inf : -std::log1p(-q);
  if (p == 1.0) return q == 0.0 ? inf : -std::log(q);
  if (q == 0.0 || q == 1.0) return inf;
  const double d = p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  // cancellation can leave a tiny negative residue when p ~ q
  return d > 0.0 ? d : 0.0;
}

namespace detail {

constexpr int kBisectionSteps = 100;

inline void check_bound_args(double mu_hat, std::uint64_t pulls, double delta) {
  check_probability(mu_hat, "mu_hat");
  if (pulls == 0) throw std::domain_error("pulls must be positive");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::domain_error("divergence budget must be finite and nonnegative");
  }
}

}  // namespace detail

/// Largest q in [mu_hat, 1] with pulls * d(mu_hat, q) <= delta.
///
/// d(mu_hat, .) is convex and increasing on [mu_hat, 1], so the feasible set
/// is an interval and a fixed-length bisection pins its right end.
inline double kl_ucb_upper(double mu_hat, std::uint64_t pulls, double delta) {
  detail::check_bound_args(mu_hat, pulls, delta);
  if (mu_hat == 1.0 || delta == 0.0) return mu_hat;
  const double budget = delta / static_cast<double>(pulls);
  double lo = mu_hat;
  double hi = 1.0;
  for (int k = 0; k < detail::kBisectionSteps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (kl_div(mu_hat, mid) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

/// Smallest q in [0, mu_hat] with pulls * d(mu_hat, q) <= delta.
inline double kl_ucb_lower(double mu_hat, std::uint64_t pulls, double delta) {
  detail::check_bound_args(mu_hat, pulls, delta);
  if (mu_hat == 0.0 || delta == 0.0) return mu_hat;
  const double budget = delta / static_cast<double>(pulls);
  double lo = 0.0;
  double hi = mu_hat;
  for (int k = 0; k < detail::kBisectionSteps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (kl_div(mu_hat, mid) <= budget) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Divergence budget log n + 3 log log n used by the elimination policies.
inline double divergence_budget(std::uint64_t horizon) {
  const double ln = std::log(static_cast<double>(horizon));
  return ln + 3.0 * std::log(ln);
}

}  // namespace rank1
