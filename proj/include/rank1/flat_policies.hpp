#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "rank1/kl.hpp"
#include "rank1/policy_common.hpp"

// Baselines that ignore the rank-1 structure and treat each of the K*L
// row-column pairs as an independent arm. Arm a corresponds to
// (a / L, a % L).

namespace rank1 {

/// First index of the maximum; NaN-free input assumed.
inline std::size_t argmax_lowest(std::span<const double> xs) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < xs.size(); ++a) {
    if (xs[a] > xs[best]) best = a;
  }
  return best;
}

namespace detail {

/// Pull counts, reward sums and the select/update handshake shared by the
/// flat baselines.
class FlatArms {
 public:
  FlatArms(std::size_t rows, std::size_t cols, std::uint64_t horizon)
      : rows_(rows), cols_(cols), horizon_(horizon) {
    check_dims(rows, cols);
    check_horizon(horizon);
    pulls_.assign(rows * cols, 0);
    sums_.assign(rows * cols, 0);
  }

  std::size_t arms() const { return pulls_.size(); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint64_t horizon() const { return horizon_; }
  std::uint64_t steps() const { return steps_; }
  std::uint64_t pulls(std::size_t a) const { return pulls_[a]; }
  std::uint64_t reward_sum(std::size_t a) const { return sums_[a]; }
  double mean(std::size_t a) const {
    return static_cast<double>(sums_[a]) / static_cast<double>(pulls_[a]);
  }

  ArmPair to_pair(std::size_t a) const { return {a / cols_, a % cols_}; }

 protected:
  ArmPair offer(std::size_t a) {
    if (steps_ >= horizon_) throw ProtocolError("select called past the horizon");
    pending_ = a;
    has_pending_ = true;
    return to_pair(a);
  }

  std::size_t accept(ArmPair arm, int reward) {
    if (!has_pending_ || !(arm == to_pair(pending_))) {
      throw ProtocolError("update does not match the selected arm");
    }
    has_pending_ = false;
    ++steps_;
    ++pulls_[pending_];
    sums_[pending_] += static_cast<std::uint64_t>(reward);
    return pending_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::uint64_t horizon_;
  std::uint64_t steps_ = 0;
  std::vector<std::uint64_t> pulls_;
  std::vector<std::uint64_t> sums_;
  std::size_t pending_ = 0;
  bool has_pending_ = false;
};

}  // namespace detail

/// UCB1: one sweep over all arms, then argmax of mean + sqrt(2 log t / T_a).
class Ucb1 : public detail::FlatArms {
 public:
  Ucb1(std::size_t rows, std::size_t cols, std::uint64_t horizon)
      : FlatArms(rows, cols, horizon), index_(rows * cols) {}

  static constexpr std::string_view name() { return "ucb1"; }

  ArmPair select() {
    if (steps() < arms()) return offer(steps());
    const double log_t = std::log(static_cast<double>(steps()));
    for (std::size_t a = 0; a < arms(); ++a) {
      index_[a] = mean(a) + std::sqrt(2.0 * log_t / static_cast<double>(pulls(a)));
    }
    return offer(argmax_lowest(index_));
  }

  void update(ArmPair arm, int reward) { accept(arm, reward); }

 private:
  std::vector<double> index_;
};

/// Flat KL-UCB with exploration budget log t.
class KlUcb : public detail::FlatArms {
 public:
  KlUcb(std::size_t rows, std::size_t cols, std::uint64_t horizon)
      : FlatArms(rows, cols, horizon), index_(rows * cols) {}

  static constexpr std::string_view name() { return "klucb"; }

  ArmPair select() {
    if (steps() < arms()) return offer(steps());
    const double log_t = std::log(static_cast<double>(steps()));
    for (std::size_t a = 0; a < arms(); ++a) index_[a] = kl_ucb_upper(mean(a), pulls(a), log_t);
    return offer(argmax_lowest(index_));
  }

  void update(ArmPair arm, int reward) { accept(arm, reward); }

 private:
  std::vector<double> index_;
};

/// Improved-UCB style elimination over flat arms. Round m uses gap guess
/// 2^-m; every candidate is sampled up to ceil(2 log(n g^2) / g^2) pulls,
/// then arms with mean + r < max_b(mean_b - r) are dropped, where
/// r = sqrt(log(n g^2) / (2 target)). Once n g^2 <= e the remaining
/// candidates are played round-robin until the horizon.
class Ucb1Elim : public detail::FlatArms {
 public:
  Ucb1Elim(std::size_t rows, std::size_t cols, std::uint64_t horizon)
      : FlatArms(rows, cols, horizon) {
    candidates_.resize(arms());
    for (std::size_t a = 0; a < arms(); ++a) candidates_[a] = a;
    target_ = round_target(horizon, gap_);
  }

  static constexpr std::string_view name() { return "ucb1elim"; }

  /// ceil(2 log(n g^2) / g^2), or 0 once the round schedule has ended.
  static std::uint64_t round_target(std::uint64_t horizon, double gap) {
    const double log_term = std::log(static_cast<double>(horizon) * gap * gap);
    if (log_term <= 1.0) return 0;
    return static_cast<std::uint64_t>(std::ceil(2.0 * log_term / (gap * gap)));
  }

  ArmPair select() {
    if (target_ == 0) {
      // final phase: cycle through survivors
      cursor_ %= candidates_.size();
      return offer(candidates_[cursor_]);
    }
    while (pulls(candidates_[cursor_]) >= target_) {
      cursor_ = (cursor_ + 1) % candidates_.size();
    }
    return offer(candidates_[cursor_]);
  }

  void update(ArmPair arm, int reward) {
    accept(arm, reward);
    cursor_ = (cursor_ + 1) % candidates_.size();
    // a later round can ask for fewer pulls than already taken; skip ahead
    while (target_ != 0 && round_complete()) end_round();
  }

  unsigned round() const { return round_; }
  double gap_estimate() const { return gap_; }
  std::uint64_t target() const { return target_; }
  const std::vector<std::size_t>& candidates() const { return candidates_; }

 private:
  bool round_complete() const {
    for (std::size_t a : candidates_) {
      if (pulls(a) < target_) return false;
    }
    return true;
  }

  void end_round() {
    const double log_term = std::log(static_cast<double>(horizon()) * gap_ * gap_);
    const double radius = std::sqrt(log_term / (2.0 * static_cast<double>(target_)));
    double best_lower = -std::numeric_limits<double>::infinity();
    for (std::size_t a : candidates_) best_lower = std::max(best_lower, mean(a) - radius);
    std::vector<std::size_t> kept;
    kept.reserve(candidates_.size());
    for (std::size_t a : candidates_) {
      if (!(mean(a) + radius < best_lower)) kept.push_back(a);
    }
    candidates_ = std::move(kept);
    cursor_ = 0;
    ++round_;
    gap_ *= 0.5;
    target_ = round_target(horizon(), gap_);
  }

  std::vector<std::size_t> candidates_;
  std::size_t cursor_ = 0;
  unsigned round_ = 0;
  double gap_ = 1.0;
  std::uint64_t target_ = 0;
};

}  // namespace rank1
