#pragma once

#include <algorithm>
#include <cassert>
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
#include "rank1/random.hpp"

namespace rank1 {

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 1.0;
};

/// KL-UCB interval: all q with pulls * d(mean, q) <= budget.
struct KlInterval {
  static constexpr std::string_view name = "rank1elimkl";

  static ConfidenceInterval bounds(double mean, std::uint64_t pulls, double budget) {
    return {kl_ucb_lower(mean, pulls, budget), kl_ucb_upper(mean, pulls, budget)};
  }
};

/// Hoeffding interval mean +- sqrt(budget / (2 pulls)), clipped to [0,1].
struct HoeffdingInterval {
  static constexpr std::string_view name = "rank1elim";

  static double radius(std::uint64_t pulls, double budget) {
    return std::sqrt(budget / (2.0 * static_cast<double>(pulls)));
  }

  static ConfidenceInterval bounds(double mean, std::uint64_t pulls, double budget) {
    const double r = radius(pulls, budget);
    return {std::max(0.0, mean - r), std::min(1.0, mean + r)};
  }
};

/// Cumulative per-arm observation target after stage `stage`:
/// ceil(16 * 4^stage * log n).
inline std::uint64_t stage_target(std::uint64_t horizon, unsigned stage) {
  const double inv_gap_sq = std::ldexp(1.0, 2 * static_cast<int>(stage));
  return static_cast<std::uint64_t>(
      std::ceil(16.0 * inv_gap_sq * std::log(static_cast<double>(horizon))));
}

/// Redirects every arm whose current representative is dominated by the
/// leader (upper bound <= leader's lower bound) to the leader. `upper` and
/// `lower` are indexed by arm id; only entries of `remaining` are read.
/// Returns the leader: the remaining arm with the largest lower bound,
/// lowest id on ties.
inline std::size_t eliminate_dominated(std::vector<std::size_t>& redirect,
                                       std::span<const std::size_t> remaining,
                                       std::span<const double> upper,
                                       std::span<const double> lower) {
  assert(!remaining.empty());
  std::size_t leader = remaining.front();
  for (std::size_t a : remaining) {
    if (lower[a] > lower[leader]) leader = a;
  }
  const double bar = lower[leader];
  for (auto& h : redirect) {
    if (upper[h] <= bar) h = leader;
  }
  return leader;
}

/// Stage-wise elimination over rows and columns of a rank-1 bandit.
///
/// In stage l every remaining row is played (n_l - n_{l-1}) times against a
/// column drawn uniformly from [L] and mapped through the column redirect
/// table, and symmetrically for columns. Rows and columns whose confidence
/// interval falls below the leader's lower bound are then redirected to the
/// leader. The interval rule is the only difference between Rank1ElimKL and
/// the Hoeffding baseline.
template <typename Interval>
class Rank1Elim {
 public:
  struct StageSummary {
    unsigned stage = 0;
    std::uint64_t target = 0;
    std::vector<double> row_mean, row_lower, row_upper;  // indexed by row id
    std::vector<double> col_mean, col_lower, col_upper;
    std::size_t row_leader = 0;
    std::size_t col_leader = 0;
    std::vector<std::size_t> row_map_after;
    std::vector<std::size_t> col_map_after;
    std::uint64_t steps_at_end = 0;
  };

  Rank1Elim(std::size_t rows, std::size_t cols, std::uint64_t horizon, std::uint64_t seed)
      : rows_(rows),
        cols_(cols),
        horizon_(horizon),
        budget_(0.0),
        rng_(seed) {
    check_dims(rows, cols);
    check_horizon(horizon);
    budget_ = divergence_budget(horizon);
    row_counts_.assign(rows * cols, 0);
    col_counts_.assign(rows * cols, 0);
    row_map_.resize(rows);
    col_map_.resize(cols);
    for (std::size_t i = 0; i < rows; ++i) row_map_[i] = i;
    for (std::size_t j = 0; j < cols; ++j) col_map_[j] = j;
    begin_stage();
  }

  static constexpr std::string_view name() { return Interval::name; }

  ArmPair select() {
    if (steps_ >= horizon_) throw ProtocolError("select called past the horizon");
    if (!phase_drawn_) {
      if (phase_ == Phase::rows) {
        partner_ = col_map_[uniform_index(rng_, cols_)];
      } else {
        partner_ = row_map_[uniform_index(rng_, rows_)];
      }
      phase_drawn_ = true;
    }
    pending_ = phase_ == Phase::rows ? ArmPair{remaining_rows_[cursor_], partner_}
                                     : ArmPair{partner_, remaining_cols_[cursor_]};
    has_pending_ = true;
    return pending_;
  }

  void update(ArmPair arm, int reward) {
    if (!has_pending_ || !(arm == pending_)) {
      throw ProtocolError("update does not match the selected arm");
    }
    has_pending_ = false;
    ++steps_;
    const std::size_t cell = arm.row * cols_ + arm.col;
    if (phase_ == Phase::rows) {
      row_counts_[cell] += static_cast<std::uint64_t>(reward);
      if (++cursor_ == remaining_rows_.size()) {
        phase_ = Phase::cols;
        cursor_ = 0;
        phase_drawn_ = false;
      }
    } else {
      col_counts_[cell] += static_cast<std::uint64_t>(reward);
      if (++cursor_ == remaining_cols_.size()) {
        phase_ = Phase::rows;
        cursor_ = 0;
        phase_drawn_ = false;
        if (--rounds_left_ == 0) eliminate_and_advance();
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint64_t horizon() const { return horizon_; }
  std::uint64_t steps() const { return steps_; }
  unsigned stage() const { return stage_; }
  double gap_estimate() const { return std::ldexp(1.0, -static_cast<int>(stage_)); }
  std::uint64_t target() const { return target_; }
  std::uint64_t previous_target() const { return prev_target_; }
  double budget() const { return budget_; }
  const std::vector<std::size_t>& row_map() const { return row_map_; }
  const std::vector<std::size_t>& col_map() const { return col_map_; }
  const std::vector<std::size_t>& remaining_rows() const { return remaining_rows_; }
  const std::vector<std::size_t>& remaining_cols() const { return remaining_cols_; }
  std::uint64_t row_count(std::size_t i, std::size_t j) const { return row_counts_[i * cols_ + j]; }
  std::uint64_t col_count(std::size_t i, std::size_t j) const { return col_counts_[i * cols_ + j]; }
  const std::vector<StageSummary>& history() const { return history_; }

 private:
  enum class Phase { rows, cols };

  static std::vector<std::size_t> image_of(const std::vector<std::size_t>& map) {
    std::vector<std::size_t> out(map);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void begin_stage() {
    prev_target_ = target_;
    target_ = stage_target(horizon_, stage_);
    rounds_left_ = target_ - prev_target_;
    remaining_rows_ = image_of(row_map_);
    remaining_cols_ = image_of(col_map_);
    phase_ = Phase::rows;
    cursor_ = 0;
    phase_drawn_ = false;
  }

  void eliminate_and_advance() {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    StageSummary s;
    s.stage = stage_;
    s.target = target_;
    s.row_mean.assign(rows_, nan);
    s.row_lower.assign(rows_, nan);
    s.row_upper.assign(rows_, nan);
    s.col_mean.assign(cols_, nan);
    s.col_lower.assign(cols_, nan);
    s.col_upper.assign(cols_, nan);
    const double n = static_cast<double>(target_);

    for (std::size_t i : remaining_rows_) {
      std::uint64_t total = 0;
      for (std::size_t j = 0; j < cols_; ++j) total += row_counts_[i * cols_ + j];
      assert(total <= target_);
      s.row_mean[i] = static_cast<double>(total) / n;
      const auto ci = Interval::bounds(s.row_mean[i], target_, budget_);
      s.row_lower[i] = ci.lower;
      s.row_upper[i] = ci.upper;
    }
    for (std::size_t j : remaining_cols_) {
      std::uint64_t total = 0;
      for (std::size_t i = 0; i < rows_; ++i) total += col_counts_[i * cols_ + j];
      assert(total <= target_);
      s.col_mean[j] = static_cast<double>(total) / n;
      const auto ci = Interval::bounds(s.col_mean[j], target_, budget_);
      s.col_lower[j] = ci.lower;
      s.col_upper[j] = ci.upper;
    }

    s.row_leader = eliminate_dominated(row_map_, remaining_rows_, s.row_upper, s.row_lower);
    s.col_leader = eliminate_dominated(col_map_, remaining_cols_, s.col_upper, s.col_lower);
    s.row_map_after = row_map_;
    s.col_map_after = col_map_;
    s.steps_at_end = steps_;
    history_.push_back(std::move(s));

    ++stage_;
    begin_stage();
  }

  std::size_t rows_;
  std::size_t cols_;
  std::uint64_t horizon_;
  double budget_;
  Rng rng_;

  unsigned stage_ = 0;
  std::uint64_t target_ = 0;
  std::uint64_t prev_target_ = 0;
  std::uint64_t rounds_left_ = 0;
  std::uint64_t steps_ = 0;

  std::vector<std::uint64_t> row_counts_;  // K x L, row-major
  std::vector<std::uint64_t> col_counts_;
  std::vector<std::size_t> row_map_;
  std::vector<std::size_t> col_map_;
  std::vector<std::size_t> remaining_rows_;
  std::vector<std::size_t> remaining_cols_;

  Phase phase_ = Phase::rows;
  std::size_t cursor_ = 0;
  bool phase_drawn_ = false;
  std::size_t partner_ = 0;
  ArmPair pending_;
  bool has_pending_ = false;

  std::vector<StageSummary> history_;
};

using Rank1ElimKL = Rank1Elim<KlInterval>;
using Rank1ElimHoeffding = Rank1Elim<HoeffdingInterval>;

}  // namespace rank1
