#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rank1/kl.hpp"
#include "rank1/random.hpp"

namespace rank1 {

/// Ground truth of a Bernoulli rank-1 bandit: row means u_bar (attraction)
/// and column means v_bar (examination). The expected reward of (i, j) is
/// u_bar[i] * v_bar[j]. Indices are 0-based throughout the library.
class Rank1Instance {
 public:
  Rank1Instance(std::vector<double> u_bar, std::vector<double> v_bar)
      : u_bar_(std::move(u_bar)), v_bar_(std::move(v_bar)) {
    if (u_bar_.empty() || v_bar_.empty()) {
      throw std::domain_error("instance needs at least one row and one column");
    }
    for (double x : u_bar_) check_probability(x, "row mean");
    for (double x : v_bar_) check_probability(x, "column mean");
  }

  std::size_t rows() const { return u_bar_.size(); }
  std::size_t cols() const { return v_bar_.size(); }
  const std::vector<double>& u_bar() const { return u_bar_; }
  const std::vector<double>& v_bar() const { return v_bar_; }
  double expected_reward(std::size_t i, std::size_t j) const { return u_bar_[i] * v_bar_[j]; }

  bool operator==(const Rank1Instance&) const = default;

 private:
  std::vector<double> u_bar_;
  std::vector<double> v_bar_;
};

/// One rewarding row and one rewarding column; everything else sits at the
/// base probability.
inline Rank1Instance needle_instance(std::size_t rows, std::size_t cols, double p_u, double p_v,
                                     double delta_u, double delta_v) {
  if (rows == 0 || cols == 0) throw std::domain_error("K and L must be positive");
  check_probability(p_u, "p_u");
  check_probability(p_v, "p_v");
  if (!(delta_u > 0.0) || !(delta_v > 0.0)) throw std::domain_error("gaps must be positive");
  if (p_u + delta_u > 1.0 || p_v + delta_v > 1.0) {
    throw std::domain_error("needle mean p + delta exceeds 1");
  }
  std::vector<double> u(rows, p_u);
  std::vector<double> v(cols, p_v);
  u[0] = p_u + delta_u;
  v[0] = p_v + delta_v;
  return Rank1Instance(std::move(u), std::move(v));
}

/// Geometrically decaying means head_mass * decay^k, sorted descending.
/// Shape resembles the sorted attraction/examination curves of fitted
/// position-based click models.
inline Rank1Instance pbm_like_instance(std::size_t rows, std::size_t cols, double head_mass,
                                       double decay) {
  if (rows == 0 || cols == 0) throw std::domain_error("K and L must be positive");
  if (!(head_mass >= 0.0) || !std::isfinite(head_mass)) {
    throw std::domain_error("head mass must be finite and nonnegative");
  }
  if (!(decay >= 0.0 && decay <= 1.0)) throw std::domain_error("decay must lie in [0,1]");
  auto curve = [&](std::size_t n) {
    std::vector<double> out(n);
    double x = head_mass;
    for (auto& o : out) {
      o = std::clamp(x, 0.0, 1.0);
      x *= decay;
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
  };
  return Rank1Instance(curve(rows), curve(cols));
}

// ---------------------------------------------------------------------------
// Hardness metrics

struct HardnessMetrics {
  std::vector<double> row_gaps;
  std::vector<double> col_gaps;
  double min_row_gap = 0.0;  // +inf when every row is optimal
  double min_col_gap = 0.0;
  double mu = 0.0;
  double p_max = 0.0;
  double gamma = 0.0;
  std::size_t best_row = 0;
  std::size_t best_col = 0;
  double best_value = 0.0;

  bool operator==(const HardnessMetrics&) const = default;
};

namespace detail {

inline std::size_t argmax_first(const std::vector<double>& xs) {
  return static_cast<std::size_t>(std::max_element(xs.begin(), xs.end()) - xs.begin());
}

inline double min_positive(const std::vector<double>& gaps) {
  double m = std::numeric_limits<double>::infinity();
  for (double g : gaps) {
    if (g > 0.0) m = std::min(m, g);
  }
  return m;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace detail

/// Means are nonnegative, so the largest product is u_max * v_max and row i
/// can reach it iff u[i] * v_max does. Ties (including rounding ties and the
/// all-zero case) go to the first pair in row-major order.
inline HardnessMetrics compute_metrics(const Rank1Instance& inst) {
  const auto& u = inst.u_bar();
  const auto& v = inst.v_bar();
  HardnessMetrics m;
  const std::size_t i_star = detail::argmax_first(u);
  const std::size_t j_star = detail::argmax_first(v);
  m.best_value = u[i_star] * v[j_star];
  m.best_row = 0;
  while (u[m.best_row] * v[j_star] != m.best_value) ++m.best_row;
  m.best_col = 0;
  while (u[m.best_row] * v[m.best_col] != m.best_value) ++m.best_col;
  m.row_gaps.resize(u.size());
  m.col_gaps.resize(v.size());
  for (std::size_t i = 0; i < u.size(); ++i) m.row_gaps[i] = u[i_star] - u[i];
  for (std::size_t j = 0; j < v.size(); ++j) m.col_gaps[j] = v[j_star] - v[j];
  m.min_row_gap = detail::min_positive(m.row_gaps);
  m.min_col_gap = detail::min_positive(m.col_gaps);
  m.mu = std::min(detail::mean(u), detail::mean(v));
  m.p_max = std::max(u[i_star], v[j_star]);
  m.gamma = std::max(m.mu, 1.0 - m.p_max);
  return m;
}

// ---------------------------------------------------------------------------
// Instance files: {"u": [...], "v": [...]}

class InstanceFileError : public std::runtime_error {
 public:
  enum class Kind { missing_file, parse_error, schema, empty_dimension, out_of_range };

  InstanceFileError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline Rank1Instance instance_from_json(const nlohmann::json& doc) {
  using Kind = InstanceFileError::Kind;
  if (!doc.is_object()) throw InstanceFileError(Kind::schema, "instance must be an object");
  auto read = [&](const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_array()) {
      throw InstanceFileError(Kind::schema, std::string("missing array \"") + key + "\"");
    }
    const auto& arr = doc.at(key);
    if (arr.empty()) {
      throw InstanceFileError(Kind::empty_dimension, std::string("array \"") + key + "\" is empty");
    }
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& x : arr) {
      if (!x.is_number()) {
        throw InstanceFileError(Kind::schema, std::string("non-numeric entry in \"") + key + "\"");
      }
      const double val = x.get<double>();
      if (!(val >= 0.0 && val <= 1.0)) {
        std::ostringstream msg;
        msg << "entry " << val << " in \"" << key << "\" lies outside [0,1]";
        throw InstanceFileError(Kind::out_of_range, msg.str());
      }
      out.push_back(val);
    }
    return out;
  };
  auto u = read("u");
  auto v = read("v");
  return Rank1Instance(std::move(u), std::move(v));
}

inline Rank1Instance load_instance(const std::string& path) {
  using Kind = InstanceFileError::Kind;
  std::ifstream in(path);
  if (!in) throw InstanceFileError(Kind::missing_file, "cannot open instance file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw InstanceFileError(Kind::parse_error, path + ": " + e.what());
  }
  return instance_from_json(doc);
}

inline nlohmann::json instance_to_json(const Rank1Instance& inst) {
  return nlohmann::json{{"u", inst.u_bar()}, {"v", inst.v_bar()}};
}

inline void save_instance(const Rank1Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file " + path);
  out << instance_to_json(inst).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Environment

struct StepOutcome {
  int reward = 0;
  double pseudo_regret = 0.0;
  int stochastic_regret = 0;
};

/// Samples one round of the rank-1 bandit. Draws the full row vector then the
/// full column vector (K + L Bernoulli draws, in that order) so the
/// stochastic regret against the best pair uses the same realisation.
class Environment {
 public:
  explicit Environment(const Rank1Instance& inst)
      : inst_(inst),
        metrics_(compute_metrics(inst)),
        u_draw_(inst.rows()),
        v_draw_(inst.cols()) {}

  StepOutcome step(std::size_t i, std::size_t j, Rng& rng) {
    if (i >= inst_.rows() || j >= inst_.cols()) {
      throw std::domain_error("arm index out of bounds");
    }
    const auto& u = inst_.u_bar();
    const auto& v = inst_.v_bar();
    for (std::size_t k = 0; k < u.size(); ++k) u_draw_[k] = bernoulli(rng, u[k]) ? 1 : 0;
    for (std::size_t k = 0; k < v.size(); ++k) v_draw_[k] = bernoulli(rng, v[k]) ? 1 : 0;
    StepOutcome out;
    out.reward = u_draw_[i] * v_draw_[j];
    out.pseudo_regret = metrics_.best_value - u[i] * v[j];
    out.stochastic_regret = u_draw_[metrics_.best_row] * v_draw_[metrics_.best_col] - out.reward;
    return out;
  }

  const Rank1Instance& instance() const { return inst_; }
  const HardnessMetrics& metrics() const { return metrics_; }

 private:
  const Rank1Instance& inst_;
  HardnessMetrics metrics_;
  std::vector<int> u_draw_;
  std::vector<int> v_draw_;
};

inline StepOutcome env_step(const Rank1Instance& inst, std::size_t i, std::size_t j, Rng& rng) {
  return Environment(inst).step(i, j, rng);
}

}  // namespace rank1
