#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rank1/instance.hpp"
#include "rank1/policy_common.hpp"

namespace rank1 {

/// Malformed configuration or instance spec (as opposed to a parameter that
/// parses but violates a domain constraint).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Instance specs

struct NeedleSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double p_u = 0.25;
  double p_v = 0.25;
  double delta_u = 0.5;
  double delta_v = 0.5;

  bool operator==(const NeedleSpec&) const = default;
};

struct PbmSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double head_mass = 0.85;
  double decay = 0.6;

  bool operator==(const PbmSpec&) const = default;
};

struct FileSpec {
  std::string path;

  bool operator==(const FileSpec&) const = default;
};

using InstanceSpec = std::variant<NeedleSpec, PbmSpec, FileSpec>;

inline Rank1Instance resolve_instance(const InstanceSpec& spec) {
  struct Visitor {
    Rank1Instance operator()(const NeedleSpec& s) const {
      return needle_instance(s.rows, s.cols, s.p_u, s.p_v, s.delta_u, s.delta_v);
    }
    Rank1Instance operator()(const PbmSpec& s) const {
      return pbm_like_instance(s.rows, s.cols, s.head_mass, s.decay);
    }
    Rank1Instance operator()(const FileSpec& s) const { return load_instance(s.path); }
  };
  return std::visit(Visitor{}, spec);
}

/// Same generator with K and L replaced. File specs cannot be resized.
inline InstanceSpec resize_spec(const InstanceSpec& spec, std::size_t rows, std::size_t cols) {
  if (const auto* n = std::get_if<NeedleSpec>(&spec)) {
    auto out = *n;
    out.rows = rows;
    out.cols = cols;
    return out;
  }
  if (const auto* p = std::get_if<PbmSpec>(&spec)) {
    auto out = *p;
    out.rows = rows;
    out.cols = cols;
    return out;
  }
  throw ConfigError("an instance file has fixed dimensions and cannot be resized");
}

namespace detail {

inline double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double x = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("value of " + key + " is not a number: '" + text + "'");
  }
}

inline std::size_t parse_size(const std::string& key, const std::string& text) {
  const bool digits = !text.empty() && std::all_of(text.begin(), text.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
  if (!digits) throw ConfigError("value of " + key + " is not a nonnegative integer: '" + text + "'");
  return static_cast<std::size_t>(std::stoull(text));
}

inline std::map<std::string, std::string> parse_kv_list(std::string_view body) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t end = std::min(body.find(',', pos), body.size());
    const std::string_view item = body.substr(pos, end - pos);
    if (!item.empty()) {
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("expected key=value, got '" + std::string(item) + "'");
      }
      out[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace detail

/// Parses an inline instance spec:
///   needle:K=32,L=32,p=0.25,gap=0.5       (also p_u, p_v, delta_u, delta_v)
///   pbm-like:K=16,L=16,head=0.85,decay=0.6
///   file:PATH   or just PATH
inline InstanceSpec parse_instance_spec(std::string_view text) {
  const std::size_t colon = text.find(':');
  const std::string_view kind = colon == std::string_view::npos ? "" : text.substr(0, colon);
  if (kind != "needle" && kind != "pbm-like") {
    if (kind == "file") return FileSpec{std::string(text.substr(colon + 1))};
    return FileSpec{std::string(text)};
  }
  auto kv = detail::parse_kv_list(text.substr(colon + 1));
  auto take = [&](std::initializer_list<const char*> keys) -> std::optional<std::string> {
    std::optional<std::string> found;
    for (const char* k : keys) {
      if (auto it = kv.find(k); it != kv.end()) {
        found = it->second;
        kv.erase(it);
      }
    }
    return found;
  };
  auto size_of = [&](const char* key) {
    auto v = take({key});
    if (!v) throw ConfigError(std::string(kind) + " spec needs " + key);
    return detail::parse_size(key, *v);
  };

  InstanceSpec out;
  if (kind == "needle") {
    NeedleSpec s;
    s.rows = size_of("K");
    s.cols = size_of("L");
    if (auto v = take({"p"})) s.p_u = s.p_v = detail::parse_real("p", *v);
    if (auto v = take({"gap"})) s.delta_u = s.delta_v = detail::parse_real("gap", *v);
    if (auto v = take({"p_u"})) s.p_u = detail::parse_real("p_u", *v);
    if (auto v = take({"p_v"})) s.p_v = detail::parse_real("p_v", *v);
    if (auto v = take({"delta_u"})) s.delta_u = detail::parse_real("delta_u", *v);
    if (auto v = take({"delta_v"})) s.delta_v = detail::parse_real("delta_v", *v);
    out = s;
  } else {
    PbmSpec s;
    s.rows = size_of("K");
    s.cols = size_of("L");
    if (auto v = take({"head", "head_mass"})) s.head_mass = detail::parse_real("head", *v);
    if (auto v = take({"decay"})) s.decay = detail::parse_real("decay", *v);
    out = s;
  }
  if (!kv.empty()) throw ConfigError("unknown key '" + kv.begin()->first + "' in instance spec");
  return out;
}

inline std::string format_instance_spec(const InstanceSpec& spec) {
  auto num = [](double x) { return nlohmann::json(x).dump(); };
  if (const auto* n = std::get_if<NeedleSpec>(&spec)) {
    return "needle:K=" + std::to_string(n->rows) + ",L=" + std::to_string(n->cols) +
           ",p_u=" + num(n->p_u) + ",p_v=" + num(n->p_v) + ",delta_u=" + num(n->delta_u) +
           ",delta_v=" + num(n->delta_v);
  }
  if (const auto* p = std::get_if<PbmSpec>(&spec)) {
    return "pbm-like:K=" + std::to_string(p->rows) + ",L=" + std::to_string(p->cols) +
           ",head=" + num(p->head_mass) + ",decay=" + num(p->decay);
  }
  return "file:" + std::get<FileSpec>(spec).path;
}

// ---------------------------------------------------------------------------
// Policies

enum class PolicyKind { rank1elimkl, rank1elim, ucb1, ucb1elim, klucb };

inline constexpr std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::rank1elimkl: return "rank1elimkl";
    case PolicyKind::rank1elim: return "rank1elim";
    case PolicyKind::ucb1: return "ucb1";
    case PolicyKind::ucb1elim: return "ucb1elim";
    case PolicyKind::klucb: return "klucb";
  }
  return "?";
}

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::rank1elimkl, PolicyKind::rank1elim,
                                              PolicyKind::ucb1, PolicyKind::ucb1elim,
                                              PolicyKind::klucb};

inline PolicyKind parse_policy(std::string_view name) {
  for (PolicyKind k : kAllPolicies) {
    if (policy_name(k) == name) return k;
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Experiment config

struct ExperimentConfig {
  InstanceSpec instance;
  PolicyKind policy = PolicyKind::rank1elimkl;
  std::uint64_t horizon = 0;
  std::uint64_t runs = 1;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> checkpoints;  // empty: default grid

  bool operator==(const ExperimentConfig&) const = default;
};

/// 200 roughly log-spaced steps in [1, n) plus n itself. Steps are forced
/// strictly increasing, so horizons of 200 or less get every step 1..n.
inline std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon) {
  constexpr std::uint64_t kPoints = 200;
  std::vector<std::uint64_t> out;
  if (horizon <= kPoints) {
    for (std::uint64_t s = 1; s <= horizon; ++s) out.push_back(s);
    return out;
  }
  const double log_n = std::log(static_cast<double>(horizon));
  std::uint64_t prev = 0;
  for (std::uint64_t k = 0; k < kPoints; ++k) {
    const auto x = static_cast<std::uint64_t>(
        std::floor(std::exp(log_n * static_cast<double>(k) / static_cast<double>(kPoints))));
    prev = std::max(prev + 1, x);
    out.push_back(prev);
  }
  out.push_back(horizon);
  return out;
}

/// Checkpoints every `stride` steps, always ending at n.
inline std::vector<std::uint64_t> strided_checkpoints(std::uint64_t horizon, std::uint64_t stride) {
  if (stride == 0) throw ConfigError("checkpoint stride must be positive");
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = stride; s < horizon; s += stride) out.push_back(s);
  out.push_back(horizon);
  return out;
}

inline std::vector<std::uint64_t> effective_checkpoints(const ExperimentConfig& config) {
  return config.checkpoints.empty() ? default_checkpoints(config.horizon) : config.checkpoints;
}

inline void validate(const ExperimentConfig& config) {
  check_horizon(config.horizon);
  if (config.runs == 0) throw std::domain_error("runs must be at least 1");
  std::uint64_t prev = 0;
  for (std::uint64_t c : config.checkpoints) {
    if (c <= prev || c > config.horizon) {
      throw std::domain_error("checkpoints must be strictly increasing within [1, horizon]");
    }
    prev = c;
  }
}

inline nlohmann::json instance_spec_to_json(const InstanceSpec& spec) {
  if (const auto* n = std::get_if<NeedleSpec>(&spec)) {
    return {{"generator", "needle"}, {"K", n->rows},         {"L", n->cols},
            {"p_u", n->p_u},         {"p_v", n->p_v},        {"delta_u", n->delta_u},
            {"delta_v", n->delta_v}};
  }
  if (const auto* p = std::get_if<PbmSpec>(&spec)) {
    return {{"generator", "pbm-like"}, {"K", p->rows}, {"L", p->cols},
            {"head_mass", p->head_mass}, {"decay", p->decay}};
  }
  return {{"file", std::get<FileSpec>(spec).path}};
}

inline InstanceSpec instance_spec_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_instance_spec(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("instance must be an object or an inline spec string");
  try {
    if (j.contains("file")) return FileSpec{j.at("file").get<std::string>()};
    const auto gen = j.at("generator").get<std::string>();
    if (gen == "needle") {
      NeedleSpec s;
      s.rows = j.at("K").get<std::size_t>();
      s.cols = j.at("L").get<std::size_t>();
      s.p_u = j.value("p_u", s.p_u);
      s.p_v = j.value("p_v", s.p_v);
      s.delta_u = j.value("delta_u", s.delta_u);
      s.delta_v = j.value("delta_v", s.delta_v);
      return s;
    }
    if (gen == "pbm-like") {
      PbmSpec s;
      s.rows = j.at("K").get<std::size_t>();
      s.cols = j.at("L").get<std::size_t>();
      s.head_mass = j.value("head_mass", s.head_mass);
      s.decay = j.value("decay", s.decay);
      return s;
    }
    throw ConfigError("unknown generator '" + gen + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad instance spec: ") + e.what());
  }
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"instance", instance_spec_to_json(c.instance)},
          {"policy", {{"name", policy_name(c.policy)}}},
          {"horizon", c.horizon},
          {"runs", c.runs},
          {"master_seed", c.master_seed},
          {"checkpoints", effective_checkpoints(c)}};
}

/// Accepts {"instance": ..., "policy": "name" | {"name": ...}, "horizon": n,
/// "runs": r, "master_seed": s, "checkpoints": [...] | "checkpoint_stride": k}.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be an object");
  ExperimentConfig c;
  try {
    c.instance = instance_spec_from_json(j.at("instance"));
    const auto& pol = j.at("policy");
    c.policy = parse_policy(pol.is_object() ? pol.at("name").get<std::string>()
                                            : pol.get<std::string>());
    c.horizon = j.at("horizon").get<std::uint64_t>();
    c.runs = j.value("runs", std::uint64_t{1});
    c.master_seed = j.value("master_seed", std::uint64_t{0});
    if (j.contains("checkpoints")) {
      c.checkpoints = j.at("checkpoints").get<std::vector<std::uint64_t>>();
    } else if (j.contains("checkpoint_stride")) {
      c.checkpoints = strided_checkpoints(c.horizon, j.at("checkpoint_stride").get<std::uint64_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace rank1
