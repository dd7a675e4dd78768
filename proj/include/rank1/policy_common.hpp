#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rank1 {

struct ArmPair {
  std::size_t row = 0;
  std::size_t col = 0;

  bool operator==(const ArmPair&) const = default;
};

/// Misuse of the select/update protocol: selecting past the horizon or
/// updating an arm other than the one just selected.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Smallest horizon the policies accept; log log n must be positive.
inline constexpr std::uint64_t kMinHorizon = 5;

inline void check_horizon(std::uint64_t horizon) {
  if (horizon < kMinHorizon) {
    throw std::domain_error("horizon must be at least " + std::to_string(kMinHorizon) + ", got " +
                            std::to_string(horizon));
  }
}

inline void check_dims(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::domain_error("K and L must be positive");
}

}  // namespace rank1
