#pragma once

#include <cassert>
#include <cmath>
#include <limits>
#include <span>

namespace svrnn {

/// A score in the log semifield: natural-log value, -inf is semiring zero and
/// 0.0 is semiring one.
using LogScore = double;

inline constexpr LogScore kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr LogScore kLogOne = 0.0;

inline bool is_log_zero(LogScore a) { return a == kLogZero; }

/// log(exp(a) + exp(b)) with max subtraction. -inf is the identity and +inf
/// absorbs.
inline LogScore log_add(LogScore a, LogScore b) {
  assert(!std::isnan(a) && !std::isnan(b));
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  if (a == std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

/// a + b. Throws std::domain_error when +inf meets -inf.
LogScore log_mul(LogScore a, LogScore b);

/// n-ary log_add in one max-subtracted pass over the values. Empty input is
/// semiring zero.
LogScore log_sum(std::span<const LogScore> values);

}  // namespace svrnn
