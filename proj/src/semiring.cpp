#include "svrnn/semiring.hpp"

#include <stdexcept>

namespace svrnn {

LogScore log_mul(LogScore a, LogScore b) {
  assert(!std::isnan(a) && !std::isnan(b));
  if (std::isinf(a) && std::isinf(b) && (a > 0) != (b > 0)) {
    throw std::domain_error("log_mul: +inf and -inf cannot be combined");
  }
  return a + b;
}

LogScore log_sum(std::span<const LogScore> values) {
  // Streaming form: rescale the running sum whenever a new maximum appears.
  LogScore m = kLogZero;
  double acc = 0.0;
  for (LogScore v : values) {
    assert(!std::isnan(v));
    if (v == kLogZero) continue;
    if (v == std::numeric_limits<double>::infinity()) return v;
    if (v <= m) {
      acc += std::exp(v - m);
    } else {
      acc = acc * std::exp(m - v) + 1.0;
      m = v;
    }
  }
  if (m == kLogZero) return kLogZero;
  return m + std::log(acc);
}

}  // namespace svrnn
