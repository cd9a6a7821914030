#pragma once

// Forward-mode tangent arithmetic over the log semifield. The marginal
// Jacobian of a log-partition DP is its Hessian, which is symmetric, so a
// tangent pass seeded with the upstream direction yields the exact
// vector-Jacobian product.

#include <cmath>

#include "svrnn/semiring.hpp"

namespace svrnn::detail {

struct Dual {
  double v = kLogZero;
  double d = 0.0;
};

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

inline double mul(double a, double b) { return a + b; }
inline Dual mul(const Dual& a, const Dual& b) {
  if (a.v == kLogZero || b.v == kLogZero) return Dual{kLogZero, 0.0};
  return Dual{a.v + b.v, a.d + b.d};
}

inline double add(double a, double b) { return log_add(a, b); }
inline Dual add(const Dual& a, const Dual& b) {
  if (a.v == kLogZero) return b;
  if (b.v == kLogZero) return a;
  const double v = log_add(a.v, b.v);
  return Dual{v, a.d * std::exp(a.v - v) + b.d * std::exp(b.v - v)};
}

inline void accumulate(double& acc, double x) { acc = log_add(acc, x); }
inline void accumulate(Dual& acc, const Dual& x) { acc = add(acc, x); }

/// exp(x - log_z) as a probability and its tangent.
inline double prob(double x, double log_z) { return std::exp(x - log_z); }
inline Dual prob(const Dual& x, const Dual& log_z) {
  if (x.v == kLogZero) return Dual{0.0, 0.0};
  const double p = std::exp(x.v - log_z.v);
  return Dual{p, p * (x.d - log_z.d)};
}

template <typename T>
T make_score(double value, double tangent);

template <>
inline double make_score<double>(double value, double) {
  return value;
}
template <>
inline Dual make_score<Dual>(double value, double tangent) {
  return Dual{value, value == kLogZero ? 0.0 : tangent};
}

}  // namespace svrnn::detail
