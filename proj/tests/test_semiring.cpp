#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "doctest.h"
#include "svrnn/semiring.hpp"

using svrnn::kLogZero;
using svrnn::log_add;
using svrnn::log_mul;
using svrnn::log_sum;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

namespace {

// High-precision log(sum(exp(v))) evaluated without max subtraction.
double precise_log_sum(const std::vector<double>& v) {
  BigFloat acc = 0;
  for (double x : v) acc += boost::multiprecision::exp(BigFloat(x));
  return static_cast<double>(boost::multiprecision::log(acc));
}

}  // namespace

TEST_CASE("log_add identities") {
  CHECK(log_add(kLogZero, 3.5) == 3.5);
  CHECK(log_add(-2.0, kLogZero) == -2.0);
  CHECK(log_add(kLogZero, kLogZero) == kLogZero);
  CHECK(log_add(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(log_add(inf, 4.0) == inf);
  CHECK(log_add(kLogZero, inf) == inf);
}

TEST_CASE("log_add near the underflow edge stays finite") {
  const double got = log_add(-745.0, -745.0);
  CHECK(std::isfinite(got));
  CHECK(std::abs(got - precise_log_sum({-745.0, -745.0})) < 1e-12);
}

TEST_CASE("log_mul") {
  CHECK(log_mul(kLogZero, 5.0) == kLogZero);
  CHECK(log_mul(1.0, 2.0) == 3.0);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(log_mul(inf, kLogZero), std::domain_error);
  CHECK_THROWS_AS(log_mul(kLogZero, inf), std::domain_error);
}

TEST_CASE("log_sum") {
  CHECK(log_sum({}) == kLogZero);
  const std::vector<double> zeros(4, 0.0);
  CHECK(log_sum(zeros) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  const std::vector<double> many(1000, -700.0);
  CHECK(std::abs(log_sum(many) - (-700.0 + std::log(1000.0))) < 1e-10);
  CHECK(std::abs(log_sum(many) - precise_log_sum(many)) < 1e-10);
  const std::vector<double> with_zero{kLogZero, 1.0, kLogZero};
  CHECK(log_sum(with_zero) == 1.0);
}

TEST_CASE("log_add is commutative and associative on [-50, 50]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng);
    CHECK(log_add(a, b) == log_add(b, a));
    CHECK(std::abs(log_add(log_add(a, b), c) - log_add(a, log_add(b, c))) < 1e-12);
    CHECK(log_add(a, b) >= std::max(a, b));
    // The increment log1p(exp(-|a-b|)) is only representable while it exceeds
    // one ulp of max(a, b).
    if (std::abs(a - b) < 30.0) CHECK(log_add(a, b) > std::max(a, b));
  }
}

TEST_CASE("exp(log_sum) equals the direct sum on [-30, 0]") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-30.0, 0.0);
  std::uniform_int_distribution<int> len(1, 50);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(len(rng));
    double direct = 0.0;
    for (auto& x : v) {
      x = u(rng);
      direct += std::exp(x);
    }
    CHECK(std::abs(std::exp(log_sum(v)) - direct) <= 1e-10 * direct);
  }
}
