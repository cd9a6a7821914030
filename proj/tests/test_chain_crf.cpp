#include <cmath>
#include <random>

#include "doctest.h"
#include "fd.hpp"
#include "svrnn/chain_crf.hpp"
#include "svrnn/error.hpp"

using namespace svrnn;

namespace {

ChainPotentials random_potentials(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  ChainPotentials p = ChainPotentials::zeros(n);
  for (auto& row : p.unary)
    for (auto& x : row) x = u(rng);
  for (auto& t : p.pairwise)
    for (auto& row : t)
      for (auto& x : row) x = u(rng);
  return p;
}

double weighted_marginals(const ChainPotentials& p, const std::vector<double>& g) {
  const auto m = forward_backward(p);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * m.p_select[i];
  return s;
}

// Largest deviation between the analytic VJP and central differences over
// every unary and pairwise entry.
double max_grad_error(ChainPotentials p, const std::vector<double>& g, double step = 1e-5) {
  const auto analytic = chain_marginal_grad(p, g);
  auto f = [&] { return weighted_marginals(p, g); };
  double worst = 0.0;
  for (std::size_t i = 0; i < p.n; ++i)
    for (int c = 0; c < 2; ++c)
      worst = std::max(worst, std::abs(analytic.unary[i][c] - test::central_difference(f, p.unary[i][c], step)));
  for (std::size_t i = 0; i + 1 < p.n; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        worst = std::max(worst,
                         std::abs(analytic.pairwise[i][k][l] - test::central_difference(f, p.pairwise[i][k][l], step)));
  return worst;
}

}  // namespace

TEST_CASE("uniform potentials give one half everywhere") {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto m = forward_backward(ChainPotentials::zeros(n));
    for (double p : m.p_select) CHECK(p == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.log_partition == doctest::Approx(n * std::log(2.0)));
  }
}

TEST_CASE("single position is a two-way softmax") {
  ChainPotentials p = ChainPotentials::zeros(1);
  p.unary[0] = {0.0, std::log(3.0)};
  const auto m = forward_backward(p);
  CHECK(m.p_select[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(m.log_partition == doctest::Approx(std::log(4.0)));
}

TEST_CASE("brute force on hand-checkable cases") {
  const auto m = brute_force_chain(ChainPotentials::zeros(4));
  for (double p : m.p_select) CHECK(p == doctest::Approx(0.5));

  // (1,1) weighted 2, the other three configurations 1: Z = 5, each position
  // is selected in weight 1 + 2 = 3.
  ChainPotentials two = ChainPotentials::zeros(2);
  two.pairwise[0][1][1] = std::log(2.0);
  const auto b = brute_force_chain(two);
  CHECK(b.p_select[0] == doctest::Approx(0.6));
  CHECK(b.p_select[1] == doctest::Approx(0.6));
  CHECK(b.log_partition == doctest::Approx(std::log(5.0)));

  CHECK_THROWS_AS(brute_force_chain(ChainPotentials::zeros(21)), Error);
}

TEST_CASE("forward_backward matches enumeration") {
  std::mt19937_64 rng(3);
  SUBCASE("n = 3, pairwise in [-1, 1]") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_potentials(rng, 3, -1.0, 1.0);
      const auto fb = forward_backward(p);
      const auto bf = brute_force_chain(p);
      for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(fb.p_select[i] - bf.p_select[i]) < 1e-12);
      CHECK(std::abs(fb.log_partition - bf.log_partition) < 1e-12);
    }
  }
  SUBCASE("n <= 10, potentials in [-5, 5]") {
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + trial % 10;
      const auto p = random_potentials(rng, n, -5.0, 5.0);
      const auto fb = forward_backward(p);
      const auto bf = brute_force_chain(p);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(fb.p_select[i] - bf.p_select[i]) < 1e-9);
    }
  }
}

TEST_CASE("shift invariance of pairwise scores") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 8;
    auto p = random_potentials(rng, n, -3.0, 3.0);
    const auto base = forward_backward(p);
    const double c = 1.7;
    for (auto& t : p.pairwise)
      for (auto& row : t)
        for (auto& x : row) x += c;
    const auto shifted = forward_backward(p);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(base.p_select[i] - shifted.p_select[i]) < 1e-12);
    CHECK(shifted.log_partition == doctest::Approx(base.log_partition + (n - 1) * c));
  }
}

TEST_CASE("a -inf selection unary masks the position exactly") {
  std::mt19937_64 rng(5);
  for (std::size_t n = 1; n <= 6; ++n) {
    auto p = random_potentials(rng, n, -2.0, 2.0);
    const std::size_t i = n / 2;
    p.unary[i][1] = kLogZero;
    const auto m = forward_backward(p);
    CHECK(m.p_select[i] == 0.0);
    const auto bf = brute_force_chain(p);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(m.p_select[k] - bf.p_select[k]) < 1e-12);
  }
  auto dead = ChainPotentials::zeros(3);
  dead.unary[1] = {kLogZero, kLogZero};
  CHECK_THROWS_AS(forward_backward(dead), Error);
}

TEST_CASE("build_chain_potentials") {
  SUBCASE("zero weights leave only the interaction") {
    std::vector<Eigen::VectorXd> h{Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(-1, 0, 2), Eigen::Vector3d(0.5, 0.5, 0)};
    const Eigen::VectorXd q = Eigen::Vector3d(1, 1, 1);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
    const auto p = build_chain_potentials(h, q, zero, zero);
    for (const auto& u : p.unary) CHECK((u[0] == 0.0 && u[1] == 0.0));
    for (std::size_t i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) CHECK(p.pairwise[i][k][l] == doctest::Approx(h[i].dot(h[i + 1])));
  }
  SUBCASE("orthogonal history under identity weights") {
    std::vector<Eigen::VectorXd> h{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)};
    const Eigen::VectorXd q = Eigen::Vector3d(0, 0, 1);
    const auto p = build_chain_potentials(h, q, Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 3));
    CHECK(p.unary[0][0] == 0.0);
    CHECK(p.unary[1][0] == 0.0);
  }
  SUBCASE("random d = 4 against explicit loops") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd;
    const int d = 4;
    auto rv = [&] {
      Eigen::VectorXd v(d);
      for (int k = 0; k < d; ++k) v[k] = nd(rng);
      return v;
    };
    Eigen::MatrixXd w1(d, d), w2(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        w1(r, c) = nd(rng);
        w2(r, c) = nd(rng);
      }
    std::vector<Eigen::VectorXd> h{rv(), rv(), rv(), rv()};
    const Eigen::VectorXd q = rv();
    const auto p = build_chain_potentials(h, q, w1, w2);
    auto bilinear = [&](const Eigen::VectorXd& a, const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
      double s = 0.0;
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) s += a[r] * w(r, c) * b[c];
      return s;
    };
    for (std::size_t i = 0; i < h.size(); ++i) {
      CHECK(std::abs(p.unary[i][0] - bilinear(h[i], w1, q)) < 1e-12);
      CHECK(std::abs(p.unary[i][1] - bilinear(h[i], w2, q)) < 1e-12);
    }
    for (std::size_t i = 0; i + 1 < h.size(); ++i) {
      double inter = 0.0;
      for (int k = 0; k < d; ++k) inter += h[i][k] * h[i + 1][k];
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          CHECK(std::abs(p.pairwise[i][k][l] - (p.unary[i][k] + p.unary[i + 1][l] + inter)) < 1e-12);
    }
  }
  SUBCASE("dimension mismatch") {
    std::vector<Eigen::VectorXd> h{Eigen::Vector3d(1, 0, 0)};
    CHECK_THROWS_AS(build_chain_potentials(h, Eigen::Vector2d(1, 0), Eigen::MatrixXd::Zero(2, 2),
                                           Eigen::MatrixXd::Zero(2, 2)),
                    Error);
  }
}

TEST_CASE("chain_marginal_grad") {
  std::mt19937_64 rng(7);
  SUBCASE("zero upstream gives zero gradient") {
    const auto p = random_potentials(rng, 4, -1.0, 1.0);
    const auto g = chain_marginal_grad(p, std::vector<double>(4, 0.0));
    for (const auto& t : g.pairwise)
      for (const auto& row : t)
        for (double x : row) CHECK(x == 0.0);
  }
  SUBCASE("n = 2 unit upstream on the second position") {
    const auto p = random_potentials(rng, 2, -1.0, 1.0);
    CHECK(max_grad_error(p, {0.0, 1.0}) < 1e-6);
  }
  SUBCASE("symmetry at zero potentials") {
    for (std::size_t n : {2u, 4u}) {
      const auto p = ChainPotentials::zeros(n);
      const std::size_t edge = (n - 2) / 2;
      std::vector<double> left(n, 0.0), right(n, 0.0);
      left[edge] = 1.0;
      right[edge + 1] = 1.0;
      const auto gl = chain_marginal_grad(p, left);
      const auto gr = chain_marginal_grad(p, right);
      CHECK(gl.pairwise[edge][1][1] == doctest::Approx(gr.pairwise[edge][1][1]).epsilon(1e-12));
      CHECK(gl.pairwise[edge][1][1] > 0.0);
      CHECK(max_grad_error(p, left) < 1e-6);
    }
  }
  SUBCASE("100 random instances against central differences") {
    std::uniform_real_distribution<double> ug(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + trial % 5;
      const auto p = random_potentials(rng, n, -3.0, 3.0);
      std::vector<double> g(n);
      for (auto& x : g) x = ug(rng);
      CHECK(max_grad_error(p, g) < 1e-5);
    }
  }
  SUBCASE("single position gradient flows into unary") {
    auto p = random_potentials(rng, 1, -1.0, 1.0);
    CHECK(max_grad_error(p, {1.0}) < 1e-6);
  }
  SUBCASE("masked positions") {
    auto p = random_potentials(rng, 5, -1.0, 1.0);
    p.unary[2][1] = kLogZero;
    const auto g = chain_marginal_grad(p, {0.3, -0.2, 0.5, 1.0, -0.7});
    for (std::size_t i = 0; i + 1 < p.n; ++i)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) CHECK(std::isfinite(g.pairwise[i][k][l]));
    CHECK(g.pairwise[1][0][1] == 0.0);
    CHECK(g.pairwise[2][1][0] == 0.0);
  }
}
