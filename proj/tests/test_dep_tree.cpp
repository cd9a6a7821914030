#include <cmath>
#include <random>

#include "doctest.h"
#include "fd.hpp"
#include "svrnn/dep_tree.hpp"
#include "svrnn/error.hpp"

using namespace svrnn;

namespace {

ArcPotentials random_arcs(std::mt19937_64& rng, std::size_t n, double lo, double hi, bool mask = true) {
  std::uniform_real_distribution<double> u(lo, hi);
  ArcPotentials p;
  p.n = n;
  p.mask_left_arcs = mask;
  p.theta.resize(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p.theta(i, j) = u(rng);
  p.apply_mask();
  return p;
}

double max_grad_error(ArcPotentials p, const Eigen::MatrixXd& g) {
  const Eigen::MatrixXd analytic = tree_marginal_grad(p, g);
  auto f = [&] { return (inside_outside(p).p_arc.array() * g.array()).sum(); };
  double worst = 0.0;
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = 0; j < p.n; ++j) {
      if (p.theta(i, j) == kLogZero) {
        worst = std::max(worst, std::abs(analytic(i, j)));
        continue;
      }
      worst = std::max(worst, std::abs(analytic(i, j) - test::central_difference(f, p.theta(i, j))));
    }
  return worst;
}

}  // namespace

TEST_CASE("forced structures") {
  std::mt19937_64 rng(1);
  const auto two = inside_outside(random_arcs(rng, 2, -2.0, 2.0));
  CHECK(two.p_arc(0, 1) == doctest::Approx(1.0).epsilon(1e-14));

  const auto three = inside_outside(ArcPotentials::uniform(3));
  CHECK(three.p_arc(0, 1) == doctest::Approx(1.0));
  CHECK(three.p_arc(0, 2) == doctest::Approx(0.5));
  CHECK(three.p_arc(1, 2) == doctest::Approx(0.5));
  CHECK(three.log_partition == doctest::Approx(std::log(2.0)));

  const auto bf2 = brute_force_trees(ArcPotentials::uniform(2));
  CHECK(bf2.p_arc(0, 1) == doctest::Approx(1.0));
  const auto bf3 = brute_force_trees(ArcPotentials::uniform(3));
  CHECK(bf3.p_arc(0, 2) == doctest::Approx(0.5));
  CHECK(bf3.p_arc(1, 2) == doctest::Approx(0.5));

  CHECK_THROWS_AS(inside_outside(ArcPotentials::uniform(1)), Error);
  CHECK_THROWS_AS(brute_force_trees(ArcPotentials::uniform(9)), Error);
}

TEST_CASE("projectivity predicate") {
  CHECK(is_projective_tree({-1, 0, 1, 2}));
  CHECK(is_projective_tree({-1, 0, 0, 2}));
  CHECK_FALSE(is_projective_tree({-1, 0, 0, 1}));  // 0->2 crosses 1->3
  CHECK_FALSE(is_projective_tree({-1, 2, 1}));      // cycle
  CHECK(is_projective_tree({-1, 2, 0}));            // left arc 2->1
}

TEST_CASE("inside_outside matches projective enumeration") {
  std::mt19937_64 rng(2);
  SUBCASE("left arcs masked") {
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + trial % 6;
      const auto p = random_arcs(rng, n, -2.0, 2.0);
      const auto io = inside_outside(p);
      const auto bf = brute_force_trees(p);
      CHECK((io.p_arc - bf.p_arc).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(std::abs(io.log_partition - bf.log_partition) < 1e-9);
    }
  }
  SUBCASE("left arcs allowed") {
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 2 + trial % 5;
      const auto p = random_arcs(rng, n, -2.0, 2.0, false);
      const auto io = inside_outside(p);
      const auto bf = brute_force_trees(p);
      CHECK((io.p_arc - bf.p_arc).cwiseAbs().maxCoeff() < 1e-9);
      for (std::size_t j = 1; j < n; ++j) CHECK(io.p_arc.col(j).sum() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("tree marginal invariants") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 7;
    auto p = random_arcs(rng, n, -3.0, 3.0);
    const auto m = inside_outside(p);
    for (std::size_t i = 0; i < n; ++i) CHECK(m.p_arc(i, 0) == 0.0);
    for (std::size_t j = 1; j < n; ++j) {
      CHECK(std::abs(m.p_arc.col(j).head(j).sum() - 1.0) < 1e-9);
      for (std::size_t i = 0; i < n; ++i) CHECK((m.p_arc(i, j) >= 0.0 && m.p_arc(i, j) <= 1.0 + 1e-12));
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) p.theta(i, j) += 0.9;
    const auto shifted = inside_outside(p);
    CHECK((shifted.p_arc - m.p_arc).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("build_arc_potentials") {
  const int d = 4, da = 3;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  auto rv = [&](int k) {
    Eigen::VectorXd v(k);
    for (int i = 0; i < k; ++i) v[i] = nd(rng);
    return v;
  };
  auto rm = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = nd(rng);
    return m;
  };
  ArcParams params{rm(da, d), rm(da, d), rv(da), rv(da)};
  std::vector<Eigen::VectorXd> h{rv(d), rv(d), rv(d), rv(d), rv(d)};

  SUBCASE("explicit arithmetic") {
    const auto p = build_arc_potentials(h, params);
    for (std::size_t i = 0; i < h.size(); ++i)
      for (std::size_t j = 0; j < h.size(); ++j) {
        if (i >= j) {
          CHECK(p.theta(i, j) == kLogZero);
          continue;
        }
        double outer = 0.0;
        for (int a = 0; a < da; ++a) {
          double pre = params.b[a];
          for (int k = 0; k < d; ++k) pre += params.w_parent(a, k) * h[i][k] + params.w_child(a, k) * h[j][k];
          outer += params.s[a] * std::tanh(pre);
        }
        CHECK(std::abs(p.theta(i, j) - std::tanh(outer)) < 1e-12);
      }
    const auto unmasked = build_arc_potentials(h, params, false);
    CHECK(unmasked.theta(3, 1) != kLogZero);
    CHECK(unmasked.theta(2, 2) == kLogZero);
  }
  SUBCASE("zero s gives uniform scores") {
    params.s.setZero();
    const auto p = build_arc_potentials(h, params);
    for (std::size_t i = 0; i < h.size(); ++i)
      for (std::size_t j = i + 1; j < h.size(); ++j) CHECK(p.theta(i, j) == 0.0);
  }
  SUBCASE("identical hiddens give constant scores") {
    std::vector<Eigen::VectorXd> same(4, h[0]);
    const auto p = build_arc_potentials(same, params);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) CHECK(p.theta(i, j) == p.theta(0, 1));
  }
  SUBCASE("dimension mismatch") {
    h[2] = rv(d + 1);
    CHECK_THROWS_AS(build_arc_potentials(h, params), Error);
  }
}

TEST_CASE("tree_marginal_grad") {
  std::mt19937_64 rng(5);
  SUBCASE("zero upstream") {
    const auto p = random_arcs(rng, 4, -1.0, 1.0);
    CHECK(tree_marginal_grad(p, Eigen::MatrixXd::Zero(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("n = 3 unit upstream on arc 0 -> 2") {
    const auto p = random_arcs(rng, 3, -1.0, 1.0);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
    g(0, 2) = 1.0;
    CHECK(max_grad_error(p, g) < 1e-5);
  }
  SUBCASE("summing one child's arcs gives a flat objective") {
    const auto p = ArcPotentials::uniform(4);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g.col(3).setOnes();
    const Eigen::MatrixXd grad = tree_marginal_grad(p, g);
    CHECK(std::abs(grad.col(3).head(3).sum()) < 1e-12);
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(max_grad_error(p, g) < 1e-5);
  }
  SUBCASE("100 random instances") {
    std::uniform_real_distribution<double> ug(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 3 + trial % 4;
      const auto p = random_arcs(rng, n, -2.0, 2.0);
      Eigen::MatrixXd g(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = ug(rng);
      CHECK(max_grad_error(p, g) < 1e-5);
    }
  }
  SUBCASE("left arcs allowed") {
    const auto p = random_arcs(rng, 5, -1.0, 1.0, false);
    Eigen::MatrixXd g = Eigen::MatrixXd::Random(5, 5);
    CHECK(max_grad_error(p, g) < 1e-5);
  }
}
