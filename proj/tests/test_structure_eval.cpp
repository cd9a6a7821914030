#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "svrnn/error.hpp"
#include "svrnn/structure_eval.hpp"

using namespace svrnn;
using Eigen::MatrixXd;

namespace {

MatrixXd mat2(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

std::vector<std::vector<int>> random_sequences(std::mt19937_64& rng, int count, int states) {
  std::uniform_int_distribution<int> len(2, 9), s(0, states - 1);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(count));
  for (auto& seq : out) {
    seq.resize(static_cast<std::size_t>(len(rng)));
    for (auto& x : seq) x = s(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("estimate_transitions") {
  const MatrixXd cycle = estimate_transitions({{0, 1, 0, 1}}, 2);
  CHECK(cycle == mat2(0, 1, 1, 0));

  const MatrixXd one = estimate_transitions({{0, 2}, {1, 0}}, 3);
  CHECK(one(0, 2) == 1.0);
  CHECK(one(1, 0) == 1.0);
  for (int b = 0; b < 3; ++b) CHECK(one(2, b) == doctest::Approx(1.0 / 3));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto seqs = random_sequences(rng, 15, 4);
    std::map<std::pair<int, int>, int> bigrams;
    std::map<int, int> outgoing;
    for (const auto& s : seqs)
      for (std::size_t i = 1; i < s.size(); ++i) {
        ++bigrams[{s[i - 1], s[i]}];
        ++outgoing[s[i - 1]];
      }
    const MatrixXd t = estimate_transitions(seqs, 4);
    for (int a = 0; a < 4; ++a) {
      CHECK(t.row(a).sum() == doctest::Approx(1.0).epsilon(1e-12));
      for (int b = 0; b < 4; ++b) {
        const double expect = outgoing[a] == 0 ? 0.25 : static_cast<double>(bigrams[{a, b}]) / outgoing[a];
        CHECK(t(a, b) == doctest::Approx(expect).epsilon(1e-15));
      }
    }
  }
  CHECK_THROWS_AS(estimate_transitions({{0, 3}}, 3), Error);
}

TEST_CASE("estimate_mapping") {
  const StateMapping identity = estimate_mapping({0, 1, 2, 1}, {0, 1, 2, 1}, 3, 3);
  CHECK(identity.forward == MatrixXd::Identity(3, 3));
  CHECK(identity.reverse == MatrixXd::Identity(3, 3));

  const StateMapping constant = estimate_mapping({0, 1, 2, 2}, {1, 1, 1, 1}, 3, 2);
  for (int a = 0; a < 3; ++a) {
    CHECK(constant.forward(a, 0) == 0.0);
    CHECK(constant.forward(a, 1) == 1.0);
  }

  // True 0 -> learned {0, 1, 1}, true 1 -> learned {0}, true 2 -> learned {2}.
  const StateMapping m = estimate_mapping({0, 0, 0, 1, 2}, {0, 1, 1, 0, 2}, 3, 3);
  CHECK(m.forward(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(m.forward(0, 1) == doctest::Approx(2.0 / 3));
  CHECK(m.forward(1, 0) == 1.0);
  CHECK(m.forward(2, 2) == 1.0);
  // Column 0 of forward is (1/3, 1, 0): normalized to (0.25, 0.75, 0).
  CHECK(m.reverse(0, 0) == doctest::Approx(0.25));
  CHECK(m.reverse(0, 1) == doctest::Approx(0.75));
  CHECK(m.reverse(1, 0) == 1.0);
  CHECK(m.reverse(2, 2) == 1.0);

  const StateMapping gaps = estimate_mapping({0, 0}, {1, 1}, 2, 3);
  CHECK(gaps.unseen_true_states == std::vector<int>{1});
  CHECK(gaps.forward(1, 2) == doctest::Approx(1.0 / 3));
  // The uniform row gives learned state 0 mass only from true state 1.
  CHECK(gaps.unused_learned_states.empty());
  CHECK(gaps.reverse(0, 1) == 1.0);
  const StateMapping unused = estimate_mapping({0, 1}, {0, 0}, 2, 2);
  CHECK(unused.unused_learned_states == std::vector<int>{1});
  for (Eigen::Index r = 0; r < 3; ++r) CHECK(gaps.reverse.row(r).sum() == doctest::Approx(1.0));
}

TEST_CASE("sed and sce on hand-computed 2-state fixtures") {
  const MatrixXd truth = mat2(0.5, 0.5, 1.0, 0.0);
  const MatrixXd learned = mat2(0.2, 0.8, 0.6, 0.4);
  const StateMapping id = estimate_mapping({0, 1}, {0, 1}, 2, 2);
  CHECK(sed(truth, learned, id) == doctest::Approx(0.5 * std::sqrt(0.5)).epsilon(1e-15));
  const double hand_sce =
      0.5 * (-std::log(0.2 + 1e-10) * 0.5 - std::log(0.8 + 1e-10) * 0.5 - std::log(0.6 + 1e-10) * 1.0);
  CHECK(sce(truth, learned, id) == doctest::Approx(hand_sce).epsilon(1e-15));

  // Swapped labels: the mapping undoes the swap.
  const StateMapping swap = estimate_mapping({0, 0, 1, 1}, {1, 1, 0, 0}, 2, 2);
  const MatrixXd swapped = mat2(0.4, 0.6, 0.9, 0.1);
  CHECK((project_transitions(swapped, swap) - mat2(0.1, 0.9, 0.6, 0.4)).cwiseAbs().maxCoeff() < 1e-15);

  // Soft mapping: P_fwd = [[1/3, 2/3], [0, 1]], P_rev = [[1, 0], [0.4, 0.6]],
  // T' = [[0.6, 0.4], [0.55, 0.45]].
  const StateMapping soft = estimate_mapping({0, 0, 0, 1}, {0, 1, 1, 1}, 2, 2);
  const MatrixXd tl = mat2(0.5, 0.5, 0.25, 0.75);
  const MatrixXd tt = mat2(0.3, 0.7, 0.6, 0.4);
  CHECK((project_transitions(tl, soft) - mat2(0.6, 0.4, 0.55, 0.45)).cwiseAbs().maxCoeff() < 1e-15);
  const double hand_sed = 0.5 * std::sqrt(0.3 * 0.3 + 0.3 * 0.3 + 0.05 * 0.05 + 0.05 * 0.05);
  CHECK(sed(tt, tl, soft) == doctest::Approx(hand_sed).epsilon(1e-14));
  const double hand_sce2 = 0.5 * (-0.3 * std::log(0.6 + 1e-10) - 0.7 * std::log(0.4 + 1e-10) -
                                  0.6 * std::log(0.55 + 1e-10) - 0.4 * std::log(0.45 + 1e-10));
  CHECK(sce(tt, tl, soft) == doctest::Approx(hand_sce2).epsilon(1e-14));
}

TEST_CASE("sed and sce edge cases") {
  const MatrixXd t = mat2(0.3, 0.7, 0.6, 0.4);
  const StateMapping id = estimate_mapping({0, 1}, {0, 1}, 2, 2);
  CHECK(sed(t, t, id) == 0.0);
  double entropy = 0.0;
  for (int i = 0; i < 4; ++i) entropy -= t(i) * std::log(t(i) + 1e-10);
  CHECK(sce(t, t, id) == doctest::Approx(entropy / 2).epsilon(1e-14));

  const MatrixXd single = MatrixXd::Ones(1, 1);
  const StateMapping one = estimate_mapping({0, 0, 0}, {0, 1, 0}, 1, 2);
  CHECK(sed(single, mat2(0.1, 0.9, 0.5, 0.5), one) == doctest::Approx(0.0).epsilon(1e-15));

  // Zero projected mass where the truth has mass stays finite.
  const MatrixXd deterministic = mat2(0.0, 1.0, 1.0, 0.0);
  const double guarded = sce(deterministic, mat2(1.0, 0.0, 0.0, 1.0), id);
  CHECK(std::isfinite(guarded));
  CHECK(guarded == doctest::Approx(-std::log(1e-10)).epsilon(1e-12));

  CHECK_THROWS_AS(sed(t, MatrixXd::Identity(3, 3), id), Error);
  CHECK_THROWS_AS(sce(t, MatrixXd::Identity(3, 3), id), Error);
}

TEST_CASE("sed and sce are invariant to relabeling learned states") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4, m = 6;
    const auto truth = random_sequences(rng, 30, n);
    std::vector<std::vector<int>> learned = truth;
    std::uniform_int_distribution<int> s(0, m - 1);
    std::bernoulli_distribution noisy(0.4);
    for (auto& seq : learned)
      for (auto& x : seq) x = noisy(rng) ? s(rng) : (x * 2 + 1) % m;
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto relabeled = learned;
    for (auto& seq : relabeled)
      for (auto& x : seq) x = perm[static_cast<std::size_t>(x)];
    const StructureScores a = score_structure(truth, learned, n, m);
    const StructureScores b = score_structure(truth, relabeled, n, m);
    CHECK(a.sed == doctest::Approx(b.sed).epsilon(1e-12));
    CHECK(a.sce == doctest::Approx(b.sce).epsilon(1e-12));
    CHECK(a.sed >= 0.0);
  }
}

TEST_CASE("gold labels scored against themselves give zero SED") {
  std::mt19937_64 rng(2);
  const auto truth = random_sequences(rng, 40, 5);
  const StructureScores s = score_structure(truth, truth, 5, 5);
  CHECK(s.sed == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("parent accuracy") {
  TreeMarginals two{MatrixXd::Zero(2, 2), 0.0};
  two.p_arc(0, 1) = 1.0;
  CHECK(predicted_parent(two.p_arc, 1) == 0);
  CHECK(parent_accuracy(two, {-1, 0}) == 1.0);

  TreeMarginals tie{MatrixXd::Zero(3, 3), 0.0};
  tie.p_arc(0, 1) = 1.0;
  tie.p_arc(0, 2) = 0.5;
  tie.p_arc(1, 2) = 0.5;
  CHECK(predicted_parent(tie.p_arc, 2) == 1);
  CHECK(parent_accuracy(tie, {-1, 0, 1}) == 1.0);
  CHECK(parent_accuracy(tie, {-1, 0, 0}) == 0.5);
  CHECK_THROWS_AS(parent_accuracy(tie, {-1, -1, -1}), Error);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 6;
    TreeMarginals m{MatrixXd::Zero(n, n), 0.0};
    std::vector<int> gold(n, -1);
    for (int j = 1; j < n; ++j) {
      for (int i = 0; i < j; ++i) m.p_arc(i, j) = u(rng);
      m.p_arc.col(j) /= m.p_arc.col(j).sum();
      gold[static_cast<std::size_t>(j)] = std::uniform_int_distribution<int>(0, j - 1)(rng);
    }
    int correct = 0;
    for (int j = 1; j < n; ++j) {
      int best = 0;
      for (int i = 1; i < j; ++i)
        if (m.p_arc(i, j) > m.p_arc(best, j)) best = i;
      if (best == gold[static_cast<std::size_t>(j)]) ++correct;
    }
    const double acc = parent_accuracy(m, gold);
    CHECK(acc == doctest::Approx(correct / 5.0));
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
  }

  const ParentAccuracy recent = most_recent_baseline({-1, 0, 0, 2, 1});
  CHECK(recent.total == 4);
  CHECK(recent.correct == 2);
}

TEST_CASE("k-means baseline") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.1);
  SUBCASE("one cluster per point has zero inertia") {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 7; ++i) pts.push_back(Eigen::Vector2d(noise(rng) + i, noise(rng)));
    const KMeansResult r = kmeans_baseline(pts, 7, 1);
    CHECK(r.inertia == doctest::Approx(0.0).epsilon(1e-24));
    std::vector<int> labels = r.labels;
    std::sort(labels.begin(), labels.end());
    CHECK(std::unique(labels.begin(), labels.end()) == labels.end());
  }
  SUBCASE("separated blobs are recovered") {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(Eigen::Vector2d(noise(rng), noise(rng)));
    for (int i = 0; i < 40; ++i) pts.push_back(Eigen::Vector2d(5 + noise(rng), 5 + noise(rng)));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const KMeansResult r = kmeans_baseline(pts, 2, seed);
      for (int i = 1; i < 40; ++i) CHECK(r.labels[static_cast<std::size_t>(i)] == r.labels[0]);
      for (int i = 41; i < 80; ++i) CHECK(r.labels[static_cast<std::size_t>(i)] == r.labels[40]);
      CHECK(r.labels[0] != r.labels[40]);
    }
  }
  SUBCASE("deterministic per seed") {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 60; ++i) pts.push_back(Eigen::Vector3d(noise(rng), noise(rng), noise(rng)));
    const KMeansResult a = kmeans_baseline(pts, 5, 42), b = kmeans_baseline(pts, 5, 42);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);
    CHECK(a.iterations <= 100);
  }
  SUBCASE("errors") {
    std::vector<Eigen::VectorXd> pts{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)};
    CHECK_THROWS_AS(kmeans_baseline(pts, 3, 0), Error);
    CHECK_THROWS_AS(kmeans_baseline(pts, 0, 0), Error);
    CHECK_THROWS_AS(kmeans_baseline({}, 1, 0), Error);
  }
}
