#include "svrnn/structure_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "svrnn/error.hpp"

namespace svrnn {

namespace {

constexpr double kSceEpsilon = 1e-10;
constexpr int kMaxKMeansIterations = 100;
constexpr double kKMeansTolerance = 1e-6;

void normalize_rows(Eigen::MatrixXd& m, std::vector<int>* empty_rows) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double s = m.row(r).sum();
    if (s > 0.0) {
      m.row(r) /= s;
    } else {
      m.row(r).setConstant(1.0 / static_cast<double>(m.cols()));
      if (empty_rows) empty_rows->push_back(static_cast<int>(r));
    }
  }
}

void check_dims(const TransitionMatrix& truth, const TransitionMatrix& learned, const StateMapping& map) {
  require(truth.rows() == truth.cols() && learned.rows() == learned.cols(), ErrorCode::kDimensionMismatch,
          "transition matrices must be square");
  require(map.forward.rows() == truth.rows() && map.forward.cols() == learned.rows(), ErrorCode::kDimensionMismatch,
          "mapping does not match the transition matrices");
  require(map.reverse.rows() == learned.rows() && map.reverse.cols() == truth.rows(), ErrorCode::kDimensionMismatch,
          "reverse mapping does not match the transition matrices");
}

}  // namespace

TransitionMatrix estimate_transitions(const std::vector<std::vector<int>>& traces, int num_states) {
  require(num_states >= 1, ErrorCode::kInvalidArgument, "need at least one state");
  TransitionMatrix t = TransitionMatrix::Zero(num_states, num_states);
  for (const auto& seq : traces) {
    for (int s : seq)
      require(s >= 0 && s < num_states, ErrorCode::kOutOfRange,
              "state " + std::to_string(s) + " outside [0, " + std::to_string(num_states) + ")");
    for (std::size_t i = 1; i < seq.size(); ++i) t(seq[i - 1], seq[i]) += 1.0;
  }
  normalize_rows(t, nullptr);
  return t;
}

StateMapping estimate_mapping(const std::vector<int>& true_labels, const std::vector<int>& learned_labels,
                              int num_true, int num_learned) {
  require(true_labels.size() == learned_labels.size(), ErrorCode::kDimensionMismatch,
          "label sequences differ in length");
  require(num_true >= 1 && num_learned >= 1, ErrorCode::kInvalidArgument, "need at least one state");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(num_true, num_learned);
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const int a = true_labels[i], b = learned_labels[i];
    require(a >= 0 && a < num_true, ErrorCode::kOutOfRange, "true label out of range");
    require(b >= 0 && b < num_learned, ErrorCode::kOutOfRange, "learned label out of range");
    counts(a, b) += 1.0;
  }
  StateMapping map;
  map.forward = counts;
  normalize_rows(map.forward, &map.unseen_true_states);
  map.reverse = map.forward.transpose();
  normalize_rows(map.reverse, &map.unused_learned_states);
  return map;
}

Eigen::MatrixXd project_transitions(const TransitionMatrix& learned, const StateMapping& map) {
  require(map.forward.cols() == learned.rows() && learned.cols() == map.reverse.rows(), ErrorCode::kDimensionMismatch,
          "mapping does not match the learned transitions");
  return map.forward * learned * map.reverse;
}

double sed(const TransitionMatrix& truth, const TransitionMatrix& learned, const StateMapping& map) {
  check_dims(truth, learned, map);
  const Eigen::MatrixXd projected = project_transitions(learned, map);
  return (projected - truth).norm() / static_cast<double>(truth.rows());
}

double sce(const TransitionMatrix& truth, const TransitionMatrix& learned, const StateMapping& map) {
  check_dims(truth, learned, map);
  const Eigen::MatrixXd projected = project_transitions(learned, map);
  double total = 0.0;
  for (Eigen::Index a = 0; a < truth.rows(); ++a)
    for (Eigen::Index b = 0; b < truth.cols(); ++b)
      if (truth(a, b) != 0.0) total += -std::log(projected(a, b) + kSceEpsilon) * truth(a, b);
  return total / static_cast<double>(truth.rows());
}

StructureScores score_structure(const std::vector<std::vector<int>>& true_sequences,
                                const std::vector<std::vector<int>>& learned_sequences, int num_true,
                                int num_learned) {
  require(true_sequences.size() == learned_sequences.size(), ErrorCode::kDimensionMismatch,
          "different numbers of dialogues");
  std::vector<int> flat_true, flat_learned;
  for (std::size_t d = 0; d < true_sequences.size(); ++d) {
    require(true_sequences[d].size() == learned_sequences[d].size(), ErrorCode::kDimensionMismatch,
            "dialogue " + std::to_string(d) + " has misaligned labels");
    flat_true.insert(flat_true.end(), true_sequences[d].begin(), true_sequences[d].end());
    flat_learned.insert(flat_learned.end(), learned_sequences[d].begin(), learned_sequences[d].end());
  }
  StructureScores s;
  s.truth = estimate_transitions(true_sequences, num_true);
  s.learned = estimate_transitions(learned_sequences, num_learned);
  s.mapping = estimate_mapping(flat_true, flat_learned, num_true, num_learned);
  s.sed = sed(s.truth, s.learned, s.mapping);
  s.sce = sce(s.truth, s.learned, s.mapping);
  return s;
}

int predicted_parent(const Eigen::MatrixXd& p_arc, int child) {
  require(child >= 1 && child < p_arc.cols(), ErrorCode::kOutOfRange, "child index out of range");
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p_arc.rows(); ++i)
    if (i != child) best = std::max(best, p_arc(i, child));
  // Relative tolerance so marginals that tie in exact arithmetic still tie.
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  int parent = -1;
  for (int i = 0; i < p_arc.rows(); ++i)
    if (i != child && p_arc(i, child) >= best - tol) parent = i;
  return parent;
}

ParentAccuracy parent_accuracy_counts(const TreeMarginals& marginals, const std::vector<int>& gold_parents) {
  const auto n = static_cast<Eigen::Index>(gold_parents.size());
  require(marginals.p_arc.rows() == n && marginals.p_arc.cols() == n, ErrorCode::kDimensionMismatch,
          "marginals and gold parents cover different utterances");
  ParentAccuracy acc;
  for (int j = 1; j < static_cast<int>(n); ++j) {
    const int gold = gold_parents[static_cast<std::size_t>(j)];
    if (gold < 0) continue;
    require(gold < j, ErrorCode::kOutOfRange, "gold parent must precede its child");
    ++acc.total;
    if (predicted_parent(marginals.p_arc, j) == gold) ++acc.correct;
  }
  return acc;
}

double parent_accuracy(const TreeMarginals& marginals, const std::vector<int>& gold_parents) {
  const ParentAccuracy acc = parent_accuracy_counts(marginals, gold_parents);
  require(acc.total > 0, ErrorCode::kInvalidArgument, "no gold parents to score");
  return acc.value();
}

ParentAccuracy most_recent_baseline(const std::vector<int>& gold_parents) {
  ParentAccuracy acc;
  for (std::size_t j = 1; j < gold_parents.size(); ++j) {
    if (gold_parents[j] < 0) continue;
    ++acc.total;
    if (gold_parents[j] == static_cast<int>(j) - 1) ++acc.correct;
  }
  return acc;
}

KMeansResult kmeans_baseline(const std::vector<Eigen::VectorXd>& points, int k, std::uint64_t seed) {
  require(!points.empty(), ErrorCode::kInvalidArgument, "k-means needs at least one point");
  require(k >= 1, ErrorCode::kInvalidArgument, "k must be >= 1");
  require(static_cast<std::size_t>(k) <= points.size(), ErrorCode::kInvalidArgument,
          "k = " + std::to_string(k) + " exceeds the number of points (" + std::to_string(points.size()) + ")");
  const Eigen::Index dim = points.front().size();
  for (const auto& p : points) require(p.size() == dim, ErrorCode::kDimensionMismatch, "points differ in dimension");
  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // k-means++ seeding.
  Eigen::MatrixXd centroids(dim, k);
  std::vector<bool> chosen(n, false);
  std::size_t first = std::min<std::size_t>(n - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(n)));
  centroids.col(0) = points[first];
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points[i] - centroids.col(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      double u = unit(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        u -= d2[i];
        if (u < 0.0) break;
      }
    } else {
      // Every point coincides with a centroid; take the first unchosen one.
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (!chosen[i]) pick = i;
    }
    chosen[pick] = true;
    centroids.col(c) = points[pick];
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points[i] - centroids.col(c)).squaredNorm());
  }

  KMeansResult result;
  result.labels.assign(n, 0);
  auto assign = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points[i] - centroids.col(c)).squaredNorm();
        if (d < best) {
          best = d;
          result.labels[i] = c;
        }
      }
    }
  };
  for (result.iterations = 1; result.iterations <= kMaxKMeansIterations; ++result.iterations) {
    assign();
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(dim, k);
    std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      next.col(result.labels[i]) += points[i];
      ++size[static_cast<std::size_t>(result.labels[i])];
    }
    for (int c = 0; c < k; ++c) {
      if (size[static_cast<std::size_t>(c)] > 0) {
        next.col(c) /= static_cast<double>(size[static_cast<std::size_t>(c)]);
      } else {
        // Empty cluster: move it to the point farthest from its centroid.
        std::size_t far = 0;
        double worst = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = (points[i] - centroids.col(result.labels[i])).squaredNorm();
          if (d > worst) {
            worst = d;
            far = i;
          }
        }
        next.col(c) = points[far];
      }
    }
    const double moved = (next - centroids).colwise().norm().maxCoeff();
    centroids = next;
    if (moved < kKMeansTolerance) break;
  }
  result.iterations = std::min(result.iterations, kMaxKMeansIterations);
  assign();
  result.centroids = centroids;
  for (std::size_t i = 0; i < n; ++i) result.inertia += (points[i] - centroids.col(result.labels[i])).squaredNorm();
  return result;
}

}  // namespace svrnn
