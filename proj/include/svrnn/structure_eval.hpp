#pragma once

// Comparing induced dialogue structure with ground truth: transition
// estimation, probabilistic state mapping, SED/SCE, parent accuracy, and a
// K-means clustering baseline.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "svrnn/dep_tree.hpp"

namespace svrnn {

/// Row-stochastic S x S matrix, T(a, b) = p(next = b | current = a).
using TransitionMatrix = Eigen::MatrixXd;

/// Bigram counts row-normalized; rows without observations are uniform.
/// Each sequence contributes len - 1 bigrams.
TransitionMatrix estimate_transitions(const std::vector<std::vector<int>>& traces, int num_states);

struct StateMapping {
  Eigen::MatrixXd forward;  // N x M, p(learned | true)
  Eigen::MatrixXd reverse;  // M x N, transposed forward, rows normalized
  std::vector<int> unseen_true_states;     // rows of forward set uniform
  std::vector<int> unused_learned_states;  // rows of reverse set uniform
};

StateMapping estimate_mapping(const std::vector<int>& true_labels, const std::vector<int>& learned_labels,
                              int num_true, int num_learned);

/// T' = P_fwd T_learned P_rev, in true-state space.
Eigen::MatrixXd project_transitions(const TransitionMatrix& learned, const StateMapping& map);

/// (1/N) sqrt(sum (T' - T)^2).
double sed(const TransitionMatrix& truth, const TransitionMatrix& learned, const StateMapping& map);
/// (1/N) sum -log(T' + 1e-10) T.
double sce(const TransitionMatrix& truth, const TransitionMatrix& learned, const StateMapping& map);

struct StructureScores {
  double sed = 0.0;
  double sce = 0.0;
  TransitionMatrix truth;
  TransitionMatrix learned;
  StateMapping mapping;
};

/// Full pipeline from aligned per-dialogue label sequences.
StructureScores score_structure(const std::vector<std::vector<int>>& true_sequences,
                                const std::vector<std::vector<int>>& learned_sequences, int num_true,
                                int num_learned);

/// Predicted parent of child j: argmax_i p_arc(i, j), ties to the largest i.
int predicted_parent(const Eigen::MatrixXd& p_arc, int child);

struct ParentAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// Counts children with a gold parent (entries < 0 are skipped).
ParentAccuracy parent_accuracy_counts(const TreeMarginals& marginals, const std::vector<int>& gold_parents);
/// Fraction correct. Throws when no child carries a gold parent.
double parent_accuracy(const TreeMarginals& marginals, const std::vector<int>& gold_parents);
/// Accuracy of always predicting the immediately preceding utterance.
ParentAccuracy most_recent_baseline(const std::vector<int>& gold_parents);

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // d x K
  double inertia = 0.0;
  int iterations = 0;
};

/// k-means++ seeding, then Lloyd iterations until no centroid moves more than
/// 1e-6 or 100 iterations.
KMeansResult kmeans_baseline(const std::vector<Eigen::VectorXd>& points, int k, std::uint64_t seed);

}  // namespace svrnn
