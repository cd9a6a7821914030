#pragma once

// Utterance dependency trees. theta(i, j) scores "utterance i is the parent of
// utterance j" (0-indexed). Utterance 0 is the root and never has a parent.
// Marginals come from span-based inside-outside, so the distribution ranges
// over projective trees rooted at utterance 0.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "svrnn/semiring.hpp"

namespace svrnn {

struct ArcPotentials {
  std::size_t n = 0;
  Eigen::MatrixXd theta;  // n x n, -inf on the diagonal
  bool mask_left_arcs = true;

  /// Zero scores on every admissible arc, masking applied.
  static ArcPotentials uniform(std::size_t n, bool mask_left_arcs = true);
  /// Sets theta to -inf on the diagonal and, when masking, wherever i >= j.
  void apply_mask();
};

struct TreeMarginals {
  Eigen::MatrixXd p_arc;  // p_arc(i, j) = p(i is parent of j)
  LogScore log_partition = kLogZero;
};

struct ArcParams {
  Eigen::MatrixXd w_parent;  // d_a x d
  Eigen::MatrixXd w_child;   // d_a x d
  Eigen::VectorXd s;         // d_a
  Eigen::VectorXd b;         // d_a
};

/// theta(i, j) = tanh(s . tanh(W_parent h_i + W_child h_j + b)).
ArcPotentials build_arc_potentials(const std::vector<Eigen::VectorXd>& hiddens, const ArcParams& params,
                                   bool mask_left_arcs = true);

TreeMarginals inside_outside(const ArcPotentials& pot);

/// Vector-Jacobian product of p_arc with respect to theta. Entries of theta that
/// are -inf receive zero gradient.
Eigen::MatrixXd tree_marginal_grad(const ArcPotentials& pot, const Eigen::MatrixXd& upstream);

inline constexpr std::size_t kBruteForceTreeMax = 8;

/// Enumerates every parent assignment rooted at utterance 0 that is a tree,
/// respects the left-arc mask, and (when projective_only) has no crossing
/// arcs. Test oracle.
TreeMarginals brute_force_trees(const ArcPotentials& pot, bool projective_only = true);

/// True when parents (parents[0] == -1) form a tree rooted at 0 whose arcs
/// do not cross.
bool is_projective_tree(const std::vector<int>& parents);

}  // namespace svrnn
