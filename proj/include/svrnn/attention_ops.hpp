#pragma once

// Structured attention as differentiable graph operations. The backward
// passes route through chain_marginal_grad and tree_marginal_grad.

#include <random>

#include "svrnn/graph.hpp"

namespace svrnn::nn {

/// p(xi_i = 1) for each history column of `history` (d x n), with unary
/// scores h_i W_ignore q / h_i W_select q and neighbour interaction h_i . h_{i+1}.
Expr chain_attention(const Expr& history, const Expr& query, Parameter& w_ignore, Parameter& w_select);

/// Selection marginals from unary columns u_ignore, u_select (n x 1) and
/// interactions (n-1 x 1), composed into pairwise potentials.
Expr chain_select(const Expr& u_ignore, const Expr& u_select, const Expr& interaction);

struct ArcScoreParams {
  Parameter* w_parent = nullptr;
  Parameter* w_child = nullptr;
  Parameter* s = nullptr;
  Parameter* b = nullptr;
};

/// theta(i, j) = tanh(s . tanh(W_parent h_i + W_child h_j + b)) over the
/// columns of `hiddens`; masked entries are -inf and carry no gradient.
Expr arc_scores(const Expr& hiddens, const ArcScoreParams& p, bool mask_left_arcs);

/// Arc marginals p_arc(i, j) from an n x n score matrix.
Expr tree_select(const Expr& theta, bool mask_left_arcs);

struct DiscreteSample {
  Vector relaxed;
  int index = 0;
};

/// Gumbel-softmax sample from `probs` at temperature tau. Throws for tau <= 0.
DiscreteSample sample_discrete(const Vector& probs, double tau, std::mt19937_64& rng);
/// Same, with caller-provided Gumbel noise.
DiscreteSample sample_discrete_with_noise(const Vector& logits, const Vector& gumbel_noise, double tau);
Vector gumbel_noise(Eigen::Index n, std::mt19937_64& rng);

/// Straight-through estimator: the forward value is the hard one-hot argmax
/// of softmax((logits + noise) / tau); gradients flow through the relaxed
/// sample.
Expr gumbel_straight_through(const Expr& logits, const Vector& noise, double tau);

}  // namespace svrnn::nn
