#pragma once

// Two-state linear-chain CRF used as a structured attention layer over the
// utterance history. Position i selects (state 1) or ignores (state 0) the
// i-th history vector.
//
// Scoring convention for a configuration xi of length n:
//   n == 1 : score = unary[0][xi_0]
//   n >= 2 : score = sum_i pairwise[i][xi_i][xi_{i+1}]
// Start/stop boundary transitions carry score 0. For n >= 2 a unary entry of
// -inf is a hard mask that forbids the state; finite unary values are assumed
// to be folded into the pairwise table already (see compose_chain_potentials).

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "svrnn/semiring.hpp"

namespace svrnn {

using Pair2 = std::array<LogScore, 2>;
using Table2x2 = std::array<Pair2, 2>;

struct ChainPotentials {
  std::size_t n = 0;
  std::vector<Pair2> unary;        // n entries
  std::vector<Table2x2> pairwise;  // n - 1 entries

  static ChainPotentials zeros(std::size_t n);
};

struct ChainMarginals {
  std::vector<double> p_select;  // p(xi_i = 1 | x)
  LogScore log_partition = kLogZero;
};

/// Gradient with respect to every potential entry, laid out like ChainPotentials.
struct ChainPotentialGrad {
  std::vector<std::array<double, 2>> unary;
  std::vector<std::array<std::array<double, 2>, 2>> pairwise;
};

/// pairwise[i][k][l] = unary[i][k] + unary[i+1][l] + interaction[i].
ChainPotentials compose_chain_potentials(const std::vector<Pair2>& unary,
                                         const std::vector<double>& interaction);

/// Bilinear unary scores h_i W_1 h_j (state 0) and h_i W_2 h_j (state 1) with the
/// dot-product interaction h_i . h_{i+1} between neighbours.
ChainPotentials build_chain_potentials(const std::vector<Eigen::VectorXd>& history,
                                       const Eigen::VectorXd& query, const Eigen::MatrixXd& w_ignore,
                                       const Eigen::MatrixXd& w_select);

ChainMarginals forward_backward(const ChainPotentials& pot);

/// Vector-Jacobian product of p_select with respect to the potentials.
ChainPotentialGrad chain_marginal_grad(const ChainPotentials& pot, const std::vector<double>& upstream);

inline constexpr std::size_t kBruteForceChainMax = 20;

/// Exhaustive enumeration over all 2^n configurations. Test oracle.
ChainMarginals brute_force_chain(const ChainPotentials& pot);

}  // namespace svrnn
