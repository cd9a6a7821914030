#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "svrnn/chain_crf.hpp"
#include "svrnn/dep_tree.hpp"

namespace svrnn {

/// c_j = sum_i p(xi_i = 1) h_i with the raw (unnormalized) selection
/// marginals. An empty history yields the zero vector of dimension `dim`.
Eigen::VectorXd chain_context(const std::vector<double>& p_select, const std::vector<Eigen::VectorXd>& history,
                              Eigen::Index dim);
Eigen::VectorXd chain_context(const ChainMarginals& marginals, const std::vector<Eigen::VectorXd>& history,
                              Eigen::Index dim);

/// Soft parent of utterance j (0-indexed): sum_i p_arc(i, j) h_i. The root
/// (j == 0) has no parent and gets the zero vector.
Eigen::VectorXd tree_context(const TreeMarginals& marginals, const std::vector<Eigen::VectorXd>& hiddens,
                             std::size_t j);

/// [h; c].
Eigen::VectorXd augment(const Eigen::VectorXd& h, const Eigen::VectorXd& c);

}  // namespace svrnn
