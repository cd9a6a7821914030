#include "svrnn/attention.hpp"

#include "svrnn/error.hpp"

namespace svrnn {

Eigen::VectorXd chain_context(const std::vector<double>& p_select, const std::vector<Eigen::VectorXd>& history,
                              Eigen::Index dim) {
  require(p_select.size() == history.size(), ErrorCode::kDimensionMismatch,
          "marginal count differs from history length");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < history.size(); ++i) {
    require(history[i].size() == dim, ErrorCode::kDimensionMismatch, "history vector has the wrong dimension");
    c.noalias() += p_select[i] * history[i];
  }
  return c;
}

Eigen::VectorXd chain_context(const ChainMarginals& marginals, const std::vector<Eigen::VectorXd>& history,
                              Eigen::Index dim) {
  return chain_context(marginals.p_select, history, dim);
}

Eigen::VectorXd tree_context(const TreeMarginals& marginals, const std::vector<Eigen::VectorXd>& hiddens,
                             std::size_t j) {
  const std::size_t n = hiddens.size();
  require(n > 0, ErrorCode::kInvalidArgument, "no utterances");
  require(j < n, ErrorCode::kOutOfRange, "child index out of range");
  require(static_cast<std::size_t>(marginals.p_arc.rows()) == n && static_cast<std::size_t>(marginals.p_arc.cols()) == n,
          ErrorCode::kDimensionMismatch, "marginal table does not match utterance count");
  const Eigen::Index d = hiddens.front().size();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    require(hiddens[i].size() == d, ErrorCode::kDimensionMismatch, "hidden vectors differ in dimension");
    c.noalias() += marginals.p_arc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * hiddens[i];
  }
  return c;
}

Eigen::VectorXd augment(const Eigen::VectorXd& h, const Eigen::VectorXd& c) {
  require(h.size() == c.size(), ErrorCode::kDimensionMismatch, "context and hidden state differ in dimension");
  Eigen::VectorXd out(h.size() * 2);
  out << h, c;
  return out;
}

}  // namespace svrnn
