#include "svrnn/attention_ops.hpp"

#include <cmath>

#include "svrnn/chain_crf.hpp"
#include "svrnn/dep_tree.hpp"
#include "svrnn/error.hpp"

namespace svrnn::nn {

namespace {

ChainPotentials potentials_from(const Matrix& u0, const Matrix& u1, const Matrix& inter) {
  std::vector<Pair2> unary(static_cast<std::size_t>(u0.rows()));
  for (Eigen::Index i = 0; i < u0.rows(); ++i) unary[static_cast<std::size_t>(i)] = {u0(i, 0), u1(i, 0)};
  std::vector<double> interaction(inter.data(), inter.data() + inter.size());
  return compose_chain_potentials(unary, interaction);
}

}  // namespace

Expr chain_select(const Expr& u_ignore, const Expr& u_select, const Expr& interaction) {
  Graph& g = *u_ignore.graph;
  const ChainPotentials pot = potentials_from(u_ignore.value(), u_select.value(), interaction.value());
  const ChainMarginals m = forward_backward(pot);
  Matrix p(static_cast<Eigen::Index>(pot.n), 1);
  for (std::size_t i = 0; i < pot.n; ++i) p(static_cast<Eigen::Index>(i), 0) = m.p_select[i];
  return g.record(std::move(p), [pot, i0 = u_ignore.id, i1 = u_select.id, ii = interaction.id](Graph& g,
                                                                                             std::size_t self) {
    const Matrix& up = g.grad(self);
    const std::vector<double> upstream(up.data(), up.data() + up.size());
    const ChainPotentialGrad grad = chain_marginal_grad(pot, upstream);
    Matrix& g0 = g.grad(i0);
    Matrix& g1 = g.grad(i1);
    Matrix& gi = g.grad(ii);
    for (std::size_t i = 0; i < pot.n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      g0(r, 0) += grad.unary[i][0];
      g1(r, 0) += grad.unary[i][1];
    }
    // pairwise[i][k][l] = u[i][k] + u[i+1][l] + interaction[i]
    for (std::size_t i = 0; i + 1 < pot.n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto& t = grad.pairwise[i];
      g0(r, 0) += t[0][0] + t[0][1];
      g1(r, 0) += t[1][0] + t[1][1];
      g0(r + 1, 0) += t[0][0] + t[1][0];
      g1(r + 1, 0) += t[0][1] + t[1][1];
      gi(r, 0) += t[0][0] + t[0][1] + t[1][0] + t[1][1];
    }
  });
}

Expr chain_attention(const Expr& history, const Expr& query, Parameter& w_ignore, Parameter& w_select) {
  Graph& g = *history.graph;
  require(history.rows() == query.rows(), ErrorCode::kDimensionMismatch, "history and query dimensions differ");
  const Expr u0 = matmul_tn(history, matmul(g.param(w_ignore), query));
  const Expr u1 = matmul_tn(history, matmul(g.param(w_select), query));
  return chain_select(u0, u1, adjacent_dots(history));
}

Expr arc_scores(const Expr& hiddens, const ArcScoreParams& p, bool mask_left_arcs) {
  Graph& g = *hiddens.graph;
  const Matrix& h = hiddens.value();
  const Eigen::Index n = h.cols();
  require(p.w_parent->value.cols() == h.rows() && p.w_child->value.cols() == h.rows(), ErrorCode::kDimensionMismatch,
          "arc weights do not match the hidden dimension");
  const Matrix a = p.w_parent->value * h;
  const Matrix b = (p.w_child->value * h).colwise() + p.b->value.col(0);
  auto admissible = [mask_left_arcs](Eigen::Index i, Eigen::Index j) { return i != j && !(mask_left_arcs && i >= j); };
  Matrix theta = Matrix::Constant(n, n, kLogZero);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (admissible(i, j)) theta(i, j) = std::tanh(p.s->value.col(0).dot((a.col(i) + b.col(j)).array().tanh().matrix()));

  const Expr wp = g.param(*p.w_parent), wc = g.param(*p.w_child), s = g.param(*p.s), bias = g.param(*p.b);
  return g.record(std::move(theta), [=, ih = hiddens.id](Graph& g, std::size_t self) {
    const Matrix& up = g.grad(self);
    const Matrix& theta = g.value(self);
    const Vector sv = g.value(s.id).col(0);
    Matrix da = Matrix::Zero(a.rows(), n), db = Matrix::Zero(a.rows(), n);
    Vector ds = Vector::Zero(sv.size());
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!admissible(i, j) || up(i, j) == 0.0) continue;
        const Vector t = (a.col(i) + b.col(j)).array().tanh().matrix();
        const double d_outer = up(i, j) * (1.0 - theta(i, j) * theta(i, j));
        ds += d_outer * t;
        const Vector d_pre = (d_outer * sv).cwiseProduct((1.0 - t.array().square()).matrix());
        da.col(i) += d_pre;
        db.col(j) += d_pre;
      }
    const Matrix& hv = g.value(ih);
    g.grad(wp.id).noalias() += da * hv.transpose();
    g.grad(wc.id).noalias() += db * hv.transpose();
    g.grad(bias.id).col(0) += db.rowwise().sum();
    g.grad(s.id).col(0) += ds;
    g.grad(ih).noalias() += g.value(wp.id).transpose() * da;
    g.grad(ih).noalias() += g.value(wc.id).transpose() * db;
  });
}

Expr tree_select(const Expr& theta, bool mask_left_arcs) {
  ArcPotentials pot;
  pot.n = static_cast<std::size_t>(theta.value().rows());
  pot.theta = theta.value();
  pot.mask_left_arcs = mask_left_arcs;
  pot.apply_mask();
  TreeMarginals m = inside_outside(pot);
  return theta.graph->record(std::move(m.p_arc), [pot, it = theta.id](Graph& g, std::size_t self) {
    g.grad(it) += tree_marginal_grad(pot, g.grad(self));
  });
}

Vector gumbel_noise(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = u(rng);
    while (x <= 0.0) x = u(rng);
    g[i] = -std::log(-std::log(x));
  }
  return g;
}

DiscreteSample sample_discrete_with_noise(const Vector& logits, const Vector& noise, double tau) {
  require(tau > 0.0, ErrorCode::kInvalidArgument, "temperature must be positive");
  require(logits.size() == noise.size() && logits.size() > 0, ErrorCode::kDimensionMismatch, "noise length");
  const Vector z = (logits + noise) / tau;
  DiscreteSample s;
  s.relaxed = (z.array() - z.maxCoeff()).exp().matrix();
  s.relaxed /= s.relaxed.sum();
  Eigen::Index arg = 0;
  z.maxCoeff(&arg);
  s.index = static_cast<int>(arg);
  return s;
}

DiscreteSample sample_discrete(const Vector& probs, double tau, std::mt19937_64& rng) {
  require(tau > 0.0, ErrorCode::kInvalidArgument, "temperature must be positive");
  const Vector logits = probs.array().max(1e-300).log().matrix();
  return sample_discrete_with_noise(logits, gumbel_noise(probs.size(), rng), tau);
}

Expr gumbel_straight_through(const Expr& logits, const Vector& noise, double tau) {
  const DiscreteSample s = sample_discrete_with_noise(logits.value().col(0), noise, tau);
  Matrix hard = Matrix::Zero(logits.rows(), 1);
  hard(s.index, 0) = 1.0;
  return logits.graph->record(std::move(hard), [y = s.relaxed, tau, il = logits.id](Graph& g, std::size_t self) {
    const Vector up = g.grad(self).col(0);
    g.grad(il).col(0) += y.cwiseProduct((up.array() - y.dot(up)).matrix()) / tau;
  });
}

}  // namespace svrnn::nn
