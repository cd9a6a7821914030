#include "svrnn/graph.hpp"

#include <cmath>

#include "svrnn/error.hpp"

namespace svrnn::nn {

Parameter& ParameterStore::add(const std::string& name, Matrix init) {
  require(!contains(name), ErrorCode::kInvalidArgument, "duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Matrix::Zero(init.rows(), init.cols());
  p->value = std::move(init);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kInvalidArgument, "unknown parameter " + name);
  return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kInvalidArgument, "unknown parameter " + name);
  return *params_[it->second];
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

Matrix uniform(Eigen::Index rows, Eigen::Index cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix m(rows, cols);
  // Fill in a fixed row-major order so initialization does not depend on
  // Eigen's storage order.
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = u(rng);
  return m;
}

Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  return uniform(rows, cols, std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
}

const Matrix& Expr::value() const { return graph->value(id); }

Expr Graph::input(Matrix value) { return record(std::move(value), nullptr); }

Expr Graph::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Expr{this, it->second};
  Node node;
  node.param = &p;
  nodes_.push_back(std::move(node));
  param_nodes_[&p] = nodes_.size() - 1;
  return Expr{this, nodes_.size() - 1};
}

Expr Graph::record(Matrix value, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Expr{this, nodes_.size() - 1};
}

const Matrix& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value : n.value;
}

Matrix& Graph::grad(std::size_t id) {
  Node& n = nodes_[id];
  return n.param ? n.param->grad : n.grad;
}

void Graph::ensure_grads() {
  if (grads_ready_) return;
  for (auto& n : nodes_)
    if (!n.param) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  grads_ready_ = true;
}

void Graph::seed(const Expr& e, const Matrix& g) {
  ensure_grads();
  grad(e.id) += g;
}

void Graph::run_backward() {
  ensure_grads();
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.param) n.backward(*this, i);
  }
}

namespace {

Graph& graph_of(const Expr& a, const Expr& b) {
  require(a.graph == b.graph, ErrorCode::kInvalidArgument, "expressions belong to different graphs");
  return *a.graph;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::kDimensionMismatch,
          std::string(op) + ": operand shapes differ");
}

}  // namespace

Expr matmul(const Expr& a, const Expr& b) {
  Graph& g = graph_of(a, b);
  require(a.value().cols() == b.value().rows(), ErrorCode::kDimensionMismatch, "matmul: inner dimensions differ");
  return g.record(a.value() * b.value(), [ia = a.id, ib = b.id](Graph& g, std::size_t self) {
    const Matrix& up = g.grad(self);
    g.grad(ia).noalias() += up * g.value(ib).transpose();
    g.grad(ib).noalias() += g.value(ia).transpose() * up;
  });
}

Expr matmul_tn(const Expr& a, const Expr& b) {
  Graph& g = graph_of(a, b);
  require(a.value().rows() == b.value().rows(), ErrorCode::kDimensionMismatch, "matmul_tn: row counts differ");
  return g.record(a.value().transpose() * b.value(), [ia = a.id, ib = b.id](Graph& g, std::size_t self) {
    const Matrix& up = g.grad(self);
    g.grad(ia).noalias() += g.value(ib) * up.transpose();
    g.grad(ib).noalias() += g.value(ia) * up;
  });
}

Expr add(const Expr& a, const Expr& b) {
  Graph& g = graph_of(a, b);
  check_same_shape(a.value(), b.value(), "add");
  return g.record(a.value() + b.value(), [ia = a.id, ib = b.id](Graph& g, std::size_t self) {
    g.grad(ia) += g.grad(self);
    g.grad(ib) += g.grad(self);
  });
}

Expr sub(const Expr& a, const Expr& b) {
  Graph& g = graph_of(a, b);
  check_same_shape(a.value(), b.value(), "sub");
  return g.record(a.value() - b.value(), [ia = a.id, ib = b.id](Graph& g, std::size_t self) {
    g.grad(ia) += g.grad(self);
    g.grad(ib) -= g.grad(self);
  });
}

Expr cmul(const Expr& a, const Expr& b) {
  Graph& g = graph_of(a, b);
  check_same_shape(a.value(), b.value(), "cmul");
  return g.record(a.value().cwiseProduct(b.value()), [ia = a.id, ib = b.id](Graph& g, std::size_t self) {
    const Matrix& up = g.grad(self);
    g.grad(ia) += up.cwiseProduct(g.value(ib));
    g.grad(ib) += up.cwiseProduct(g.value(ia));
  });
}

Expr scale(const Expr& a, double k) {
  return a.graph->record(a.value() * k, [ia = a.id, k](Graph& g, std::size_t self) { g.grad(ia) += k * g.grad(self); });
}

Expr tanh(const Expr& a) {
  return a.graph->record(a.value().array().tanh().matrix(), [ia = a.id](Graph& g, std::size_t self) {
    const Matrix& y = g.value(self);
    g.grad(ia).array() += g.grad(self).array() * (1.0 - y.array().square());
  });
}

Expr sigmoid(const Expr& a) {
  Matrix y = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  return a.graph->record(std::move(y), [ia = a.id](Graph& g, std::size_t self) {
    const Matrix& y = g.value(self);
    g.grad(ia).array() += g.grad(self).array() * y.array() * (1.0 - y.array());
  });
}

Expr affine(const Expr& w, const Expr& x, const Expr& b) {
  Graph& g = graph_of(w, x);
  require(w.value().cols() == x.value().rows() && b.value().rows() == w.value().rows(), ErrorCode::kDimensionMismatch,
          "affine: shapes disagree");
  Matrix y = b.value();
  y.noalias() += w.value() * x.value();
  return g.record(std::move(y), [iw = w.id, ix = x.id, ib = b.id](Graph& g, std::size_t self) {
    const Matrix& up = g.grad(self);
    g.grad(iw).noalias() += up * g.value(ix).transpose();
    g.grad(ix).noalias() += g.value(iw).transpose() * up;
    g.grad(ib) += up;
  });
}

Expr dot(const Expr& a, const Expr& b) {
  Graph& g = graph_of(a, b);
  check_same_shape(a.value(), b.value(), "dot");
  const double v = a.value().cwiseProduct(b.value()).sum();
  return g.record(Matrix::Constant(1, 1, v), [ia = a.id, ib = b.id](Graph& g, std::size_t self) {
    const double up = g.grad(self)(0, 0);
    g.grad(ia) += up * g.value(ib);
    g.grad(ib) += up * g.value(ia);
  });
}

Expr sum(const Expr& a) {
  return a.graph->record(Matrix::Constant(1, 1, a.value().sum()), [ia = a.id](Graph& g, std::size_t self) {
    g.grad(ia).array() += g.grad(self)(0, 0);
  });
}

Expr sum(const std::vector<Expr>& scalars) {
  require(!scalars.empty(), ErrorCode::kInvalidArgument, "sum of nothing");
  double v = 0.0;
  std::vector<std::size_t> ids;
  ids.reserve(scalars.size());
  for (const auto& s : scalars) {
    v += s.scalar();
    ids.push_back(s.id);
  }
  return scalars.front().graph->record(Matrix::Constant(1, 1, v), [ids](Graph& g, std::size_t self) {
    const double up = g.grad(self)(0, 0);
    for (auto id : ids) g.grad(id)(0, 0) += up;
  });
}

Expr concat(const std::vector<Expr>& parts) {
  require(!parts.empty(), ErrorCode::kInvalidArgument, "concat of nothing");
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    require(p.value().cols() == 1, ErrorCode::kDimensionMismatch, "concat expects column vectors");
    rows += p.rows();
  }
  Matrix out(rows, 1);
  std::vector<std::size_t> ids;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.block(at, 0, p.rows(), 1) = p.value();
    at += p.rows();
    ids.push_back(p.id);
  }
  return parts.front().graph->record(std::move(out), [ids](Graph& g, std::size_t self) {
    Eigen::Index at = 0;
    for (auto id : ids) {
      const Eigen::Index r = g.value(id).rows();
      g.grad(id) += g.grad(self).block(at, 0, r, 1);
      at += r;
    }
  });
}

Expr slice(const Expr& a, Eigen::Index start, Eigen::Index length) {
  require(start >= 0 && start + length <= a.rows(), ErrorCode::kOutOfRange, "slice out of range");
  return a.graph->record(a.value().block(start, 0, length, a.value().cols()),
                         [ia = a.id, start, length](Graph& g, std::size_t self) {
                           g.grad(ia).block(start, 0, length, g.grad(ia).cols()) += g.grad(self);
                         });
}

Expr hstack(const std::vector<Expr>& columns) {
  require(!columns.empty(), ErrorCode::kInvalidArgument, "hstack of nothing");
  const Eigen::Index rows = columns.front().rows();
  Matrix out(rows, static_cast<Eigen::Index>(columns.size()));
  std::vector<std::size_t> ids;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    require(columns[j].rows() == rows && columns[j].value().cols() == 1, ErrorCode::kDimensionMismatch,
            "hstack expects equal-length column vectors");
    out.col(static_cast<Eigen::Index>(j)) = columns[j].value();
    ids.push_back(columns[j].id);
  }
  return columns.front().graph->record(std::move(out), [ids](Graph& g, std::size_t self) {
    for (std::size_t j = 0; j < ids.size(); ++j) g.grad(ids[j]) += g.grad(self).col(static_cast<Eigen::Index>(j));
  });
}

Expr column(const Expr& a, Eigen::Index j) {
  require(j >= 0 && j < a.value().cols(), ErrorCode::kOutOfRange, "column out of range");
  return a.graph->record(a.value().col(j), [ia = a.id, j](Graph& g, std::size_t self) {
    g.grad(ia).col(j) += g.grad(self);
  });
}

Expr softmax(const Expr& a) {
  const Matrix& x = a.value();
  Matrix y = (x.array() - x.maxCoeff()).exp().matrix();
  y /= y.sum();
  return a.graph->record(std::move(y), [ia = a.id](Graph& g, std::size_t self) {
    const Matrix& y = g.value(self);
    const Matrix& up = g.grad(self);
    const double inner = y.cwiseProduct(up).sum();
    g.grad(ia).array() += y.array() * (up.array() - inner);
  });
}

Expr log_softmax(const Expr& a) {
  const Matrix& x = a.value();
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  return a.graph->record((x.array() - lse).matrix(), [ia = a.id](Graph& g, std::size_t self) {
    const Matrix& y = g.value(self);
    const Matrix& up = g.grad(self);
    g.grad(ia).array() += up.array() - y.array().exp() * up.sum();
  });
}

Expr pick(const Expr& a, Eigen::Index i) {
  require(i >= 0 && i < a.rows(), ErrorCode::kOutOfRange, "pick index out of range");
  return a.graph->record(Matrix::Constant(1, 1, a.value()(i, 0)), [ia = a.id, i](Graph& g, std::size_t self) {
    g.grad(ia)(i, 0) += g.grad(self)(0, 0);
  });
}

Expr lookup(Graph& g, Parameter& table, Eigen::Index index) {
  require(index >= 0 && index < table.value.cols(), ErrorCode::kOutOfRange, "token id outside the vocabulary");
  return g.record(table.value.col(index), [&table, index](Graph& g, std::size_t self) {
    table.grad.col(index) += g.grad(self);
  });
}

Expr adjacent_dots(const Expr& stacked) {
  const Matrix& h = stacked.value();
  const Eigen::Index n = h.cols();
  Matrix out(std::max<Eigen::Index>(n - 1, 0), 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) out(i, 0) = h.col(i).dot(h.col(i + 1));
  return stacked.graph->record(std::move(out), [ia = stacked.id](Graph& g, std::size_t self) {
    const Matrix& h = g.value(ia);
    const Matrix& up = g.grad(self);
    Matrix& gh = g.grad(ia);
    for (Eigen::Index i = 0; i + 1 < h.cols(); ++i) {
      gh.col(i) += up(i, 0) * h.col(i + 1);
      gh.col(i + 1) += up(i, 0) * h.col(i);
    }
  });
}

}  // namespace svrnn::nn
