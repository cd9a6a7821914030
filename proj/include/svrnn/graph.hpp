#pragma once

// Reverse-mode tape for the model's forward pass. Values are column vectors
// or small matrices; parameter leaves read and accumulate directly into their
// Parameter storage.

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace svrnn::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

class ParameterStore {
 public:
  Parameter& add(const std::string& name, Matrix init);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::vector<std::unique_ptr<Parameter>>& all() { return params_; }
  const std::vector<std::unique_ptr<Parameter>>& all() const { return params_; }

  void zero_grad();
  std::size_t scalar_count() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Glorot-uniform matrix.
Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);
Matrix uniform(Eigen::Index rows, Eigen::Index cols, double bound, std::mt19937_64& rng);

class Graph;

struct Expr {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  double scalar() const { return value()(0, 0); }
  Eigen::Index rows() const { return value().rows(); }
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Expr input(Matrix value);
  Expr param(Parameter& p);
  Expr record(Matrix value, BackwardFn backward);

  const Matrix& value(std::size_t id) const;
  /// Gradient slot of a node; valid once backward has begun.
  Matrix& grad(std::size_t id);

  /// Adds `g` to the seed of node `e`. Seeds persist until run_backward.
  void seed(const Expr& e, const Matrix& g);
  void seed(const Expr& e, double g) { seed(e, Matrix::Constant(1, 1, g)); }
  /// Propagates all seeds to every node and into parameter gradients.
  void run_backward();
  void backward(const Expr& loss) {
    seed(loss, 1.0);
    run_backward();
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Parameter* param = nullptr;
    BackwardFn backward;
  };
  void ensure_grads();

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool grads_ready_ = false;
};

// Elementwise and linear algebra.
Expr matmul(const Expr& a, const Expr& b);
/// a^T b.
Expr matmul_tn(const Expr& a, const Expr& b);
Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr cmul(const Expr& a, const Expr& b);
Expr scale(const Expr& a, double k);
Expr tanh(const Expr& a);
Expr sigmoid(const Expr& a);
Expr affine(const Expr& w, const Expr& x, const Expr& b);
Expr dot(const Expr& a, const Expr& b);
Expr sum(const Expr& a);
Expr sum(const std::vector<Expr>& scalars);

// Shape.
Expr concat(const std::vector<Expr>& parts);
Expr slice(const Expr& a, Eigen::Index start, Eigen::Index length);
Expr hstack(const std::vector<Expr>& columns);
Expr column(const Expr& a, Eigen::Index j);

// Distributions.
Expr softmax(const Expr& a);
Expr log_softmax(const Expr& a);
Expr pick(const Expr& a, Eigen::Index i);

/// Column `index` of a d x V embedding table. Only that column's gradient is
/// touched on the way back.
Expr lookup(Graph& g, Parameter& table, Eigen::Index index);

/// Dot products of adjacent columns: out[i] = H.col(i) . H.col(i + 1).
Expr adjacent_dots(const Expr& stacked);

}  // namespace svrnn::nn
