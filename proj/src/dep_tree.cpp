#include "svrnn/dep_tree.hpp"

#include <cmath>

#include "dual.hpp"
#include "svrnn/error.hpp"

namespace svrnn {

using detail::Dual;

namespace {

enum Dir { kL = 0, kR = 1 };

// Chart indexed [start][end][direction][complete], 0-indexed and inclusive.
template <typename T>
class Chart {
 public:
  Chart(std::size_t n, const T& fill) : n_(n), cells_(n * n * 4, fill) {}
  T& at(std::size_t s, std::size_t t, int dir, int complete) { return cells_[((s * n_ + t) * 2 + dir) * 2 + complete]; }

 private:
  std::size_t n_;
  std::vector<T> cells_;
};

template <typename T>
struct InsideOutsideResult {
  std::vector<T> p;  // n * n row-major, p[i * n + j] = p(i parent of j)
  T log_z;
};

// Direct transcription of the span inside-outside recursion. Span endpoints s
// and t are 0-indexed; the "s > 1" guards on left spans become s > 0.
template <typename T>
InsideOutsideResult<T> run_inside_outside(const ArcPotentials& pot, const Eigen::MatrixXd* tangent) {
  using detail::accumulate;
  using detail::make_score;
  using detail::mul;
  const std::size_t n = pot.n;
  const T zero = make_score<T>(kLogZero, 0.0);
  auto theta = [&](std::size_t i, std::size_t j) {
    return make_score<T>(pot.theta(i, j), tangent ? (*tangent)(i, j) : 0.0);
  };

  Chart<T> alpha(n, zero), beta(n, zero);
  for (std::size_t i = 0; i < n; ++i) {
    alpha.at(i, i, kL, 1) = make_score<T>(0.0, 0.0);
    alpha.at(i, i, kR, 1) = make_score<T>(0.0, 0.0);
  }
  beta.at(0, n - 1, kR, 1) = make_score<T>(0.0, 0.0);

  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t s = 0; s + k < n; ++s) {
      const std::size_t t = s + k;
      T right_inc = zero, left_inc = zero;
      for (std::size_t u = s; u < t; ++u) {
        const T split = mul(alpha.at(s, u, kR, 1), alpha.at(u + 1, t, kL, 1));
        accumulate(right_inc, mul(split, theta(s, t)));
        accumulate(left_inc, mul(split, theta(t, s)));
      }
      alpha.at(s, t, kR, 0) = right_inc;
      alpha.at(s, t, kL, 0) = left_inc;
      T right_comp = zero, left_comp = zero;
      for (std::size_t u = s + 1; u <= t; ++u) accumulate(right_comp, mul(alpha.at(s, u, kR, 0), alpha.at(u, t, kR, 1)));
      for (std::size_t u = s; u < t; ++u) accumulate(left_comp, mul(alpha.at(s, u, kL, 1), alpha.at(u, t, kL, 0)));
      alpha.at(s, t, kR, 1) = right_comp;
      alpha.at(s, t, kL, 1) = left_comp;
    }
  }

  for (std::size_t k = n - 1; k >= 1; --k) {
    for (std::size_t s = 0; s + k < n; ++s) {
      const std::size_t t = s + k;
      for (std::size_t u = s + 1; u <= t; ++u) {
        accumulate(beta.at(s, u, kR, 0), mul(beta.at(s, t, kR, 1), alpha.at(u, t, kR, 1)));
        accumulate(beta.at(u, t, kR, 1), mul(beta.at(s, t, kR, 1), alpha.at(s, u, kR, 0)));
      }
      if (s > 0) {
        for (std::size_t u = s; u < t; ++u) {
          accumulate(beta.at(s, u, kL, 1), mul(beta.at(s, t, kL, 1), alpha.at(u, t, kL, 0)));
          accumulate(beta.at(u, t, kL, 0), mul(beta.at(s, t, kL, 1), alpha.at(s, u, kL, 1)));
        }
      }
      for (std::size_t u = s; u < t; ++u) {
        accumulate(beta.at(s, u, kR, 1), mul(mul(beta.at(s, t, kR, 0), alpha.at(u + 1, t, kL, 1)), theta(s, t)));
        accumulate(beta.at(u + 1, t, kL, 1), mul(mul(beta.at(s, t, kR, 0), alpha.at(s, u, kR, 1)), theta(s, t)));
      }
      if (s > 0) {
        for (std::size_t u = s; u < t; ++u) {
          accumulate(beta.at(s, u, kR, 1), mul(mul(beta.at(s, t, kL, 0), alpha.at(u + 1, t, kL, 1)), theta(t, s)));
          accumulate(beta.at(u + 1, t, kL, 1), mul(mul(beta.at(s, t, kL, 0), alpha.at(s, u, kR, 1)), theta(t, s)));
        }
      }
    }
  }

  InsideOutsideResult<T> out;
  out.log_z = alpha.at(0, n - 1, kR, 1);
  out.p.assign(n * n, detail::prob(zero, make_score<T>(0.0, 0.0)));
  if (detail::value_of(out.log_z) == kLogZero) return out;
  for (std::size_t s = 0; s + 1 < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      out.p[s * n + t] = detail::prob(mul(alpha.at(s, t, kR, 0), beta.at(s, t, kR, 0)), out.log_z);
      if (s > 0) out.p[t * n + s] = detail::prob(mul(alpha.at(s, t, kL, 0), beta.at(s, t, kL, 0)), out.log_z);
    }
  }
  return out;
}

void check_pot(const ArcPotentials& pot) {
  require(pot.n >= 2, ErrorCode::kInvalidArgument, "inside_outside needs n >= 2");
  require(static_cast<std::size_t>(pot.theta.rows()) == pot.n && static_cast<std::size_t>(pot.theta.cols()) == pot.n,
          ErrorCode::kDimensionMismatch, "theta must be n x n");
}

}  // namespace

void ArcPotentials::apply_mask() {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i == j || (mask_left_arcs && i >= j)) theta(i, j) = kLogZero;
}

ArcPotentials ArcPotentials::uniform(std::size_t n, bool mask_left_arcs) {
  ArcPotentials p;
  p.n = n;
  p.mask_left_arcs = mask_left_arcs;
  p.theta = Eigen::MatrixXd::Zero(n, n);
  p.apply_mask();
  return p;
}

ArcPotentials build_arc_potentials(const std::vector<Eigen::VectorXd>& hiddens, const ArcParams& params,
                                   bool mask_left_arcs) {
  require(!hiddens.empty(), ErrorCode::kInvalidArgument, "no utterances");
  const auto d = hiddens.front().size();
  const auto da = params.s.size();
  require(params.w_parent.rows() == da && params.w_child.rows() == da && params.b.size() == da,
          ErrorCode::kDimensionMismatch, "arc parameters disagree on the attention dimension");
  require(params.w_parent.cols() == d && params.w_child.cols() == d, ErrorCode::kDimensionMismatch,
          "arc weight matrices must have d columns");
  const std::size_t n = hiddens.size();
  std::vector<Eigen::VectorXd> as_parent(n), as_child(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(hiddens[i].size() == d, ErrorCode::kDimensionMismatch, "hidden vectors differ in dimension");
    as_parent[i] = params.w_parent * hiddens[i];
    as_child[i] = params.w_child * hiddens[i] + params.b;
  }
  ArcPotentials pot;
  pot.n = n;
  pot.mask_left_arcs = mask_left_arcs;
  pot.theta.resize(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      pot.theta(i, j) = std::tanh(params.s.dot((as_parent[i] + as_child[j]).array().tanh().matrix()));
  pot.apply_mask();
  return pot;
}

TreeMarginals inside_outside(const ArcPotentials& pot) {
  check_pot(pot);
  const auto r = run_inside_outside<double>(pot, nullptr);
  require(r.log_z != kLogZero, ErrorCode::kInfeasible, "no tree has nonzero weight");
  TreeMarginals m;
  m.log_partition = r.log_z;
  m.p_arc = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      r.p.data(), static_cast<Eigen::Index>(pot.n), static_cast<Eigen::Index>(pot.n));
  return m;
}

Eigen::MatrixXd tree_marginal_grad(const ArcPotentials& pot, const Eigen::MatrixXd& upstream) {
  check_pot(pot);
  require(upstream.rows() == pot.theta.rows() && upstream.cols() == pot.theta.cols(), ErrorCode::kDimensionMismatch,
          "upstream must be n x n");
  const std::size_t n = pot.n;
  // Marginals that the recursion never produces (arcs into the root) are
  // identically zero, so their upstream entries do not contribute.
  Eigen::MatrixXd dir = upstream;
  for (std::size_t j = 0; j < n; ++j) dir(j, 0) = 0.0;
  const auto r = run_inside_outside<Dual>(pot, &dir);
  require(r.log_z.v != kLogZero, ErrorCode::kInfeasible, "no tree has nonzero weight");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (pot.theta(i, j) != kLogZero) g(i, j) = r.p[i * n + j].d;
  return g;
}

namespace {

// Rooted at 0 and acyclic: every node reaches 0 within n steps.
bool is_rooted_tree(const std::vector<int>& parents) {
  const int n = static_cast<int>(parents.size());
  if (n == 0 || parents[0] != -1) return false;
  for (int j = 1; j < n; ++j) {
    int cur = j;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > n || parents[cur] < 0 || parents[cur] >= n) return false;
      cur = parents[cur];
    }
  }
  return true;
}

}  // namespace

bool is_projective_tree(const std::vector<int>& parents) {
  if (!is_rooted_tree(parents)) return false;
  const int n = static_cast<int>(parents.size());
  auto dominates = [&](int head, int node) {
    for (int cur = node; cur != -1; cur = parents[cur])
      if (cur == head) return true;
    return false;
  };
  for (int d = 1; d < n; ++d) {
    const int h = parents[d];
    for (int k = std::min(h, d) + 1; k < std::max(h, d); ++k)
      if (!dominates(h, k)) return false;
  }
  return true;
}

TreeMarginals brute_force_trees(const ArcPotentials& pot, bool projective_only) {
  check_pot(pot);
  require(pot.n <= kBruteForceTreeMax, ErrorCode::kOutOfRange, "brute_force_trees supports n <= 8");
  const int n = static_cast<int>(pot.n);
  std::vector<int> parents(n, -1);
  std::vector<int> candidate(n, 0);  // candidate[j] indexes the parent choice for j >= 1
  std::vector<LogScore> scores;
  std::vector<std::vector<int>> trees;

  while (true) {
    bool admissible = true;
    for (int j = 1; j < n; ++j) {
      parents[j] = candidate[j];
      if (parents[j] == j || (pot.mask_left_arcs && parents[j] >= j)) admissible = false;
    }
    if (admissible && (projective_only ? is_projective_tree(parents) : is_rooted_tree(parents))) {
      LogScore s = 0.0;
      for (int j = 1; j < n && s != kLogZero; ++j)
        s = pot.theta(parents[j], j) == kLogZero ? kLogZero : s + pot.theta(parents[j], j);
      if (s != kLogZero) {
        scores.push_back(s);
        trees.push_back(parents);
      }
    }
    int pos = 1;
    while (pos < n && ++candidate[pos] == n) candidate[pos++] = 0;
    if (pos >= n) break;
  }

  TreeMarginals m;
  m.log_partition = log_sum(scores);
  require(m.log_partition != kLogZero, ErrorCode::kInfeasible, "no tree has nonzero weight");
  m.p_arc = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < trees.size(); ++k) {
    const double w = std::exp(scores[k] - m.log_partition);
    for (int j = 1; j < n; ++j) m.p_arc(trees[k][j], j) += w;
  }
  return m;
}

}  // namespace svrnn
