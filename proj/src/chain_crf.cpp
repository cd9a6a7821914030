#include "svrnn/chain_crf.hpp"

#include <cmath>

#include "dual.hpp"
#include "svrnn/error.hpp"

namespace svrnn {

using detail::Dual;

namespace {

void check_shape(const ChainPotentials& pot) {
  require(pot.n >= 1, ErrorCode::kInvalidArgument, "chain potentials need n >= 1");
  require(pot.unary.size() == pot.n && pot.pairwise.size() + 1 == pot.n, ErrorCode::kDimensionMismatch,
          "chain potential tables do not match n");
}

bool masked(const ChainPotentials& pot, std::size_t i, int c) { return pot.unary[i][c] == kLogZero; }

// Node marginals p(xi_i = c) and edge marginals p(xi_i = k, xi_{i+1} = l)
// under the scoring convention in the header. Scalar is double or Dual; the
// tangent inputs are only read in the Dual instantiation.
template <typename T>
struct ChainResult {
  std::vector<std::array<T, 2>> node;
  std::vector<std::array<std::array<T, 2>, 2>> edge;
  T log_z;
};

template <typename T>
ChainResult<T> run_forward_backward(const ChainPotentials& pot, const ChainPotentialGrad* tangent) {
  using detail::accumulate;
  using detail::make_score;
  using detail::mul;
  const std::size_t n = pot.n;
  auto tan_u = [&](std::size_t i, int c) { return tangent ? tangent->unary[i][c] : 0.0; };
  auto tan_p = [&](std::size_t i, int k, int l) { return tangent ? tangent->pairwise[i][k][l] : 0.0; };
  const T zero = make_score<T>(kLogZero, 0.0);
  const T one = make_score<T>(kLogOne, 0.0);

  ChainResult<T> out;
  out.node.assign(n, {zero, zero});

  if (n == 1) {
    T z = zero;
    for (int c = 0; c < 2; ++c) accumulate(z, make_score<T>(pot.unary[0][c], tan_u(0, c)));
    out.log_z = z;
    for (int c = 0; c < 2; ++c) out.node[0][c] = detail::prob(make_score<T>(pot.unary[0][c], tan_u(0, c)), z);
    return out;
  }

  auto mask = [&](std::size_t i, int c) { return masked(pot, i, c) ? zero : one; };
  auto theta = [&](std::size_t i, int k, int l) { return make_score<T>(pot.pairwise[i][k][l], tan_p(i, k, l)); };

  // alpha[i][c]: all prefixes ending in state c at i, including c's mask.
  // beta[i][c]: all suffixes after i given state c at i, excluding i's mask.
  std::vector<std::array<T, 2>> alpha(n, {zero, zero}), beta(n, {zero, zero});
  for (int c = 0; c < 2; ++c) alpha[0][c] = mask(0, c);  // <t> -> c carries semiring one
  for (std::size_t i = 1; i < n; ++i) {
    for (int c = 0; c < 2; ++c) {
      T acc = zero;
      for (int y = 0; y < 2; ++y) accumulate(acc, mul(alpha[i - 1][y], theta(i - 1, y, c)));
      alpha[i][c] = mul(acc, mask(i, c));
    }
  }
  for (int c = 0; c < 2; ++c) beta[n - 1][c] = one;  // c -> <t> carries semiring one
  for (std::size_t i = n - 1; i-- > 0;) {
    for (int c = 0; c < 2; ++c) {
      T acc = zero;
      for (int y = 0; y < 2; ++y) accumulate(acc, mul(mul(theta(i, c, y), mask(i + 1, y)), beta[i + 1][y]));
      beta[i][c] = acc;
    }
  }
  T z = zero;
  for (int c = 0; c < 2; ++c) accumulate(z, alpha[n - 1][c]);
  out.log_z = z;
  if (detail::value_of(z) == kLogZero) return out;

  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 2; ++c) out.node[i][c] = detail::prob(mul(alpha[i][c], beta[i][c]), z);
  out.edge.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        out.edge[i][k][l] =
            detail::prob(mul(mul(alpha[i][k], theta(i, k, l)), mul(mask(i + 1, l), beta[i + 1][l])), z);
  return out;
}

ChainPotentialGrad zero_grad(std::size_t n) {
  ChainPotentialGrad g;
  g.unary.assign(n, {0.0, 0.0});
  g.pairwise.assign(n > 0 ? n - 1 : 0, {{{0.0, 0.0}, {0.0, 0.0}}});
  return g;
}

}  // namespace

ChainPotentials ChainPotentials::zeros(std::size_t n) {
  ChainPotentials p;
  p.n = n;
  p.unary.assign(n, {0.0, 0.0});
  p.pairwise.assign(n > 0 ? n - 1 : 0, {{{0.0, 0.0}, {0.0, 0.0}}});
  return p;
}

ChainPotentials compose_chain_potentials(const std::vector<Pair2>& unary, const std::vector<double>& interaction) {
  require(!unary.empty(), ErrorCode::kInvalidArgument, "chain needs at least one position");
  require(interaction.size() + 1 == unary.size(), ErrorCode::kDimensionMismatch,
          "interaction length must be n - 1");
  ChainPotentials pot;
  pot.n = unary.size();
  pot.unary = unary;
  pot.pairwise.resize(pot.n - 1);
  for (std::size_t i = 0; i + 1 < pot.n; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) pot.pairwise[i][k][l] = unary[i][k] + unary[i + 1][l] + interaction[i];
  return pot;
}

ChainPotentials build_chain_potentials(const std::vector<Eigen::VectorXd>& history, const Eigen::VectorXd& query,
                                       const Eigen::MatrixXd& w_ignore, const Eigen::MatrixXd& w_select) {
  require(!history.empty(), ErrorCode::kInvalidArgument, "structured attention needs a nonempty history");
  const auto d = query.size();
  require(w_ignore.rows() == d && w_ignore.cols() == d && w_select.rows() == d && w_select.cols() == d,
          ErrorCode::kDimensionMismatch, "bilinear weights must be d x d");
  const Eigen::VectorXd q0 = w_ignore * query;
  const Eigen::VectorXd q1 = w_select * query;
  std::vector<Pair2> unary(history.size());
  std::vector<double> interaction(history.size() - 1);
  for (std::size_t i = 0; i < history.size(); ++i) {
    require(history[i].size() == d, ErrorCode::kDimensionMismatch, "history vector dimension differs from query");
    unary[i] = {history[i].dot(q0), history[i].dot(q1)};
    if (i + 1 < history.size()) {
      require(history[i + 1].size() == d, ErrorCode::kDimensionMismatch,
              "history vector dimension differs from query");
      interaction[i] = history[i].dot(history[i + 1]);
    }
  }
  return compose_chain_potentials(unary, interaction);
}

ChainMarginals forward_backward(const ChainPotentials& pot) {
  check_shape(pot);
  const auto r = run_forward_backward<double>(pot, nullptr);
  require(r.log_z != kLogZero, ErrorCode::kInfeasible, "chain has no configuration with nonzero weight");
  ChainMarginals m;
  m.log_partition = r.log_z;
  m.p_select.resize(pot.n);
  for (std::size_t i = 0; i < pot.n; ++i) m.p_select[i] = r.node[i][1];
  return m;
}

ChainPotentialGrad chain_marginal_grad(const ChainPotentials& pot, const std::vector<double>& upstream) {
  check_shape(pot);
  require(upstream.size() == pot.n, ErrorCode::kDimensionMismatch, "upstream gradient length must equal n");
  const std::size_t n = pot.n;

  // Direction: p_select written as a linear map of the log-partition gradient.
  ChainPotentialGrad dir = zero_grad(n);
  if (n == 1) {
    dir.unary[0][1] = upstream[0];
  } else {
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (int l = 0; l < 2; ++l) dir.pairwise[i][1][l] += upstream[i];
    for (int k = 0; k < 2; ++k) dir.pairwise[n - 2][k][1] += upstream[n - 1];
  }

  const auto r = run_forward_backward<Dual>(pot, &dir);
  require(r.log_z.v != kLogZero, ErrorCode::kInfeasible, "chain has no configuration with nonzero weight");
  ChainPotentialGrad g = zero_grad(n);
  if (n == 1) {
    for (int c = 0; c < 2; ++c) g.unary[0][c] = r.node[0][c].d;
  } else {
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) g.pairwise[i][k][l] = r.edge[i][k][l].d;
  }
  return g;
}

ChainMarginals brute_force_chain(const ChainPotentials& pot) {
  check_shape(pot);
  require(pot.n <= kBruteForceChainMax, ErrorCode::kOutOfRange, "brute_force_chain supports n <= 20");
  const std::size_t n = pot.n;
  const std::size_t count = std::size_t{1} << n;
  std::vector<LogScore> scores(count);
  for (std::size_t cfg = 0; cfg < count; ++cfg) {
    auto bit = [&](std::size_t i) { return static_cast<int>((cfg >> i) & 1U); };
    LogScore s = 0.0;
    if (n == 1) {
      s = pot.unary[0][bit(0)];
    } else {
      for (std::size_t i = 0; i < n; ++i)
        if (masked(pot, i, bit(i))) s = kLogZero;
      for (std::size_t i = 0; i + 1 < n && s != kLogZero; ++i) s += pot.pairwise[i][bit(i)][bit(i + 1)];
    }
    scores[cfg] = s;
  }
  ChainMarginals m;
  m.log_partition = log_sum(scores);
  require(m.log_partition != kLogZero, ErrorCode::kInfeasible, "chain has no configuration with nonzero weight");
  m.p_select.assign(n, 0.0);
  for (std::size_t cfg = 0; cfg < count; ++cfg) {
    if (scores[cfg] == kLogZero) continue;
    const double w = std::exp(scores[cfg] - m.log_partition);
    for (std::size_t i = 0; i < n; ++i)
      if ((cfg >> i) & 1U) m.p_select[i] += w;
  }
  return m;
}

}  // namespace svrnn
