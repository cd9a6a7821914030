#include "svrnn/neural.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "svrnn/error.hpp"

namespace svrnn::nn {

// ---- vocabulary ----

Vocabulary::Vocabulary() : tokens_{"<pad>", "<unk>", "<bos>", "<eos>"} {
  for (std::size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = static_cast<std::int32_t>(i);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sentences) {
  std::set<std::string> seen;
  for (const auto& s : sentences) seen.insert(s.begin(), s.end());
  Vocabulary v;
  for (const auto& t : seen) {
    if (v.ids_.count(t)) continue;
    v.ids_[t] = static_cast<std::int32_t>(v.tokens_.size());
    v.tokens_.push_back(t);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& id_to_token) {
  require(id_to_token.size() >= 4, ErrorCode::kFormat, "vocabulary lacks reserved entries");
  Vocabulary v;
  for (std::size_t i = 0; i < 4; ++i)
    require(id_to_token[i] == v.tokens_[i], ErrorCode::kFormat, "vocabulary reserved entries are out of place");
  for (std::size_t i = 4; i < id_to_token.size(); ++i) {
    require(!v.ids_.count(id_to_token[i]), ErrorCode::kFormat, "duplicate vocabulary entry " + id_to_token[i]);
    v.ids_[id_to_token[i]] = static_cast<std::int32_t>(i);
    v.tokens_.push_back(id_to_token[i]);
  }
  return v;
}

std::int32_t Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  require(id >= 0 && static_cast<std::size_t>(id) < tokens_.size(), ErrorCode::kOutOfRange, "token id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::int32_t> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      flush();
    } else if (std::ispunct(ch)) {
      flush();
      out.emplace_back(1, static_cast<char>(ch));
    } else {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  flush();
  return out;
}

// ---- layers ----

GruParams GruParams::create(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index hidden,
                            std::mt19937_64& rng) {
  GruParams p;
  p.wx = &store.add(prefix + ".wx", glorot(3 * hidden, in, rng));
  p.wh = &store.add(prefix + ".wh", glorot(3 * hidden, hidden, rng));
  p.bx = &store.add(prefix + ".bx", Matrix::Zero(3 * hidden, 1));
  p.bh = &store.add(prefix + ".bh", Matrix::Zero(3 * hidden, 1));
  return p;
}

GruParams GruParams::bind(ParameterStore& store, const std::string& prefix) {
  return GruParams{&store.get(prefix + ".wx"), &store.get(prefix + ".wh"), &store.get(prefix + ".bx"),
                   &store.get(prefix + ".bh")};
}

Expr gru_cell(const GruParams& p, const Expr& x, const Expr& h) {
  Graph& g = *x.graph;
  const Eigen::Index n = p.hidden();
  require(x.rows() == p.wx->value.cols() && h.rows() == n, ErrorCode::kDimensionMismatch, "gru_cell: input shape");
  const Vector gx = p.wx->value * x.value() + p.bx->value;
  const Vector gh = p.wh->value * h.value() + p.bh->value;
  const Vector r = (1.0 + (-(gx.head(n) + gh.head(n)).array()).exp()).inverse().matrix();
  const Vector u = (1.0 + (-(gx.segment(n, n) + gh.segment(n, n)).array()).exp()).inverse().matrix();
  const Vector gh_n = gh.tail(n);
  const Vector cand = (gx.tail(n) + r.cwiseProduct(gh_n)).array().tanh().matrix();
  Vector out = (1.0 - u.array()).matrix().cwiseProduct(cand) + u.cwiseProduct(h.value());

  const Expr wx = g.param(*p.wx), wh = g.param(*p.wh), bx = g.param(*p.bx), bh = g.param(*p.bh);
  return g.record(std::move(out), [=, ix = x.id, ih = h.id](Graph& g, std::size_t self) {
    const Vector up = g.grad(self);
    const Vector& hv = g.value(ih);
    const Vector d_cand = up.cwiseProduct((1.0 - u.array()).matrix());
    const Vector d_u = up.cwiseProduct(hv - cand);
    const Vector d_cand_pre = d_cand.cwiseProduct((1.0 - cand.array().square()).matrix());
    const Vector d_r = d_cand_pre.cwiseProduct(gh_n);
    Vector dgx(3 * n), dgh(3 * n);
    dgx.head(n) = d_r.cwiseProduct((r.array() * (1.0 - r.array())).matrix());
    dgx.segment(n, n) = d_u.cwiseProduct((u.array() * (1.0 - u.array())).matrix());
    dgx.tail(n) = d_cand_pre;
    dgh.head(2 * n) = dgx.head(2 * n);
    dgh.tail(n) = d_cand_pre.cwiseProduct(r);
    g.grad(wx.id).noalias() += dgx * g.value(ix).transpose();
    g.grad(bx.id) += dgx;
    g.grad(ix).noalias() += g.value(wx.id).transpose() * dgx;
    g.grad(wh.id).noalias() += dgh * hv.transpose();
    g.grad(bh.id) += dgh;
    g.grad(ih).noalias() += g.value(wh.id).transpose() * dgh;
    g.grad(ih) += up.cwiseProduct(u);
  });
}

Linear Linear::create(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index out,
                      std::mt19937_64& rng) {
  return Linear{&store.add(prefix + ".w", glorot(out, in, rng)), &store.add(prefix + ".b", Matrix::Zero(out, 1))};
}

Linear Linear::bind(ParameterStore& store, const std::string& prefix) {
  return Linear{&store.get(prefix + ".w"), &store.get(prefix + ".b")};
}

Expr Linear::operator()(const Expr& x) const {
  Graph& g = *x.graph;
  return affine(g.param(*w), x, g.param(*b));
}

Mlp Mlp::create(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index width,
                Eigen::Index out, std::mt19937_64& rng) {
  return Mlp{Linear::create(store, prefix + ".hidden", in, width, rng),
             Linear::create(store, prefix + ".output", width, out, rng)};
}

Mlp Mlp::bind(ParameterStore& store, const std::string& prefix) {
  return Mlp{Linear::bind(store, prefix + ".hidden"), Linear::bind(store, prefix + ".output")};
}

Expr dropout(const Expr& x, double rate, std::mt19937_64* rng) {
  if (rate <= 0.0 || rng == nullptr) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(x.value().rows(), x.value().cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask(i) = keep(*rng) ? 1.0 / (1.0 - rate) : 0.0;
  return cmul(x, x.graph->input(std::move(mask)));
}

// ---- encoder ----

EncoderParams EncoderParams::create(ParameterStore& store, std::size_t vocab, Eigen::Index emb, Eigen::Index hidden,
                                    Eigen::Index out, std::mt19937_64& rng) {
  EncoderParams p;
  p.embedding = &store.add("embedding", uniform(emb, static_cast<Eigen::Index>(vocab), 0.1, rng));
  p.forward = GruParams::create(store, "encoder.forward", emb, hidden, rng);
  p.backward = GruParams::create(store, "encoder.backward", emb, hidden, rng);
  p.project = Linear::create(store, "encoder.project", 2 * hidden, out, rng);
  return p;
}

EncoderParams EncoderParams::bind(ParameterStore& store) {
  EncoderParams p;
  p.embedding = &store.get("embedding");
  p.forward = GruParams::bind(store, "encoder.forward");
  p.backward = GruParams::bind(store, "encoder.backward");
  p.project = Linear::bind(store, "encoder.project");
  return p;
}

EncoderOutput encode_utterance(Graph& g, const EncoderParams& p, const std::vector<std::int32_t>& tokens) {
  require(!tokens.empty(), ErrorCode::kInvalidArgument, "cannot encode an empty utterance");
  const Eigen::Index h = p.forward.hidden();
  std::vector<Expr> emb;
  emb.reserve(tokens.size());
  for (auto t : tokens) {
    require(t >= 0 && t < p.embedding->value.cols(), ErrorCode::kOutOfRange, "token id outside the vocabulary");
    emb.push_back(lookup(g, *p.embedding, t));
  }
  const std::size_t n = tokens.size();
  std::vector<Expr> fwd(n), bwd(n);
  Expr state = g.input(Matrix::Zero(h, 1));
  for (std::size_t k = 0; k < n; ++k) state = fwd[k] = gru_cell(p.forward, emb[k], state);
  state = g.input(Matrix::Zero(h, 1));
  for (std::size_t k = n; k-- > 0;) state = bwd[k] = gru_cell(p.backward, emb[k], state);

  EncoderOutput out;
  out.word_states.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.word_states.push_back(concat({fwd[k], bwd[k]}));
  out.utterance = tanh(p.project(concat({fwd[n - 1], bwd[0]})));
  return out;
}

// ---- decoder ----

DecoderParams DecoderParams::create(ParameterStore& store, Eigen::Index emb, Eigen::Index hidden, Eigen::Index memory,
                                    std::size_t vocab, std::mt19937_64& rng) {
  DecoderParams p;
  p.input = Linear::create(store, "decoder.input", emb + memory, hidden, rng);
  p.cell = GruParams::create(store, "decoder.cell", hidden, hidden, rng);
  p.w_att = &store.add("decoder.attention", glorot(hidden, memory, rng));
  p.output = Mlp::create(store, "decoder.output", hidden + memory, hidden, static_cast<Eigen::Index>(vocab), rng);
  return p;
}

DecoderParams DecoderParams::bind(ParameterStore& store) {
  DecoderParams p;
  p.input = Linear::bind(store, "decoder.input");
  p.cell = GruParams::bind(store, "decoder.cell");
  p.w_att = &store.get("decoder.attention");
  p.output = Mlp::bind(store, "decoder.output");
  return p;
}

DecoderState decoder_start(Graph& g, const DecoderParams& p, const Expr& initial_hidden) {
  require(initial_hidden.rows() == p.hidden(), ErrorCode::kDimensionMismatch, "decoder initial state dimension");
  return DecoderState{initial_hidden, g.input(Matrix::Zero(p.memory(), 1)), 0};
}

DecodeStep decode_step(const DecoderParams& p, const DecoderState& state, const Expr& prev_embedding,
                       const Expr& memories) {
  Graph& g = *memories.graph;
  require(memories.value().cols() >= 1, ErrorCode::kInvalidArgument, "decoder needs at least one memory");
  require(memories.rows() == p.memory(), ErrorCode::kDimensionMismatch, "decoder memory dimension");
  require(prev_embedding.rows() + p.memory() == p.input.w->value.cols(), ErrorCode::kDimensionMismatch,
          "decoder embedding dimension");
  const Expr in = tanh(p.input(concat({prev_embedding, state.context})));
  const Expr hidden = gru_cell(p.cell, in, state.hidden);
  const Expr query = matmul_tn(g.param(*p.w_att), hidden);  // memory x 1
  const Expr weights = softmax(matmul_tn(memories, query));  // memories x 1
  const Expr context = matmul(memories, weights);
  DecodeStep out;
  out.next = DecoderState{hidden, context, state.step + 1};
  out.log_probs = log_softmax(p.output(concat({hidden, context})));
  out.attention = weights;
  return out;
}

Expr sequence_nll(const std::vector<Expr>& log_probs, const std::vector<std::int32_t>& targets,
                  const std::vector<bool>& mask) {
  require(log_probs.size() == targets.size() && targets.size() == mask.size(), ErrorCode::kDimensionMismatch,
          "sequence_nll: lengths differ");
  std::vector<Expr> picked;
  for (std::size_t k = 0; k < targets.size(); ++k)
    if (mask[k]) picked.push_back(pick(log_probs[k], targets[k]));
  require(!picked.empty(), ErrorCode::kInvalidArgument, "sequence_nll: every position is masked");
  return scale(sum(picked), -1.0 / static_cast<double>(picked.size()));
}

Expr sequence_nll(const std::vector<Expr>& log_probs, const std::vector<std::int32_t>& targets) {
  return sequence_nll(log_probs, targets, std::vector<bool>(targets.size(), true));
}

// ---- optimizer ----

void Adam::step(ParameterStore& store) {
  double scale_factor = 1.0;
  if (config_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& p : store.all()) sq += p->grad.squaredNorm();
    const double norm = std::sqrt(sq);
    require(std::isfinite(norm), ErrorCode::kNumeric, "gradient norm is not finite");
    if (norm > config_.clip_norm) scale_factor = config_.clip_norm / norm;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (auto& p : store.all()) {
    auto [mit, fresh_m] = m_.try_emplace(p->name, Matrix::Zero(p->value.rows(), p->value.cols()));
    auto [vit, fresh_v] = v_.try_emplace(p->name, Matrix::Zero(p->value.rows(), p->value.cols()));
    Matrix& m = mit->second;
    Matrix& v = vit->second;
    const Matrix g = p->grad * scale_factor;
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);
    p->value.array() -= config_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.epsilon);
    p->grad.setZero();
  }
}

}  // namespace svrnn::nn
