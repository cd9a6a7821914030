#pragma once

// Word embeddings, gated recurrent cells, the bidirectional utterance encoder,
// the attention decoder, losses, and the Adam optimizer.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "svrnn/graph.hpp"

namespace svrnn::nn {

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kBos = 2;
  static constexpr std::int32_t kEos = 3;

  Vocabulary();
  /// Reserved entries first, then the given tokens sorted and deduplicated.
  static Vocabulary build(const std::vector<std::vector<std::string>>& sentences);
  static Vocabulary from_tokens(const std::vector<std::string>& id_to_token);

  std::int32_t id(const std::string& token) const;
  const std::string& token(std::int32_t id) const;
  std::vector<std::int32_t> encode(const std::vector<std::string>& tokens) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::int32_t> ids_;
};

/// Lowercase, split on whitespace, and emit each punctuation character as its
/// own token.
std::vector<std::string> tokenize(const std::string& text);

struct GruParams {
  Parameter* wx = nullptr;  // 3h x in, gate order reset, update, candidate
  Parameter* wh = nullptr;  // 3h x h
  Parameter* bx = nullptr;  // 3h
  Parameter* bh = nullptr;  // 3h

  static GruParams create(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index hidden,
                          std::mt19937_64& rng);
  static GruParams bind(ParameterStore& store, const std::string& prefix);
  Eigen::Index hidden() const { return wh->value.cols(); }
};

/// r = sigma(Wx_r x + Wh_r h + b), u = sigma(...), n = tanh(Wx_n x + bx_n + r * (Wh_n h + bh_n)),
/// h' = (1 - u) * n + u * h.
Expr gru_cell(const GruParams& p, const Expr& x, const Expr& h);

struct Linear {
  Parameter* w = nullptr;
  Parameter* b = nullptr;

  static Linear create(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index out,
                       std::mt19937_64& rng);
  static Linear bind(ParameterStore& store, const std::string& prefix);
  Expr operator()(const Expr& x) const;
  Eigen::Index out() const { return w->value.rows(); }
};

/// One tanh hidden layer followed by a linear output layer.
struct Mlp {
  Linear hidden;
  Linear output;

  static Mlp create(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index width,
                    Eigen::Index out, std::mt19937_64& rng);
  static Mlp bind(ParameterStore& store, const std::string& prefix);
  Expr operator()(const Expr& x) const { return output(tanh(hidden(x))); }
};

/// Inverted dropout; identity when rate is 0 or rng is null.
Expr dropout(const Expr& x, double rate, std::mt19937_64* rng);

struct EncoderParams {
  Parameter* embedding = nullptr;  // emb x V, column per token
  GruParams forward;
  GruParams backward;
  Linear project;  // 2h -> d

  static EncoderParams create(ParameterStore& store, std::size_t vocab, Eigen::Index emb, Eigen::Index hidden,
                              Eigen::Index out, std::mt19937_64& rng);
  static EncoderParams bind(ParameterStore& store);
};

struct EncoderOutput {
  Expr utterance;                // d, tanh(W [fwd_last; bwd_first] + b)
  std::vector<Expr> word_states;  // per token [fwd_k; bwd_k]
};

EncoderOutput encode_utterance(Graph& g, const EncoderParams& p, const std::vector<std::int32_t>& tokens);

struct DecoderParams {
  Linear input;       // [emb; context] -> h
  GruParams cell;
  Parameter* w_att = nullptr;  // h x memory
  Mlp output;         // [h; context] -> V

  static DecoderParams create(ParameterStore& store, Eigen::Index emb, Eigen::Index hidden, Eigen::Index memory,
                              std::size_t vocab, std::mt19937_64& rng);
  static DecoderParams bind(ParameterStore& store);
  Eigen::Index hidden() const { return cell.hidden(); }
  Eigen::Index memory() const { return w_att->value.cols(); }
};

struct DecoderState {
  Expr hidden;
  Expr context;
  int step = 0;
};

struct DecodeStep {
  DecoderState next;
  Expr log_probs;  // V, log of the word distribution
  Expr attention;  // weights over the attended memories
};

/// Starts a decoder at `initial_hidden` with a zero attention context.
DecoderState decoder_start(Graph& g, const DecoderParams& p, const Expr& initial_hidden);

/// h_k = GRU(h_{k-1}, tanh(W_in [e; c_{k-1}])), c_k = sum_j softmax(h_k W_a m_j) m_j,
/// p(w_k) = softmax(MLP([h_k; c_k])). `memories` holds one memory per column.
DecodeStep decode_step(const DecoderParams& p, const DecoderState& state, const Expr& prev_embedding,
                       const Expr& memories);

/// Mean negative log-likelihood of `targets` over positions where mask is set.
/// Throws when every position is masked.
Expr sequence_nll(const std::vector<Expr>& log_probs, const std::vector<std::int32_t>& targets,
                  const std::vector<bool>& mask);
Expr sequence_nll(const std::vector<Expr>& log_probs, const std::vector<std::int32_t>& targets);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // <= 0 disables clipping
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}
  /// Applies one update from the accumulated gradients, then zeros them.
  void step(ParameterStore& store);
  std::int64_t steps() const { return t_; }

  // Moment state, keyed by parameter name, for checkpointing.
  std::map<std::string, Matrix>& first_moments() { return m_; }
  std::map<std::string, Matrix>& second_moments() { return v_; }
  const std::map<std::string, Matrix>& first_moments() const { return m_; }
  const std::map<std::string, Matrix>& second_moments() const { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  AdamConfig config_;
  std::int64_t t_ = 0;
  std::map<std::string, Matrix> m_, v_;
};

}  // namespace svrnn::nn
