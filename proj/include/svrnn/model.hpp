#pragma once

// Variational recurrent model over dialogue turns with a discrete latent
// state per turn and a structured attention layer (chain or tree) feeding
// the posterior, the recurrence, and the decoder.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "svrnn/attention_ops.hpp"
#include "svrnn/checkpoint.hpp"
#include "svrnn/dep_tree.hpp"
#include "svrnn/graph.hpp"
#include "svrnn/neural.hpp"

namespace svrnn {

enum class Variant { kChain, kTree };

const char* variant_name(Variant v);
/// "chain" or "tree"; throws kConfig otherwise.
Variant parse_variant(const std::string& name);

struct ModelConfig {
  Variant variant = Variant::kChain;
  int num_states = 10;
  int hidden = 64;
  int embedding = 64;
  double dropout = 0.5;
  double bow_weight = 0.5;
  bool batch_prior = true;  // false: per-sample KL against the learned prior
  bool mask_left_arcs = true;
};

/// Token ids per turn. A turn is an exchange (chain) or an utterance (tree).
struct EncodedDialogue {
  std::vector<std::vector<std::int32_t>> turns;
};

struct LatentTrace {
  std::vector<nn::Vector> posterior;
  std::vector<nn::Vector> prior;
  std::vector<int> states;  // 0-based
  std::vector<nn::Vector> recurrent;  // state after consuming each turn
};

/// Per-turn means over a batch (or turn-weighted over an epoch).
/// `kl` is the batch prior regularizer when enabled. `total` already
/// includes the BOW weight. `prior_fit` is the mean per-turn KL(q || p); with
/// the batch regularizer it trains only the prior and is not part of `total`.
struct ElboReport {
  double reconstruction = 0.0;
  double kl = 0.0;
  double prior_fit = 0.0;
  double bow = 0.0;
  double total = 0.0;
  std::size_t turns = 0;
  std::size_t dialogues = 0;
  std::size_t batches = 0;

  /// Turn-weighted accumulation of another report.
  void merge(const ElboReport& other);
};

enum class SampleMode {
  kStraightThrough,  // hard sample forward, relaxed gradient
  kRelaxed,          // Gumbel-softmax relaxation, fully differentiable
  kArgmax,           // posterior argmax, no noise
};

struct ForwardOptions {
  SampleMode mode = SampleMode::kArgmax;
  double temperature = 1.0;
  bool dropout = false;
  std::mt19937_64* rng = nullptr;  // required unless mode is kArgmax and dropout is off
};

/// Graph handles for one dialogue.
struct DialogueForward {
  std::vector<nn::Expr> reconstruction;  // per-turn mean token NLL
  std::vector<nn::Expr> bow;             // per-turn mean BOW NLL
  std::vector<nn::Expr> posterior;       // q(z_t)
  std::vector<nn::Expr> prior;           // p(z_t)
  std::vector<nn::Expr> log_posterior;
  std::vector<nn::Expr> log_prior;
  std::optional<nn::Expr> arcs;          // tree variant, n x n
  LatentTrace trace;
};

// Standalone pieces of the latent model, exposed for testing.
nn::Expr prior_net(const nn::Mlp& net, const nn::Expr& recurrent_state);
nn::Expr posterior_net(const nn::Mlp& net, const nn::Expr& recurrent_state, const nn::Expr& encoding);
/// Sum q log(q / p) with logs guarded by a small epsilon.
double kl_categorical(const nn::Vector& q, const nn::Vector& p);
/// Mean NLL of each word of the bag under softmax(net(latent)). Throws on an empty bag.
nn::Expr bow_loss(const nn::Mlp& net, const nn::Expr& latent_and_context, const std::vector<std::int32_t>& bag);
/// KL between the mean posterior and the prior.
double batch_prior_regularization(const std::vector<nn::Vector>& posteriors, const nn::Vector& prior);
/// Same, against the uniform prior over states. This is the regularizer used
/// in training.
double batch_prior_regularization(const std::vector<nn::Vector>& posteriors);

class StructuredVrnn {
 public:
  StructuredVrnn(ModelConfig config, nn::Vocabulary vocabulary, std::uint64_t seed);
  // Parameter handles point into the store, so copies are not allowed.
  StructuredVrnn(const StructuredVrnn&) = delete;
  StructuredVrnn& operator=(const StructuredVrnn&) = delete;
  StructuredVrnn(StructuredVrnn&&) = default;

  const ModelConfig& config() const { return config_; }
  const nn::Vocabulary& vocabulary() const { return vocabulary_; }
  nn::ParameterStore& params() { return store_; }
  const nn::ParameterStore& params() const { return store_; }

  /// Maps tokens to ids; unknown words become <unk>.
  EncodedDialogue encode(const std::vector<std::vector<std::string>>& turns) const;

  DialogueForward forward(nn::Graph& g, const EncodedDialogue& dialogue, const ForwardOptions& options);

  /// Deterministic posterior-argmax trace.
  LatentTrace infer_trace(const EncodedDialogue& dialogue);
  /// Arc marginals over the dialogue's turns (tree variant only).
  TreeMarginals infer_tree(const EncodedDialogue& dialogue);
  /// Mean word embedding of a turn's tokens.
  nn::Vector mean_embedding(const std::vector<std::int32_t>& tokens) const;

 private:
  nn::Expr structured_context(nn::Graph& g, const std::vector<nn::Expr>& hiddens, std::size_t t,
                              const std::optional<nn::Expr>& tree_context) const;

  ModelConfig config_;
  nn::Vocabulary vocabulary_;
  nn::ParameterStore store_;

  nn::EncoderParams encoder_;
  nn::Parameter* att_ignore_ = nullptr;
  nn::Parameter* att_select_ = nullptr;
  nn::ArcScoreParams arcs_;
  nn::Mlp prior_;
  nn::Mlp posterior_;
  nn::Parameter* state_embedding_ = nullptr;  // d x N
  nn::GruParams recurrence_;
  nn::Linear decoder_init_;
  nn::DecoderParams decoder_;
  nn::Mlp bow_;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 16;
  int epochs = 60;
  double tau_start = 1.0;
  double tau_end = 0.3;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

/// Exponential anneal from tau_start at epoch 0 to tau_end at the last epoch.
double temperature_at(const TrainConfig& config, int epoch);

/// Objective over one batch. When `backward` is set, gradients of the total
/// are accumulated into the model's parameters. `rngs` supplies one generator
/// per dialogue (ignored in argmax mode without dropout).
ElboReport batch_objective(StructuredVrnn& model, const std::vector<const EncodedDialogue*>& batch,
                           const ForwardOptions& options, std::vector<std::mt19937_64>* rngs, bool backward);

class Trainer {
 public:
  Trainer(StructuredVrnn& model, TrainConfig config);

  /// One shuffled pass of minibatch Adam updates. Randomness is derived from
  /// (seed, epoch, batch, position), so a resumed run replays identically.
  ElboReport train_epoch(const std::vector<EncodedDialogue>& corpus);
  /// Objective without updates: posterior argmax, no dropout.
  ElboReport evaluate(const std::vector<EncodedDialogue>& corpus);

  int epoch() const { return epoch_; }
  void set_epoch(int e) { epoch_ = e; }
  nn::Adam& optimizer() { return adam_; }
  const nn::Adam& optimizer() const { return adam_; }
  const TrainConfig& config() const { return config_; }

 private:
  StructuredVrnn& model_;
  TrainConfig config_;
  nn::Adam adam_;
  int epoch_ = 0;
};

/// Deterministic 64-bit mix of a seed with stream indices.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

/// Model (and optionally optimizer) state as a checkpoint.
Checkpoint save_model(const StructuredVrnn& model, const Trainer* trainer, std::uint64_t seed);
/// Restores a model. Throws kFormat on missing tensors or shape mismatch.
StructuredVrnn load_model(const Checkpoint& ckpt);
/// Restores optimizer moments and epoch counter into `trainer`.
void restore_trainer(const Checkpoint& ckpt, Trainer& trainer);

std::string model_config_to_text(const ModelConfig& c);
ModelConfig model_config_from_text(const std::string& text);

}  // namespace svrnn
