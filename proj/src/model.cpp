#include "svrnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <sstream>

#include "svrnn/attention_ops.hpp"
#include "svrnn/error.hpp"

namespace svrnn {

using nn::Expr;
using nn::Graph;
using nn::Matrix;
using nn::Vector;

namespace {

constexpr double kKlEpsilon = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Vector mean_of(const std::vector<Vector>& vs) {
  require(!vs.empty(), ErrorCode::kInvalidArgument, "empty batch");
  Vector m = Vector::Zero(vs.front().size());
  for (const auto& v : vs) {
    require(v.size() == m.size(), ErrorCode::kDimensionMismatch, "categoricals differ in size");
    m += v;
  }
  return m / static_cast<double>(vs.size());
}

int argmax(const Vector& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

const char* variant_name(Variant v) { return v == Variant::kChain ? "chain" : "tree"; }

Variant parse_variant(const std::string& name) {
  if (name == "chain") return Variant::kChain;
  if (name == "tree") return Variant::kTree;
  fail(ErrorCode::kConfig, "unknown variant '" + name + "' (expected chain or tree)");
}

void ElboReport::merge(const ElboReport& o) {
  const double a = static_cast<double>(turns), b = static_cast<double>(o.turns);
  if (a + b > 0.0) {
    auto mix = [&](double x, double y) { return (a * x + b * y) / (a + b); };
    reconstruction = mix(reconstruction, o.reconstruction);
    kl = mix(kl, o.kl);
    prior_fit = mix(prior_fit, o.prior_fit);
    bow = mix(bow, o.bow);
    total = mix(total, o.total);
  }
  turns += o.turns;
  dialogues += o.dialogues;
  batches += o.batches;
}

// ---- latent pieces ----

Expr prior_net(const nn::Mlp& net, const Expr& recurrent_state) { return nn::softmax(net(recurrent_state)); }

Expr posterior_net(const nn::Mlp& net, const Expr& recurrent_state, const Expr& encoding) {
  return nn::softmax(net(nn::concat({recurrent_state, encoding})));
}

double kl_categorical(const Vector& q, const Vector& p) {
  require(q.size() == p.size(), ErrorCode::kDimensionMismatch, "kl_categorical: sizes differ");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (q(i) > 0.0) kl += q(i) * (std::log(q(i) + kKlEpsilon) - std::log(p(i) + kKlEpsilon));
  return kl;
}

Expr bow_loss(const nn::Mlp& net, const Expr& latent_and_context, const std::vector<std::int32_t>& bag) {
  require(!bag.empty(), ErrorCode::kInvalidArgument, "bow_loss: empty bag");
  const Expr logp = nn::log_softmax(net(latent_and_context));
  std::vector<Expr> picked;
  picked.reserve(bag.size());
  for (auto w : bag) {
    require(w >= 0 && w < logp.rows(), ErrorCode::kOutOfRange, "bow_loss: word id outside the vocabulary");
    picked.push_back(nn::pick(logp, w));
  }
  return nn::scale(nn::sum(picked), -1.0 / static_cast<double>(bag.size()));
}

double batch_prior_regularization(const std::vector<Vector>& posteriors, const Vector& prior) {
  return kl_categorical(mean_of(posteriors), prior);
}

double batch_prior_regularization(const std::vector<Vector>& posteriors) {
  const Vector q = mean_of(posteriors);
  return kl_categorical(q, Vector::Constant(q.size(), 1.0 / static_cast<double>(q.size())));
}

// ---- model ----

StructuredVrnn::StructuredVrnn(ModelConfig config, nn::Vocabulary vocabulary, std::uint64_t seed)
    : config_(config), vocabulary_(std::move(vocabulary)) {
  require(config_.num_states >= 1, ErrorCode::kConfig, "num_states must be >= 1");
  require(config_.hidden >= 1 && config_.embedding >= 1, ErrorCode::kConfig, "sizes must be positive");
  const Eigen::Index d = config_.hidden, e = config_.embedding, n = config_.num_states;
  const std::size_t v = vocabulary_.size();
  std::mt19937_64 rng(seed);

  encoder_ = nn::EncoderParams::create(store_, v, e, d, d, rng);
  if (config_.variant == Variant::kChain) {
    att_ignore_ = &store_.add("attention.ignore", nn::glorot(d, d, rng));
    att_select_ = &store_.add("attention.select", nn::glorot(d, d, rng));
  } else {
    arcs_.w_parent = &store_.add("arc.parent", nn::glorot(d, d, rng));
    arcs_.w_child = &store_.add("arc.child", nn::glorot(d, d, rng));
    arcs_.s = &store_.add("arc.s", nn::glorot(d, 1, rng));
    arcs_.b = &store_.add("arc.b", Matrix::Zero(d, 1));
  }
  prior_ = nn::Mlp::create(store_, "prior", d, d, n, rng);
  posterior_ = nn::Mlp::create(store_, "posterior", 3 * d, d, n, rng);
  state_embedding_ = &store_.add("state.embedding", nn::glorot(d, n, rng));
  recurrence_ = nn::GruParams::create(store_, "recurrence", 2 * d + n, d, rng);
  decoder_init_ = nn::Linear::create(store_, "decoder.init", 3 * d, d, rng);
  decoder_ = nn::DecoderParams::create(store_, e, d, 2 * d, v, rng);
  bow_ = nn::Mlp::create(store_, "bow", d, d, static_cast<Eigen::Index>(v), rng);
}

EncodedDialogue StructuredVrnn::encode(const std::vector<std::vector<std::string>>& turns) const {
  EncodedDialogue out;
  out.turns.reserve(turns.size());
  for (const auto& t : turns) out.turns.push_back(vocabulary_.encode(t));
  return out;
}

Expr StructuredVrnn::structured_context(Graph& g, const std::vector<Expr>& hiddens, std::size_t t,
                                        const std::optional<Expr>& tree_context) const {
  const Eigen::Index d = config_.hidden;
  if (config_.variant == Variant::kTree) {
    if (!tree_context) return g.input(Matrix::Zero(d, 1));
    return nn::column(*tree_context, static_cast<Eigen::Index>(t));
  }
  if (t == 0) return g.input(Matrix::Zero(d, 1));
  const Expr history = nn::hstack(std::vector<Expr>(hiddens.begin(), hiddens.begin() + static_cast<long>(t)));
  const Expr p = nn::chain_attention(history, hiddens[t], *att_ignore_, *att_select_);
  return nn::matmul(history, p);
}

DialogueForward StructuredVrnn::forward(Graph& g, const EncodedDialogue& dialogue, const ForwardOptions& options) {
  const std::size_t T = dialogue.turns.size();
  require(T >= 1, ErrorCode::kInvalidArgument, "dialogue has no turns");
  const bool sampling = options.mode != SampleMode::kArgmax;
  require(!(sampling || options.dropout) || options.rng != nullptr, ErrorCode::kInvalidArgument,
          "sampling or dropout needs a random generator");
  require(!sampling || options.temperature > 0.0, ErrorCode::kInvalidArgument, "temperature must be positive");
  const auto vocab = static_cast<std::int32_t>(vocabulary_.size());
  for (const auto& turn : dialogue.turns) {
    require(!turn.empty(), ErrorCode::kInvalidArgument, "dialogue has an empty turn");
    for (auto w : turn)
      require(w >= 0 && w < vocab, ErrorCode::kVocabularyMismatch, "token id " + std::to_string(w) +
                                                                       " is outside the model vocabulary");
  }

  const Eigen::Index d = config_.hidden, n_states = config_.num_states;
  std::mt19937_64* drop_rng = options.dropout ? options.rng : nullptr;

  std::vector<Expr> hiddens;
  hiddens.reserve(T);
  for (const auto& turn : dialogue.turns) hiddens.push_back(nn::encode_utterance(g, encoder_, turn).utterance);

  DialogueForward out;
  std::optional<Expr> tree_context;
  if (config_.variant == Variant::kTree && T >= 2) {
    const Expr stacked = nn::hstack(hiddens);
    const Expr theta = nn::arc_scores(stacked, arcs_, config_.mask_left_arcs);
    const Expr arcs = nn::tree_select(theta, config_.mask_left_arcs);
    out.arcs = arcs;
    tree_context = nn::matmul(stacked, arcs);
  }

  const Expr emb_table = g.param(*state_embedding_);
  Expr r = g.input(Matrix::Zero(d, 1));
  std::vector<Expr> memories{g.input(Matrix::Zero(2 * d, 1))};

  for (std::size_t t = 0; t < T; ++t) {
    const Expr c = structured_context(g, hiddens, t, tree_context);
    const Expr augmented = nn::concat({hiddens[t], c});

    // Under the batch regularizer the prior is a side model fit to the
    // posterior, so it reads the recurrent state without back-propagating.
    const Expr prior_logits = prior_(config_.batch_prior ? g.input(r.value()) : r);
    const Expr post_logits = posterior_(nn::concat({r, augmented}));
    const Expr p = nn::softmax(prior_logits);
    const Expr q = nn::softmax(post_logits);

    Expr z;
    int index = 0;
    switch (options.mode) {
      case SampleMode::kArgmax: {
        index = argmax(q.value().col(0));
        Matrix hard = Matrix::Zero(n_states, 1);
        hard(index, 0) = 1.0;
        z = g.input(std::move(hard));
        break;
      }
      case SampleMode::kStraightThrough: {
        const Vector noise = nn::gumbel_noise(n_states, *options.rng);
        z = nn::gumbel_straight_through(post_logits, noise, options.temperature);
        index = argmax(z.value().col(0));
        break;
      }
      case SampleMode::kRelaxed: {
        const Vector noise = nn::gumbel_noise(n_states, *options.rng);
        const Expr perturbed = nn::add(post_logits, g.input(noise));
        z = nn::softmax(nn::scale(perturbed, 1.0 / options.temperature));
        index = argmax(perturbed.value().col(0));
        break;
      }
    }
    const Expr ez = nn::matmul(emb_table, z);

    // Reconstruct the turn from the latent state and the history.
    const auto& tokens = dialogue.turns[t];
    const Expr init = nn::tanh(decoder_init_(nn::concat({ez, r, c})));
    const Expr memory = nn::hstack(memories);
    nn::DecoderState state = nn::decoder_start(g, decoder_, init);
    Expr prev = nn::lookup(g, *encoder_.embedding, nn::Vocabulary::kBos);
    std::vector<std::int32_t> targets(tokens);
    targets.push_back(nn::Vocabulary::kEos);
    std::vector<Expr> log_probs;
    log_probs.reserve(targets.size());
    for (auto target : targets) {
      nn::DecodeStep step = nn::decode_step(decoder_, state, nn::dropout(prev, config_.dropout, drop_rng), memory);
      log_probs.push_back(step.log_probs);
      state = step.next;
      prev = nn::lookup(g, *encoder_.embedding, target);
    }
    out.reconstruction.push_back(nn::sequence_nll(log_probs, targets));
    out.bow.push_back(bow_loss(bow_, ez, tokens));
    out.posterior.push_back(q);
    out.prior.push_back(p);
    out.log_posterior.push_back(nn::log_softmax(post_logits));
    out.log_prior.push_back(nn::log_softmax(prior_logits));

    r = nn::gru_cell(recurrence_, nn::concat({augmented, z}), r);
    memories.push_back(augmented);

    out.trace.posterior.push_back(q.value().col(0));
    out.trace.prior.push_back(p.value().col(0));
    out.trace.states.push_back(index);
    out.trace.recurrent.push_back(r.value().col(0));
  }
  return out;
}

LatentTrace StructuredVrnn::infer_trace(const EncodedDialogue& dialogue) {
  Graph g;
  return forward(g, dialogue, ForwardOptions{}).trace;
}

TreeMarginals StructuredVrnn::infer_tree(const EncodedDialogue& dialogue) {
  require(config_.variant == Variant::kTree, ErrorCode::kInvalidArgument, "arc marginals need the tree variant");
  const std::size_t T = dialogue.turns.size();
  require(T >= 1, ErrorCode::kInvalidArgument, "dialogue has no turns");
  const auto vocab = static_cast<std::int32_t>(vocabulary_.size());
  for (const auto& turn : dialogue.turns)
    for (auto w : turn)
      require(w >= 0 && w < vocab, ErrorCode::kVocabularyMismatch, "token id outside the model vocabulary");
  if (T == 1) return TreeMarginals{Eigen::MatrixXd::Zero(1, 1), 0.0};
  Graph g;
  std::vector<Eigen::VectorXd> hiddens;
  for (const auto& turn : dialogue.turns) hiddens.push_back(nn::encode_utterance(g, encoder_, turn).utterance.value());
  const ArcParams params{arcs_.w_parent->value, arcs_.w_child->value, arcs_.s->value.col(0), arcs_.b->value.col(0)};
  return inside_outside(build_arc_potentials(hiddens, params, config_.mask_left_arcs));
}

Vector StructuredVrnn::mean_embedding(const std::vector<std::int32_t>& tokens) const {
  require(!tokens.empty(), ErrorCode::kInvalidArgument, "mean_embedding: empty turn");
  const Matrix& table = encoder_.embedding->value;
  Vector m = Vector::Zero(table.rows());
  for (auto w : tokens) {
    require(w >= 0 && w < table.cols(), ErrorCode::kVocabularyMismatch, "token id outside the model vocabulary");
    m += table.col(w);
  }
  return m / static_cast<double>(tokens.size());
}

// ---- objective ----

ElboReport batch_objective(StructuredVrnn& model, const std::vector<const EncodedDialogue*>& batch,
                           const ForwardOptions& options, std::vector<std::mt19937_64>* rngs, bool backward) {
  require(!batch.empty(), ErrorCode::kInvalidArgument, "empty batch");
  require(rngs == nullptr || rngs->size() == batch.size(), ErrorCode::kDimensionMismatch, "one generator per dialogue");
  const ModelConfig& cfg = model.config();

  std::vector<std::unique_ptr<Graph>> graphs;
  std::vector<DialogueForward> fwd;
  std::vector<std::vector<Expr>> kl_terms;
  std::size_t turns = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    graphs.push_back(std::make_unique<Graph>());
    ForwardOptions o = options;
    o.rng = rngs ? &(*rngs)[i] : nullptr;
    fwd.push_back(model.forward(*graphs.back(), *batch[i], o));
    turns += fwd.back().reconstruction.size();
  }
  const double m = static_cast<double>(turns);

  double recon = 0.0, bow = 0.0, kl = 0.0, fit = 0.0;
  std::vector<Vector> qs;
  for (auto& f : fwd) {
    kl_terms.emplace_back();
    for (std::size_t t = 0; t < f.reconstruction.size(); ++t) {
      recon += f.reconstruction[t].scalar();
      bow += f.bow[t].scalar();
      const Vector q = f.posterior[t].value().col(0);
      fit += kl_categorical(q, f.prior[t].value().col(0));
      if (cfg.batch_prior) {
        qs.push_back(q);
      } else {
        const Expr term = nn::dot(f.posterior[t], nn::sub(f.log_posterior[t], f.log_prior[t]));
        kl_terms.back().push_back(term);
        kl += term.scalar();
      }
    }
  }
  Vector q_bar;
  if (cfg.batch_prior) {
    q_bar = mean_of(qs);
    kl = batch_prior_regularization(qs);
  } else {
    kl /= m;
  }

  ElboReport report;
  report.reconstruction = recon / m;
  report.bow = bow / m;
  report.kl = kl;
  report.prior_fit = fit / m;
  report.total = report.reconstruction + report.kl + cfg.bow_weight * report.bow;
  report.turns = turns;
  report.dialogues = batch.size();
  report.batches = 1;
  require(std::isfinite(report.total) && std::isfinite(report.prior_fit), ErrorCode::kNumeric,
          "objective is not finite");

  if (backward) {
    // With the batch regularizer the posterior is pulled toward a uniform
    // marginal, and the prior is fit to each turn's posterior held fixed.
    Matrix grad_q;
    if (cfg.batch_prior) {
      const Eigen::Index n = q_bar.size();
      const double u = 1.0 / static_cast<double>(n);
      grad_q.resize(n, 1);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double qk = q_bar(k);
        grad_q(k, 0) = (qk > 0.0 ? std::log(qk + kKlEpsilon) - std::log(u + kKlEpsilon) + qk / (qk + kKlEpsilon)
                                 : 0.0) / m;
      }
    }
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      Graph& g = *graphs[i];
      const DialogueForward& f = fwd[i];
      for (std::size_t t = 0; t < f.reconstruction.size(); ++t) {
        g.seed(f.reconstruction[t], 1.0 / m);
        g.seed(f.bow[t], cfg.bow_weight / m);
        if (cfg.batch_prior) {
          g.seed(f.posterior[t], grad_q);
          const Vector q = f.posterior[t].value().col(0);
          const Vector p = f.prior[t].value().col(0);
          g.seed(f.prior[t], Matrix(-(q.array() / (p.array() + kKlEpsilon)).matrix() / m));
        } else {
          g.seed(kl_terms[i][t], 1.0 / m);
        }
      }
      g.run_backward();
    }
  }
  return report;
}

double temperature_at(const TrainConfig& config, int epoch) {
  if (config.epochs <= 1) return config.tau_start;
  const double frac = std::clamp(static_cast<double>(epoch) / (config.epochs - 1), 0.0, 1.0);
  return config.tau_start * std::pow(config.tau_end / config.tau_start, frac);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::uint64_t h = splitmix64(seed);
  for (auto s : stream) h = splitmix64(h ^ splitmix64(s + 0x632BE59BD9B4E019ULL));
  return h;
}

Trainer::Trainer(StructuredVrnn& model, TrainConfig config)
    : model_(model),
      config_(config),
      adam_(nn::AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8, config.clip_norm}) {
  require(config_.batch_size >= 1, ErrorCode::kConfig, "batch_size must be >= 1");
}

ElboReport Trainer::train_epoch(const std::vector<EncodedDialogue>& corpus) {
  require(!corpus.empty(), ErrorCode::kInvalidArgument, "empty training corpus");
  const auto e = static_cast<std::uint64_t>(epoch_);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(derive_seed(config_.seed, {e, 0xB47C4ULL}));
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  ForwardOptions options;
  options.mode = SampleMode::kStraightThrough;
  options.temperature = temperature_at(config_, epoch_);
  options.dropout = true;

  model_.params().zero_grad();
  ElboReport total;
  const auto bs = static_cast<std::size_t>(config_.batch_size);
  for (std::size_t start = 0, b = 0; start < order.size(); start += bs, ++b) {
    const std::size_t end = std::min(order.size(), start + bs);
    std::vector<const EncodedDialogue*> batch;
    std::vector<std::mt19937_64> rngs;
    for (std::size_t k = start; k < end; ++k) {
      batch.push_back(&corpus[order[k]]);
      rngs.emplace_back(derive_seed(config_.seed, {e, b, k - start}));
    }
    ElboReport report;
    try {
      report = batch_objective(model_, batch, options, &rngs, true);
      adam_.step(model_.params());
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kNumeric) throw;
      std::ostringstream msg;
      msg << err.what() << " in epoch " << epoch_ << " batch " << b << " (dialogue indices";
      for (std::size_t k = start; k < end; ++k) msg << ' ' << order[k];
      msg << ')';
      fail(ErrorCode::kNumeric, msg.str());
    }
    total.merge(report);
  }
  ++epoch_;
  return total;
}

ElboReport Trainer::evaluate(const std::vector<EncodedDialogue>& corpus) {
  require(!corpus.empty(), ErrorCode::kInvalidArgument, "empty corpus");
  ElboReport total;
  const auto bs = static_cast<std::size_t>(config_.batch_size);
  for (std::size_t start = 0; start < corpus.size(); start += bs) {
    std::vector<const EncodedDialogue*> batch;
    for (std::size_t k = start; k < std::min(corpus.size(), start + bs); ++k) batch.push_back(&corpus[k]);
    total.merge(batch_objective(model_, batch, ForwardOptions{}, nullptr, false));
  }
  return total;
}

// ---- persistence ----

std::string model_config_to_text(const ModelConfig& c) {
  std::ostringstream s;
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  s << "variant=" << variant_name(c.variant) << '\n'
    << "num_states=" << c.num_states << '\n'
    << "hidden=" << c.hidden << '\n'
    << "embedding=" << c.embedding << '\n'
    << "dropout=" << num(c.dropout) << '\n'
    << "bow_weight=" << num(c.bow_weight) << '\n'
    << "batch_prior=" << (c.batch_prior ? 1 : 0) << '\n'
    << "mask_left_arcs=" << (c.mask_left_arcs ? 1 : 0) << '\n';
  return s.str();
}

ModelConfig model_config_from_text(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::kFormat, "bad model config line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "variant") c.variant = parse_variant(value);
      else if (key == "num_states") c.num_states = std::stoi(value);
      else if (key == "hidden") c.hidden = std::stoi(value);
      else if (key == "embedding") c.embedding = std::stoi(value);
      else if (key == "dropout") c.dropout = std::stod(value);
      else if (key == "bow_weight") c.bow_weight = std::stod(value);
      else if (key == "batch_prior") c.batch_prior = value == "1";
      else if (key == "mask_left_arcs") c.mask_left_arcs = value == "1";
      else fail(ErrorCode::kFormat, "unknown model config key '" + key + "'");
    } catch (const std::logic_error&) {
      fail(ErrorCode::kFormat, "bad value for model config key '" + key + "'");
    }
  }
  return c;
}

Checkpoint save_model(const StructuredVrnn& model, const Trainer* trainer, std::uint64_t seed) {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "svrnn-model";
  ckpt.meta["model"] = model_config_to_text(model.config());
  std::string vocab;
  for (const auto& t : model.vocabulary().tokens()) vocab += t + '\n';
  ckpt.meta["vocabulary"] = vocab;
  ckpt.meta["seed"] = std::to_string(seed);
  for (const auto& p : model.params().all()) ckpt.tensors["param/" + p->name] = p->value;
  if (trainer != nullptr) {
    const nn::Adam& adam = trainer->optimizer();
    ckpt.meta["epoch"] = std::to_string(trainer->epoch());
    ckpt.meta["adam.steps"] = std::to_string(adam.steps());
    for (const auto& [name, m] : adam.first_moments()) ckpt.tensors["adam.m/" + name] = m;
    for (const auto& [name, v] : adam.second_moments()) ckpt.tensors["adam.v/" + name] = v;
  }
  return ckpt;
}

namespace {

const std::string& meta_field(const Checkpoint& ckpt, const std::string& key) {
  const auto it = ckpt.meta.find(key);
  require(it != ckpt.meta.end(), ErrorCode::kFormat, "checkpoint lacks '" + key + "'");
  return it->second;
}

}  // namespace

StructuredVrnn load_model(const Checkpoint& ckpt) {
  require(meta_field(ckpt, "kind") == "svrnn-model", ErrorCode::kFormat, "checkpoint does not hold a model");
  const ModelConfig config = model_config_from_text(meta_field(ckpt, "model"));
  std::vector<std::string> tokens;
  std::istringstream vs(meta_field(ckpt, "vocabulary"));
  for (std::string t; std::getline(vs, t);) tokens.push_back(t);
  StructuredVrnn model(config, nn::Vocabulary::from_tokens(tokens), 0);
  std::size_t restored = 0;
  for (auto& p : model.params().all()) {
    const auto it = ckpt.tensors.find("param/" + p->name);
    require(it != ckpt.tensors.end(), ErrorCode::kFormat, "checkpoint lacks parameter '" + p->name + "'");
    require(it->second.rows() == p->value.rows() && it->second.cols() == p->value.cols(), ErrorCode::kFormat,
            "shape mismatch for parameter '" + p->name + "'");
    p->value = it->second;
    ++restored;
  }
  const auto params_in_file = std::count_if(ckpt.tensors.begin(), ckpt.tensors.end(),
                                            [](const auto& kv) { return kv.first.rfind("param/", 0) == 0; });
  require(static_cast<std::size_t>(params_in_file) == restored, ErrorCode::kFormat,
          "checkpoint has parameters the model does not know");
  return model;
}

void restore_trainer(const Checkpoint& ckpt, Trainer& trainer) {
  try {
    trainer.set_epoch(std::stoi(meta_field(ckpt, "epoch")));
    trainer.optimizer().set_steps(std::stoll(meta_field(ckpt, "adam.steps")));
  } catch (const std::logic_error&) {
    fail(ErrorCode::kFormat, "bad optimizer state in checkpoint");
  }
  auto& m = trainer.optimizer().first_moments();
  auto& v = trainer.optimizer().second_moments();
  m.clear();
  v.clear();
  for (const auto& [name, t] : ckpt.tensors) {
    if (name.rfind("adam.m/", 0) == 0) m[name.substr(7)] = t;
    else if (name.rfind("adam.v/", 0) == 0) v[name.substr(7)] = t;
  }
}

}  // namespace svrnn
