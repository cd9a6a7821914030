// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 5 and 6 train full models and take a while on a
// single core; `--only` picks a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fd.hpp"
#include "graph_check.hpp"
#include "svrnn/attention_ops.hpp"
#include "svrnn/chain_crf.hpp"
#include "svrnn/dep_tree.hpp"
#include "svrnn/model.hpp"
#include "svrnn/neural.hpp"
#include "svrnn/pipeline.hpp"
#include "svrnn/simdial_gen.hpp"
#include "svrnn/structure_eval.hpp"

using namespace svrnn;
using nn::Expr;
using nn::Graph;
using nn::Matrix;
using test::check_graph_grads;
using test::random_matrix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// ---- 1, 2: exact inference against enumeration ----

ChainPotentials random_chain(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ChainPotentials p = ChainPotentials::zeros(n);
  for (auto& row : p.unary)
    for (auto& x : row) x = u(rng);
  for (auto& t : p.pairwise)
    for (auto& row : t)
      for (auto& x : row) x = u(rng);
  return p;
}

ArcPotentials random_arcs(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ArcPotentials p;
  p.n = n;
  p.mask_left_arcs = true;
  p.theta.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < p.theta.size(); ++k) p.theta(k) = u(rng);
  p.apply_mask();
  return p;
}

Outcome chain_oracle() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> len(2, 10);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_chain(rng, len(rng), 5.0);
    const auto fb = forward_backward(p);
    const auto bf = brute_force_chain(p);
    for (std::size_t i = 0; i < p.n; ++i) worst = std::max(worst, std::abs(fb.p_select[i] - bf.p_select[i]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0, fmt("200 chains, n in [2,10]: max |diff| %.2e (<= 1e-9), %.2f s (< 10)", worst, secs)};
}

Outcome tree_oracle() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> len(3, 7);
  const auto t0 = Clock::now();
  double worst = 0.0, norm = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_arcs(rng, len(rng), 3.0);
    const auto io = inside_outside(p);
    const auto bf = brute_force_trees(p);
    worst = std::max(worst, (io.p_arc - bf.p_arc).cwiseAbs().maxCoeff());
    for (Eigen::Index j = 1; j < io.p_arc.cols(); ++j)
      norm = std::max(norm, std::abs(io.p_arc.col(j).head(j).sum() - 1.0));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && norm <= 1e-9 && secs < 30.0,
          fmt("200 arc sets, n in [3,7]: max |diff| %.2e, parent-sum error %.2e, %.2f s (< 30)", worst, norm, secs)};
}

// ---- 3: gradients ----

double chain_grad_error(ChainPotentials p, const std::vector<double>& g) {
  const auto analytic = chain_marginal_grad(p, g);
  auto f = [&] {
    const auto m = forward_backward(p);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * m.p_select[i];
    return s;
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < p.n; ++i)
    for (int c = 0; c < 2; ++c)
      worst = std::max(worst, std::abs(analytic.unary[i][c] - test::central_difference(f, p.unary[i][c], 1e-5)));
  for (std::size_t i = 0; i + 1 < p.n; ++i)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        worst = std::max(worst, std::abs(analytic.pairwise[i][k][l] -
                                         test::central_difference(f, p.pairwise[i][k][l], 1e-5)));
  return worst;
}

double tree_grad_error(ArcPotentials p, const Eigen::MatrixXd& g) {
  const Eigen::MatrixXd analytic = tree_marginal_grad(p, g);
  auto f = [&] { return (inside_outside(p).p_arc.array() * g.array()).sum(); };
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.theta.rows(); ++i)
    for (Eigen::Index j = 0; j < p.theta.cols(); ++j) {
      if (p.theta(i, j) == kLogZero) continue;
      worst = std::max(worst, std::abs(analytic(i, j) - test::central_difference(f, p.theta(i, j), 1e-5)));
    }
  return worst;
}

Expr project_to_scalar(const Expr& e, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix w = random_matrix(e.value().rows(), e.value().cols(), rng);
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!std::isfinite(e.value()(i))) w(i) = 0.0;
  return sum(cmul(e, e.graph->input(w)));
}

// Maximum FD error of every neural op, each on its own small store.
std::vector<std::pair<std::string, double>> neural_op_errors() {
  std::vector<std::pair<std::string, double>> out;
  auto run = [&](const std::string& name, const std::function<Expr(Graph&, nn::ParameterStore&)>& build,
                 const std::function<void(nn::ParameterStore&, std::mt19937_64&)>& setup) {
    std::mt19937_64 rng(std::hash<std::string>{}(name) & 0xffff);
    nn::ParameterStore store;
    setup(store, rng);
    out.emplace_back(name, check_graph_grads(store, [&](Graph& g) { return build(g, store); }).max_abs_error);
  };
  auto basic = [](nn::ParameterStore& s, std::mt19937_64& rng) {
    s.add("a", random_matrix(4, 3, rng));
    s.add("b", random_matrix(3, 2, rng));
    s.add("c", random_matrix(4, 3, rng));
    s.add("x", random_matrix(3, 1, rng));
    s.add("y", random_matrix(4, 1, rng));
    s.add("bias", random_matrix(4, 1, rng));
  };
  auto P = [](Graph& g, nn::ParameterStore& s, const char* n) { return g.param(s.get(n)); };

  run("matmul", [&](Graph& g, auto& s) { return project_to_scalar(matmul(P(g, s, "a"), P(g, s, "b")), 1); }, basic);
  run("matmul_tn", [&](Graph& g, auto& s) { return project_to_scalar(matmul_tn(P(g, s, "a"), P(g, s, "c")), 2); },
      basic);
  run("add/sub/cmul/scale", [&](Graph& g, auto& s) {
    const Expr a = P(g, s, "a"), c = P(g, s, "c");
    return project_to_scalar(cmul(add(a, c), sub(a, scale(c, 0.3))), 3);
  }, basic);
  run("tanh/sigmoid/affine", [&](Graph& g, auto& s) {
    return project_to_scalar(sigmoid(tanh(affine(P(g, s, "a"), P(g, s, "x"), P(g, s, "bias")))), 4);
  }, basic);
  run("dot/sum", [&](Graph& g, auto& s) {
    return add(dot(P(g, s, "y"), P(g, s, "bias")), scale(sum(P(g, s, "a")), 0.5));
  }, basic);
  run("concat/slice/hstack/column", [&](Graph& g, auto& s) {
    const Expr cat = nn::concat({P(g, s, "x"), P(g, s, "y")});
    const Expr st = nn::hstack({slice(cat, 1, 4), P(g, s, "bias")});
    return add(project_to_scalar(st, 5), project_to_scalar(column(P(g, s, "c"), 2), 6));
  }, basic);
  run("softmax/log_softmax/pick", [&](Graph& g, auto& s) {
    return add(project_to_scalar(softmax(P(g, s, "y")), 7), pick(log_softmax(P(g, s, "bias")), 2));
  }, basic);
  run("adjacent_dots", [&](Graph& g, auto& s) { return project_to_scalar(adjacent_dots(P(g, s, "a")), 8); }, basic);
  run("lookup", [&](Graph& g, auto& s) {
    return add(project_to_scalar(lookup(g, s.get("a"), 1), 9), project_to_scalar(lookup(g, s.get("a"), 2), 10));
  }, basic);
  run("sum of scalars", [&](Graph& g, auto& s) {
    return sum(std::vector<Expr>{pick(P(g, s, "x"), 0), pick(P(g, s, "y"), 3), dot(P(g, s, "x"), P(g, s, "x"))});
  }, basic);

  nn::GruParams gru;
  run("gru_cell", [&](Graph& g, auto& s) {
    const Expr h1 = gru_cell(gru, P(g, s, "x"), P(g, s, "h"));
    return project_to_scalar(gru_cell(gru, P(g, s, "x"), h1), 11);
  }, [&](nn::ParameterStore& s, std::mt19937_64& rng) {
    gru = nn::GruParams::create(s, "gru", 5, 4, rng);
    s.get("gru.bx").value = random_matrix(12, 1, rng, 0.5);
    s.get("gru.bh").value = random_matrix(12, 1, rng, 0.5);
    s.add("x", random_matrix(5, 1, rng));
    s.add("h", random_matrix(4, 1, rng, 0.5));
  });

  auto attention_setup = [](nn::ParameterStore& s, std::mt19937_64& rng) {
    s.add("hist", random_matrix(4, 5, rng, 0.7));
    s.add("q", random_matrix(4, 1, rng, 0.7));
    s.add("w0", random_matrix(4, 4, rng, 0.5));
    s.add("w1", random_matrix(4, 4, rng, 0.5));
    s.add("single", random_matrix(4, 1, rng));
    s.add("wp", random_matrix(3, 4, rng));
    s.add("wc", random_matrix(3, 4, rng));
    s.add("s", random_matrix(3, 1, rng));
    s.add("b", random_matrix(3, 1, rng));
  };
  run("chain_attention", [&](Graph& g, auto& s) {
    return add(project_to_scalar(chain_attention(P(g, s, "hist"), P(g, s, "q"), s.get("w0"), s.get("w1")), 12),
               project_to_scalar(chain_attention(P(g, s, "single"), P(g, s, "q"), s.get("w0"), s.get("w1")), 13));
  }, attention_setup);
  for (bool mask : {true, false}) {
    run(mask ? "arc_scores/tree_select (masked)" : "arc_scores/tree_select (unmasked)", [&](Graph& g, auto& s) {
      const nn::ArcScoreParams ap{&s.get("wp"), &s.get("wc"), &s.get("s"), &s.get("b")};
      const Expr theta = arc_scores(P(g, s, "hist"), ap, mask);
      return add(project_to_scalar(tree_select(theta, mask), 14), project_to_scalar(theta, 15));
    }, attention_setup);
  }
  nn::EncoderParams enc;
  run("encode_utterance", [&](Graph& g, auto&) {
    const auto o = encode_utterance(g, enc, {4, 7, 5, 9});
    return add(project_to_scalar(o.utterance, 17), project_to_scalar(o.word_states[1], 18));
  }, [&](nn::ParameterStore& s, std::mt19937_64& rng) { enc = nn::EncoderParams::create(s, 10, 3, 4, 5, rng); });

  nn::DecoderParams dec;
  run("decoder/sequence_nll", [&](Graph& g, auto& s) {
    const std::vector<std::int32_t> target{4, 6, 8, nn::Vocabulary::kEos};
    auto state = decoder_start(g, dec, P(g, s, "h0"));
    std::vector<Expr> lps;
    std::int32_t prev = nn::Vocabulary::kBos;
    for (auto t : target) {
      const auto step = decode_step(dec, state, lookup(g, s.get("emb"), prev), P(g, s, "mem"));
      lps.push_back(step.log_probs);
      state = step.next;
      prev = t;
    }
    return sequence_nll(lps, target);
  }, [&](nn::ParameterStore& s, std::mt19937_64& rng) {
    s.add("emb", random_matrix(3, 9, rng, 0.3));
    dec = nn::DecoderParams::create(s, 3, 4, 6, 9, rng);
    s.add("mem", random_matrix(6, 3, rng));
    s.add("h0", random_matrix(4, 1, rng, 0.5));
  });

  nn::Mlp prior, post, bow;
  run("prior/posterior nets", [&](Graph& g, auto& s) {
    const Expr w = P(g, s, "w");
    return add(dot(w, prior_net(prior, P(g, s, "r"))), dot(w, posterior_net(post, P(g, s, "r"), P(g, s, "e"))));
  }, [&](nn::ParameterStore& s, std::mt19937_64& rng) {
    prior = nn::Mlp::create(s, "prior", 4, 5, 6, rng);
    post = nn::Mlp::create(s, "posterior", 7, 5, 6, rng);
    s.add("r", random_matrix(4, 1, rng));
    s.add("e", random_matrix(3, 1, rng));
    s.add("w", random_matrix(6, 1, rng));
  });
  run("bow_loss", [&](Graph& g, auto& s) { return bow_loss(bow, P(g, s, "x"), {1, 4, 4, 8}); },
      [&](nn::ParameterStore& s, std::mt19937_64& rng) {
        bow = nn::Mlp::create(s, "bow", 4, 5, 9, rng);
        s.add("x", random_matrix(4, 1, rng));
      });
  return out;
}

// Whole objective under the relaxed sampler, dimensions <= 8.
double objective_grad_error(Variant variant) {
  const std::vector<std::string> words{"hi", "bus", "where", "to", "when", "now", "bye", "thanks"};
  const auto vocab = nn::Vocabulary::build({words});
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> turns(2, 4), len(1, 3), pick(0, static_cast<int>(words.size()) - 1);
  std::vector<EncodedDialogue> corpus(2);
  for (auto& d : corpus)
    for (int t = turns(rng); t > 0; --t) {
      std::vector<std::int32_t> ids;
      for (int k = len(rng); k > 0; --k) ids.push_back(vocab.id(words[static_cast<std::size_t>(pick(rng))]));
      d.turns.push_back(ids);
    }
  ModelConfig c;
  c.variant = variant;
  c.num_states = 3;
  c.hidden = 4;
  c.embedding = 3;
  c.dropout = 0.0;
  StructuredVrnn model(c, vocab, 5);
  auto report = [&](bool backward) {
    std::vector<const EncodedDialogue*> batch;
    std::vector<std::mt19937_64> rngs;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      batch.push_back(&corpus[i]);
      rngs.emplace_back(99 + i);
    }
    ForwardOptions o;
    o.mode = SampleMode::kRelaxed;
    o.temperature = 0.7;
    return batch_objective(model, batch, o, &rngs, backward);
  };
  model.params().zero_grad();
  report(true);
  double worst = 0.0;
  for (auto& p : model.params().all()) {
    const bool prior_param = p->name.rfind("prior.", 0) == 0;
    auto f = [&] {
      const ElboReport r = report(false);
      return prior_param ? r.prior_fit : r.total;
    };
    for (Eigen::Index k = 0; k < p->value.size(); ++k)
      worst = std::max(worst, std::abs(p->grad(k) - test::central_difference(f, p->value(k), 1e-5)));
  }
  return worst;
}

Outcome gradient_suites() {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> nd;
  double chain_worst = 0.0, tree_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 9);
    const auto p = random_chain(rng, n, 2.0);
    std::vector<double> g(n);
    for (auto& x : g) x = nd(rng);
    chain_worst = std::max(chain_worst, chain_grad_error(p, g));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const auto p = random_arcs(rng, n, 2.0);
    const Eigen::MatrixXd g = random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), rng);
    tree_worst = std::max(tree_worst, tree_grad_error(p, g));
  }
  auto ops = neural_op_errors();
  ops.emplace_back("objective (chain)", objective_grad_error(Variant::kChain));
  ops.emplace_back("objective (tree)", objective_grad_error(Variant::kTree));
  std::string worst_op;
  double op_worst = 0.0;
  bool ops_pass = true;
  for (const auto& [name, err] : ops) {
    ops_pass = ops_pass && err < 1e-4;
    if (err >= op_worst) {
      op_worst = err;
      worst_op = name;
    }
  }
  return {chain_worst < 1e-5 && tree_worst < 1e-5 && ops_pass,
          fmt("chain %.2e, tree %.2e (< 1e-5, 100 each); %zu neural checks, worst %.2e in %s (< 1e-4)", chain_worst,
              tree_worst, ops.size(), op_worst, worst_op.c_str())};
}

// ---- 4: objective sanity ----

struct SanityRun {
  std::vector<ElboReport> epochs;
  std::vector<Matrix> params;
};

SanityRun sanity_run(const std::vector<DialogueSession>& corpus) {
  StructuredVrnn model(ModelConfig{}, build_vocabulary(corpus, Variant::kChain), 17);
  const auto encoded = encode_corpus(model, corpus);
  TrainConfig tc;
  tc.epochs = 5;
  tc.seed = 17;
  Trainer trainer(model, tc);
  SanityRun run;
  for (int e = 0; e < 5; ++e) run.epochs.push_back(trainer.train_epoch(encoded));
  for (const auto& p : model.params().all()) run.params.push_back(p->value);
  return run;
}

Outcome objective_sanity() {
  const auto corpus = generate_two_party(builtin_domain("bus"), 50, 4);
  const SanityRun a = sanity_run(corpus), b = sanity_run(corpus);
  bool decreasing = true, kl_ok = true, same = a.params == b.params;
  std::string totals;
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    const ElboReport& r = a.epochs[e];
    if (e > 0) decreasing = decreasing && r.total < a.epochs[e - 1].total;
    kl_ok = kl_ok && r.kl >= -1e-9 && r.prior_fit >= -1e-9;
    same = same && r.total == b.epochs[e].total && r.kl == b.epochs[e].kl && r.prior_fit == b.epochs[e].prior_fit;
    totals += fmt("%s%.4f", e ? " > " : "", r.total);
  }
  double min_kl = 0.0;
  for (const auto& r : a.epochs) min_kl = std::min({min_kl, r.kl, r.prior_fit});
  return {decreasing && kl_ok && same,
          fmt("objective %s (%s), min KL %.2e, rerun %s", totals.c_str(), decreasing ? "strictly decreasing" : "NOT decreasing",
              min_kl, same ? "bit-identical" : "DIFFERS")};
}

// ---- 5, 6: trained structure ----

Outcome chain_structure(int epochs) {
  const auto split = split_corpus(generate_two_party(builtin_domain("bus"), 1000, 7));
  std::vector<double> sed, sce, ksed, ksce;
  std::string rows;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    StructuredVrnn model(ModelConfig{}, build_vocabulary(split.train, Variant::kChain), seed);
    const auto train = encode_corpus(model, split.train);
    TrainConfig tc;
    tc.epochs = epochs;
    tc.seed = seed;
    Trainer trainer(model, tc);
    for (int e = 0; e < epochs; ++e) trainer.train_epoch(train);
    const auto report = evaluate_model(model, split.test, seed);
    sed.push_back(report.chain.model.sed);
    sce.push_back(report.chain.model.sce);
    ksed.push_back(report.chain.kmeans->sed);
    ksce.push_back(report.chain.kmeans->sce);
    rows += fmt("; seed %d %.3f/%.3f vs %.3f/%.3f", static_cast<int>(seed), sed.back(), sce.back(), ksed.back(),
                ksce.back());
  }
  const double ms = median(sed), mc = median(sce), mks = median(ksed), mkc = median(ksce);
  return {ms < mks && mc < mkc,
          fmt("bus, %zu train, %d epochs: median SED %.3f vs K-means %.3f, SCE %.3f vs %.3f", split.train.size(),
              epochs, ms, mks, mc, mkc) +
              rows};
}

Outcome tree_structure(int epochs) {
  const auto corpus = generate_multi_party(4, 500, 11);
  std::vector<double> gain;
  std::string rows;
  double baseline = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ModelConfig mc;
    mc.variant = Variant::kTree;
    StructuredVrnn model(mc, build_vocabulary(corpus, Variant::kTree), seed);
    const auto encoded = encode_corpus(model, corpus);
    TrainConfig tc;
    tc.epochs = epochs;
    tc.seed = seed;
    Trainer trainer(model, tc);
    for (int e = 0; e < epochs; ++e) trainer.train_epoch(encoded);
    const auto report = evaluate_model(model, corpus, seed);
    baseline = report.tree.most_recent.value();
    gain.push_back(report.tree.improvement());
    rows += fmt("; seed %d acc %.3f", static_cast<int>(seed), report.tree.model.value());
  }
  const double m = median(gain);
  return {m >= 0.10, fmt("500 dialogues, %d epochs: most-recent baseline %.3f, median gain %+.3f (>= +0.100)", epochs,
                         baseline, m) +
                         rows};
}

// ---- 7, 8 ----

Outcome metric_fixtures() {
  auto mat2 = [](double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
  };
  const StateMapping id = estimate_mapping({0, 1}, {0, 1}, 2, 2);
  const Eigen::MatrixXd truth = mat2(0.5, 0.5, 1.0, 0.0), learned = mat2(0.2, 0.8, 0.6, 0.4);
  const double hand_sed = 0.5 * std::sqrt(0.5);
  const double hand_sce =
      0.5 * (-std::log(0.2 + 1e-10) * 0.5 - std::log(0.8 + 1e-10) * 0.5 - std::log(0.6 + 1e-10) * 1.0);
  // Soft mapping: T' = [[0.6, 0.4], [0.55, 0.45]].
  const StateMapping soft = estimate_mapping({0, 0, 0, 1}, {0, 1, 1, 1}, 2, 2);
  const Eigen::MatrixXd tl = mat2(0.5, 0.5, 0.25, 0.75), tt = mat2(0.3, 0.7, 0.6, 0.4);
  const double hand_sed2 = 0.5 * std::sqrt(0.3 * 0.3 + 0.3 * 0.3 + 0.05 * 0.05 + 0.05 * 0.05);
  const double hand_sce2 = 0.5 * (-0.3 * std::log(0.6 + 1e-10) - 0.7 * std::log(0.4 + 1e-10) -
                                  0.6 * std::log(0.55 + 1e-10) - 0.4 * std::log(0.45 + 1e-10));
  const double fixture_err = std::max({std::abs(sed(truth, learned, id) - hand_sed),
                                       std::abs(sce(truth, learned, id) - hand_sce),
                                       std::abs(sed(tt, tl, soft) - hand_sed2), std::abs(sce(tt, tl, soft) - hand_sce2)});

  std::mt19937_64 rng(17);
  double relabel_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4, m = 6;
    std::uniform_int_distribution<int> len(2, 9), s_true(0, n - 1), s_learned(0, m - 1);
    std::bernoulli_distribution noisy(0.4);
    std::vector<std::vector<int>> truth_seq(30), learned_seq;
    for (auto& seq : truth_seq) {
      seq.resize(static_cast<std::size_t>(len(rng)));
      for (auto& x : seq) x = s_true(rng);
    }
    learned_seq = truth_seq;
    for (auto& seq : learned_seq)
      for (auto& x : seq) x = noisy(rng) ? s_learned(rng) : (x * 2 + 1) % m;
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto relabeled = learned_seq;
    for (auto& seq : relabeled)
      for (auto& x : seq) x = perm[static_cast<std::size_t>(x)];
    const auto a = score_structure(truth_seq, learned_seq, n, m), b = score_structure(truth_seq, relabeled, n, m);
    relabel_err = std::max({relabel_err, std::abs(a.sed - b.sed), std::abs(a.sce - b.sce)});
  }
  return {fixture_err <= 1e-15 && relabel_err <= 1e-12,
          fmt("2-state fixtures max error %.1e (<= 1e-15); 20 relabelings max change %.1e (<= 1e-12)", fixture_err,
              relabel_err)};
}

Outcome generator_fidelity() {
  double worst = 0.0;
  std::string where;
  for (const auto& name : builtin_domain_names()) {
    const DomainSpec d = builtin_domain(name);
    const auto t = recover_truth_matrix(generate_two_party(d, 5000, 2024), d.size());
    const double err = (t - d.transitions).cwiseAbs().maxCoeff();
    if (err >= worst) {
      worst = err;
      where = name;
    }
  }
  return {worst <= 0.02, fmt("5000 dialogues per domain at seed 2024: max cell deviation %.4f in %s (<= 0.02)", worst,
                             where.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs the acceptance criteria and prints one line per criterion."};
  std::vector<int> only;
  int chain_epochs = 30, tree_epochs = 30;
  app.add_option("--only", only, "Criteria to run (1-8); default all")->check(CLI::Range(1, 8))->delimiter(',');
  app.add_option("--chain-epochs", chain_epochs, "Training epochs for criterion 5")->check(CLI::Range(1, 30));
  app.add_option("--tree-epochs", tree_epochs, "Training epochs for criterion 6")->check(CLI::Range(1, 1000));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"chain oracle equivalence", chain_oracle},
      {"tree oracle equivalence", tree_oracle},
      {"gradient suites", gradient_suites},
      {"objective sanity", objective_sanity},
      {"chain structure vs K-means", [&] { return chain_structure(chain_epochs); }},
      {"parent recovery", [&] { return tree_structure(tree_epochs); }},
      {"metric correctness", metric_fixtures},
      {"generator fidelity", generator_fidelity},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", number, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
