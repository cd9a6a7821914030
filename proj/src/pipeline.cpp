#include "svrnn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "svrnn/error.hpp"

namespace svrnn {

namespace {

using Json = nlohmann::ordered_json;

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const nn::Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json scores_json(const StructureScores& s) { return Json{{"sed", s.sed}, {"sce", s.sce}}; }

int label_count(const std::vector<std::vector<int>>& seqs) {
  int top = 0;
  for (const auto& s : seqs)
    for (int v : s) {
      require(v >= 0, ErrorCode::kInvalidArgument, "state labels must be >= 0");
      top = std::max(top, v + 1);
    }
  return top;
}

std::string turn_label(const Utterance& u) { return u.speaker.empty() ? u.text : u.speaker + ": " + u.text; }

TreeReport score_parents(const std::vector<DialogueSession>& gold, const std::vector<std::vector<int>>& predicted) {
  TreeReport r;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    const auto& g = gold[k].gold_parents;
    const auto& p = predicted[k];
    require(p.size() == g.size(), ErrorCode::kDimensionMismatch,
            "dialogue '" + gold[k].id + "': " + std::to_string(p.size()) + " predicted parents for " +
                std::to_string(g.size()) + " utterances");
    for (std::size_t j = 1; j < g.size(); ++j) {
      if (g[j] < 0) continue;
      ++r.model.total;
      if (p[j] == g[j]) ++r.model.correct;
    }
    const ParentAccuracy b = most_recent_baseline(g);
    r.most_recent.correct += b.correct;
    r.most_recent.total += b.total;
  }
  require(r.model.total > 0, ErrorCode::kInvalidArgument, "no utterance carries a gold parent");
  return r;
}

}  // namespace

void require_gold_labels(const std::vector<DialogueSession>& corpus, Variant variant) {
  require(!corpus.empty(), ErrorCode::kInvalidArgument, "evaluation corpus is empty");
  for (const auto& s : corpus) {
    const bool ok = variant == Variant::kChain ? !s.gold_states.empty() : !s.gold_parents.empty();
    require(ok, ErrorCode::kInvalidArgument,
            std::string("variant/corpus mismatch: dialogue '") + s.id + "' has no " +
                (variant == Variant::kChain ? "gold_states" : "gold_parents") + " for the " + variant_name(variant) +
                " variant");
  }
}

nn::Vocabulary build_vocabulary(const std::vector<DialogueSession>& corpus, Variant variant) {
  std::vector<std::vector<std::string>> sentences;
  for (const auto& s : corpus)
    for (auto& t : turn_tokens(s, variant)) sentences.push_back(std::move(t));
  return nn::Vocabulary::build(sentences);
}

std::vector<EncodedDialogue> encode_corpus(const StructuredVrnn& model, const std::vector<DialogueSession>& corpus) {
  std::vector<EncodedDialogue> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(model.encode(turn_tokens(s, model.config().variant)));
  return out;
}

std::string EvaluationReport::to_json() const {
  Json j;
  j["variant"] = variant_name(variant);
  j["dialogues"] = dialogues;
  if (variant == Variant::kChain) {
    j["true_states"] = chain.true_states;
    j["learned_states"] = chain.learned_states;
    j["vrnn"] = scores_json(chain.model);
    if (chain.kmeans) {
      Json k = scores_json(*chain.kmeans);
      k["inertia"] = chain.kmeans_inertia;
      j["kmeans"] = std::move(k);
    }
    j["truth"] = matrix_json(chain.model.truth);
    j["learned"] = matrix_json(chain.model.learned);
  } else {
    j["parent_accuracy"] = tree.model.value();
    j["most_recent_baseline"] = tree.most_recent.value();
    j["improvement"] = tree.improvement();
    j["children"] = tree.model.total;
  }
  return j.dump();
}

EvaluationReport evaluate_model(StructuredVrnn& model, const std::vector<DialogueSession>& corpus,
                                std::uint64_t kmeans_seed) {
  const Variant variant = model.config().variant;
  require_gold_labels(corpus, variant);
  const auto encoded = encode_corpus(model, corpus);
  EvaluationReport r;
  r.variant = variant;
  r.dialogues = corpus.size();

  if (variant == Variant::kTree) {
    std::vector<std::vector<int>> parents;
    for (const auto& e : encoded) {
      const TreeMarginals m = model.infer_tree(e);
      std::vector<int> p(static_cast<std::size_t>(m.p_arc.cols()), -1);
      for (Eigen::Index j = 1; j < m.p_arc.cols(); ++j) p[static_cast<std::size_t>(j)] = predicted_parent(m.p_arc, static_cast<int>(j));
      parents.push_back(std::move(p));
    }
    r.tree = score_parents(corpus, parents);
    return r;
  }

  std::vector<std::vector<int>> truth, learned, clustered;
  std::vector<Eigen::VectorXd> points;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    truth.push_back(corpus[k].gold_states);
    learned.push_back(model.infer_trace(encoded[k]).states);
    for (const auto& t : encoded[k].turns) points.push_back(model.mean_embedding(t));
  }
  const int n = model.config().num_states;
  const int m = label_count(truth);
  const KMeansResult km = kmeans_baseline(points, n, kmeans_seed);
  std::size_t at = 0;
  for (const auto& s : truth) {
    clustered.emplace_back(km.labels.begin() + static_cast<long>(at), km.labels.begin() + static_cast<long>(at + s.size()));
    at += s.size();
  }
  r.chain.true_states = m;
  r.chain.learned_states = n;
  r.chain.model = score_structure(truth, learned, m, n);
  r.chain.kmeans = score_structure(truth, clustered, m, n);
  r.chain.kmeans_inertia = km.inertia;
  return r;
}

std::vector<std::vector<int>> read_labels(const std::string& path, Variant variant) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot read " + path);
  const char* keys[2] = {variant == Variant::kChain ? "states" : "parents",
                         variant == Variant::kChain ? "gold_states" : "gold_parents"};
  std::vector<std::vector<int>> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(n) + ": ";
    try {
      const Json j = Json::parse(line);
      const char* key = j.contains(keys[0]) ? keys[0] : keys[1];
      require(j.contains(key), ErrorCode::kFormat, where + "record has neither '" + keys[0] + "' nor '" + keys[1] + "'");
      out.push_back(j.at(key).get<std::vector<int>>());
    } catch (const Json::exception& e) {
      fail(ErrorCode::kFormat, where + e.what());
    }
  }
  return out;
}

EvaluationReport evaluate_labels(const std::vector<DialogueSession>& gold, Variant variant,
                                 const std::vector<std::vector<int>>& labels) {
  require_gold_labels(gold, variant);
  require(labels.size() == gold.size(), ErrorCode::kDimensionMismatch,
          std::to_string(labels.size()) + " label records for " + std::to_string(gold.size()) + " dialogues");
  EvaluationReport r;
  r.variant = variant;
  r.dialogues = gold.size();
  if (variant == Variant::kTree) {
    r.tree = score_parents(gold, labels);
    return r;
  }
  std::vector<std::vector<int>> truth;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    truth.push_back(gold[k].gold_states);
    require(labels[k].size() == truth.back().size(), ErrorCode::kDimensionMismatch,
            "dialogue '" + gold[k].id + "': label count does not match its exchanges");
  }
  r.chain.true_states = label_count(truth);
  r.chain.learned_states = std::max(1, label_count(labels));
  r.chain.model = score_structure(truth, labels, r.chain.true_states, r.chain.learned_states);
  return r;
}

std::vector<std::string> induce_records(StructuredVrnn& model, const std::vector<DialogueSession>& corpus) {
  std::vector<std::string> out;
  const auto encoded = encode_corpus(model, corpus);
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    Json j;
    j["id"] = corpus[k].id;
    if (model.config().variant == Variant::kChain) {
      const LatentTrace t = model.infer_trace(encoded[k]);
      j["states"] = t.states;
      Json post = Json::array(), prior = Json::array();
      for (const auto& q : t.posterior) post.push_back(vector_json(q));
      for (const auto& p : t.prior) prior.push_back(vector_json(p));
      j["posterior"] = std::move(post);
      j["prior"] = std::move(prior);
    } else {
      const TreeMarginals m = model.infer_tree(encoded[k]);
      std::vector<int> parents(static_cast<std::size_t>(m.p_arc.cols()), -1);
      for (Eigen::Index c = 1; c < m.p_arc.cols(); ++c)
        parents[static_cast<std::size_t>(c)] = predicted_parent(m.p_arc, static_cast<int>(c));
      j["parents"] = parents;
      j["arcs"] = matrix_json(m.p_arc);
      j["log_partition"] = m.log_partition;
    }
    out.push_back(j.dump());
  }
  return out;
}

Structure learned_structure(StructuredVrnn& model, const std::vector<DialogueSession>& corpus,
                            std::size_t max_dialogues) {
  require(!corpus.empty(), ErrorCode::kInvalidArgument, "empty structure: corpus has no dialogues");
  Structure s;
  s.kind = model.config().variant;
  if (s.kind == Variant::kChain) {
    std::vector<std::vector<int>> traces;
    for (const auto& e : encode_corpus(model, corpus)) traces.push_back(model.infer_trace(e).states);
    const int n = model.config().num_states;
    s.chain.states = default_state_names(n);
    s.chain.transitions = estimate_transitions(traces, n);
    return s;
  }
  for (std::size_t k = 0; k < std::min(max_dialogues, corpus.size()); ++k) {
    TreeDialogue d;
    d.id = corpus[k].id;
    for (const auto& u : corpus[k].turns) d.turns.push_back(turn_label(u));
    d.arcs = model.infer_tree(model.encode(turn_tokens(corpus[k], Variant::kTree))).p_arc;
    s.tree.dialogues.push_back(std::move(d));
  }
  return s;
}

std::string two_party_sidecar(const DomainSpec& domain, const std::vector<DialogueSession>& corpus) {
  Json j;
  j["kind"] = "chain";
  j["domain"] = domain.name;
  Json names = Json::array();
  for (const auto& st : domain.states) names.push_back(st.name);
  j["states"] = std::move(names);
  j["transitions"] = matrix_json(domain.transitions);
  j["initial"] = domain.initial;
  j["terminal"] = domain.terminal;
  j["dialogues"] = corpus.size();
  j["recovered"] = matrix_json(recover_truth_matrix(corpus, domain.size()));
  return j.dump();
}

std::string multi_party_sidecar(const std::vector<DialogueSession>& corpus, std::size_t max_dialogues) {
  Json j;
  j["kind"] = "tree";
  Json ds = Json::array();
  for (std::size_t k = 0; k < std::min(max_dialogues, corpus.size()); ++k) {
    const auto& s = corpus[k];
    const auto n = static_cast<Eigen::Index>(s.turns.size());
    Eigen::MatrixXd arcs = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      const int p = s.gold_parents.empty() ? -1 : s.gold_parents[static_cast<std::size_t>(c)];
      if (p >= 0) arcs(p, c) = 1.0;
    }
    Json turns = Json::array();
    for (const auto& u : s.turns) turns.push_back(turn_label(u));
    ds.push_back(Json{{"id", s.id}, {"turns", std::move(turns)}, {"arcs", matrix_json(arcs)}});
  }
  j["dialogues"] = std::move(ds);
  j["total_dialogues"] = corpus.size();
  return j.dump();
}

std::string corpus_stats_json(const std::vector<DialogueSession>& corpus) {
  std::size_t utterances = 0, tokens = 0, longest = 0, shortest = corpus.empty() ? 0 : SIZE_MAX;
  std::size_t labeled_states = 0, labeled_parents = 0;
  std::vector<std::vector<std::string>> sentences;
  for (const auto& s : corpus) {
    utterances += s.turns.size();
    longest = std::max(longest, s.turns.size());
    shortest = std::min(shortest, s.turns.size());
    for (const auto& u : s.turns) {
      sentences.push_back(nn::tokenize(u.text));
      tokens += sentences.back().size();
    }
    if (!s.gold_states.empty()) ++labeled_states;
    if (!s.gold_parents.empty()) ++labeled_parents;
  }
  const double n = corpus.empty() ? 1.0 : static_cast<double>(corpus.size());
  Json j;
  j["dialogues"] = corpus.size();
  j["utterances"] = utterances;
  j["tokens"] = tokens;
  j["vocabulary"] = nn::Vocabulary::build(sentences).size();
  j["utterances_per_dialogue"] = static_cast<double>(utterances) / n;
  j["min_utterances"] = shortest;
  j["max_utterances"] = longest;
  j["with_gold_states"] = labeled_states;
  j["with_gold_parents"] = labeled_parents;
  return j.dump();
}

}  // namespace svrnn
