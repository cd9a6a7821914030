#pragma once

// Glue between corpora, trained models, and structure evaluation: the
// pieces the command-line tools and the acceptance runner share.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svrnn/corpus.hpp"
#include "svrnn/model.hpp"
#include "svrnn/simdial_gen.hpp"
#include "svrnn/structure_eval.hpp"
#include "svrnn/structure_io.hpp"

namespace svrnn {

/// Vocabulary over the model turns of a corpus.
nn::Vocabulary build_vocabulary(const std::vector<DialogueSession>& corpus, Variant variant);
std::vector<EncodedDialogue> encode_corpus(const StructuredVrnn& model, const std::vector<DialogueSession>& corpus);

struct ChainReport {
  int true_states = 0;
  int learned_states = 0;
  StructureScores model;
  std::optional<StructureScores> kmeans;
  double kmeans_inertia = 0.0;
};

struct TreeReport {
  ParentAccuracy model;
  ParentAccuracy most_recent;
  double improvement() const { return model.value() - most_recent.value(); }
};

struct EvaluationReport {
  Variant variant = Variant::kChain;
  std::size_t dialogues = 0;
  ChainReport chain;
  TreeReport tree;

  /// One JSON object; every number is finite.
  std::string to_json() const;
};

/// Throws kInvalidArgument ("variant/corpus mismatch") unless every
/// dialogue carries the gold labels `variant` is scored against.
void require_gold_labels(const std::vector<DialogueSession>& corpus, Variant variant);

/// Chain: SED/SCE of argmax traces against the recovered truth matrix, plus
/// K-means (K = number of latent states, on mean word embeddings) through
/// the same mapping. Tree: parent accuracy of argmax-per-child arcs against
/// the most-recent baseline. Throws kInvalidArgument when the corpus lacks
/// the gold labels the variant needs.
EvaluationReport evaluate_model(StructuredVrnn& model, const std::vector<DialogueSession>& corpus,
                                std::uint64_t kmeans_seed);

/// Per-dialogue label sequences read from induce output or from a corpus:
/// "states" or "gold_states" for chain, "parents" or "gold_parents" for tree.
std::vector<std::vector<int>> read_labels(const std::string& path, Variant variant);

/// Scores externally produced labels, aligned with the gold corpus by
/// position. No K-means rows.
EvaluationReport evaluate_labels(const std::vector<DialogueSession>& gold, Variant variant,
                                 const std::vector<std::vector<int>>& labels);

/// One JSON line per dialogue. Chain: id, states, posterior, prior.
/// Tree: id, parents, arcs, log_partition.
std::vector<std::string> induce_records(StructuredVrnn& model, const std::vector<DialogueSession>& corpus);

/// Chain: transition matrix of the argmax traces over all latent states.
/// Tree: arc marginals of the first `max_dialogues` dialogues.
Structure learned_structure(StructuredVrnn& model, const std::vector<DialogueSession>& corpus,
                            std::size_t max_dialogues = 5);

/// Gold structure of a generated corpus. Two-party: the authored domain with
/// its state names, plus the matrix recovered from the sample under
/// "recovered". Multi-party: one-hot gold arcs for the first `max_dialogues`.
std::string two_party_sidecar(const DomainSpec& domain, const std::vector<DialogueSession>& corpus);
std::string multi_party_sidecar(const std::vector<DialogueSession>& corpus, std::size_t max_dialogues = 5);

/// Counts and length statistics as one JSON object.
std::string corpus_stats_json(const std::vector<DialogueSession>& corpus);

}  // namespace svrnn
