#pragma once

// Templated dialogue generators with known structure: two-party
// information-request dialogues driven by a state machine, and multi-party
// chats whose reply tree is sampled explicitly.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svrnn/corpus.hpp"
#include "svrnn/structure_eval.hpp"

namespace svrnn {

/// Templates reference slot variables as {variable:slot_list}. A variable is
/// drawn once per dialogue from the named list, so repeated mentions agree.
struct StateSpec {
  std::string name;
  std::vector<std::string> system;
  std::vector<std::string> user;  // empty: the exchange is system-only
};

struct DomainSpec {
  std::string name;
  std::vector<StateSpec> states;
  Eigen::MatrixXd transitions;  // row-stochastic; the terminal row is uniform
  int initial = 0;
  int terminal = 0;
  std::map<std::string, std::vector<std::string>> slots;

  int size() const { return static_cast<int>(states.size()); }
  /// Throws kInvalidArgument listing the first violation found.
  void validate() const;
};

const std::vector<std::string>& builtin_domain_names();
/// bus, restaurant, weather, or movie. Throws kInvalidArgument otherwise.
DomainSpec builtin_domain(const std::string& name);

/// Dialogue i draws from a generator seeded by (seed, domain name, i).
std::vector<DialogueSession> generate_two_party(const DomainSpec& spec, std::size_t count, std::uint64_t seed);

inline constexpr int kMultiPartyMinUtterances = 7;
inline constexpr int kMultiPartyMaxUtterances = 8;

/// Each utterance after the first replies to an earlier one (weight
/// 1/sqrt(distance), boosted for the root and for questions), is spoken by
/// someone other than its parent's speaker, reuses keywords from its parent,
/// and often names the parent's speaker up front.
std::vector<DialogueSession> generate_multi_party(int speakers, std::size_t count, std::uint64_t seed);

/// estimate_transitions over the gold state sequences.
TransitionMatrix recover_truth_matrix(const std::vector<DialogueSession>& corpus, int num_states);
/// Same, with the state count taken from the largest label.
TransitionMatrix recover_truth_matrix(const std::vector<DialogueSession>& corpus);

struct CorpusSplit {
  std::vector<DialogueSession> train;
  std::vector<DialogueSession> valid;
  std::vector<DialogueSession> test;
};

/// 80/10/10 in order.
CorpusSplit split_corpus(const std::vector<DialogueSession>& corpus);

/// Jaccard overlap of the token sets of two texts.
double lexical_overlap(const std::string& a, const std::string& b);

}  // namespace svrnn
