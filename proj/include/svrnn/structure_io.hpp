#pragma once

// Induced or gold dialogue structure as JSON documents and DOT graphs.
//
// JSON: {"kind": "chain", "states": [names], "transitions": [[...]]} or
// {"kind": "tree", "dialogues": [{"id", "turns": [labels], "arcs": [[...]]}]}.
// Unknown fields are ignored on read, so sidecars may carry extra data.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svrnn/model.hpp"

namespace svrnn {

struct ChainStructure {
  std::vector<std::string> states;
  Eigen::MatrixXd transitions;  // row-stochastic, states x states
};

struct TreeDialogue {
  std::string id;
  std::vector<std::string> turns;  // node labels
  Eigen::MatrixXd arcs;            // arcs(i, j) = p(i is parent of j)
};

struct TreeStructure {
  std::vector<TreeDialogue> dialogues;
};

struct Structure {
  Variant kind = Variant::kChain;
  ChainStructure chain;
  TreeStructure tree;
};

inline constexpr double kDefaultEdgeThreshold = 0.1;

/// Generic state names s0..s{n-1}.
std::vector<std::string> default_state_names(int n);

std::string structure_to_json(const Structure& s);
/// Throws kFormat on missing fields or inconsistent shapes.
Structure structure_from_json(const std::string& text);
Structure read_structure(const std::string& path);

/// Transition digraph. Edges with p < threshold are dropped; labels are p
/// with two decimals. Throws kInvalidArgument when there are no states.
std::string chain_to_dot(const ChainStructure& s, double threshold = kDefaultEdgeThreshold);
/// One cluster per dialogue, parent -> child edges whose alpha is
/// round(255 p). Arcs that round to zero are left out. Throws
/// kInvalidArgument when there are no dialogues.
std::string tree_to_dot(const TreeStructure& s);
std::string structure_to_dot(const Structure& s, double threshold = kDefaultEdgeThreshold);

}  // namespace svrnn
