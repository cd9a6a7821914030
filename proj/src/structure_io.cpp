#include "svrnn/structure_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "svrnn/error.hpp"

namespace svrnn {

namespace {

using json = nlohmann::json;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, std::size_t n, const std::string& what) {
  if (!j.is_array() || j.size() != n) fail(ErrorCode::kFormat, what + ": expected " + std::to_string(n) + " rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != n)
      fail(ErrorCode::kFormat, what + ": row " + std::to_string(r) + " must have " + std::to_string(n) + " entries");
    for (std::size_t c = 0; c < n; ++c) {
      if (!row[c].is_number()) fail(ErrorCode::kFormat, what + ": non-numeric entry");
      const double v = row[c].get<double>();
      if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::kFormat, what + ": entries must be finite and >= 0");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return m;
}

std::vector<std::string> strings_from(const json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorCode::kFormat, what + ": expected a list of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) fail(ErrorCode::kFormat, what + ": expected a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

const json& field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) fail(ErrorCode::kFormat, std::string("missing field '") + name + "'");
  return *it;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string fixed2(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", p);
  return buf;
}

}  // namespace

std::vector<std::string> default_state_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("s" + std::to_string(i));
  return names;
}

std::string structure_to_json(const Structure& s) {
  json j;
  j["kind"] = variant_name(s.kind);
  if (s.kind == Variant::kChain) {
    j["states"] = s.chain.states;
    j["transitions"] = matrix_json(s.chain.transitions);
  } else {
    json ds = json::array();
    for (const auto& d : s.tree.dialogues) {
      ds.push_back({{"id", d.id}, {"turns", d.turns}, {"arcs", matrix_json(d.arcs)}});
    }
    j["dialogues"] = std::move(ds);
  }
  return j.dump();
}

Structure structure_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("structure is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kFormat, "structure must be a JSON object");
  const json& kind = field(j, "kind");
  if (!kind.is_string()) fail(ErrorCode::kFormat, "'kind' must be a string");
  Structure s;
  const std::string k = kind.get<std::string>();
  if (k == "chain") {
    s.kind = Variant::kChain;
    s.chain.states = strings_from(field(j, "states"), "states");
    s.chain.transitions = matrix_from(field(j, "transitions"), s.chain.states.size(), "transitions");
  } else if (k == "tree") {
    s.kind = Variant::kTree;
    const json& ds = field(j, "dialogues");
    if (!ds.is_array()) fail(ErrorCode::kFormat, "'dialogues' must be a list");
    for (const auto& d : ds) {
      TreeDialogue t;
      const json& id = field(d, "id");
      if (!id.is_string()) fail(ErrorCode::kFormat, "dialogue 'id' must be a string");
      t.id = id.get<std::string>();
      t.turns = strings_from(field(d, "turns"), "turns of " + t.id);
      t.arcs = matrix_from(field(d, "arcs"), t.turns.size(), "arcs of " + t.id);
      s.tree.dialogues.push_back(std::move(t));
    }
  } else {
    fail(ErrorCode::kFormat, "unknown structure kind '" + k + "'");
  }
  return s;
}

Structure read_structure(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot read structure file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return structure_from_json(ss.str());
}

std::string chain_to_dot(const ChainStructure& s, double threshold) {
  const auto n = static_cast<Eigen::Index>(s.states.size());
  require(n > 0, ErrorCode::kInvalidArgument, "empty structure: no states to draw");
  require(s.transitions.rows() == n && s.transitions.cols() == n, ErrorCode::kDimensionMismatch,
          "transition matrix does not match the state list");
  std::string out = "digraph structure {\n  rankdir=LR;\n  node [shape=ellipse];\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    out += "  s" + std::to_string(i) + " [label=" + quoted(s.states[static_cast<std::size_t>(i)]) + "];\n";
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = s.transitions(i, j);
      if (p < threshold) continue;
      out += "  s" + std::to_string(i) + " -> s" + std::to_string(j) + " [label=\"" + fixed2(p) + "\"];\n";
    }
  }
  return out + "}\n";
}

std::string tree_to_dot(const TreeStructure& s) {
  require(!s.dialogues.empty(), ErrorCode::kInvalidArgument, "empty structure: no dialogues to draw");
  std::string out = "digraph structure {\n  node [shape=box];\n";
  for (std::size_t k = 0; k < s.dialogues.size(); ++k) {
    const TreeDialogue& d = s.dialogues[k];
    const auto n = static_cast<Eigen::Index>(d.turns.size());
    require(d.arcs.rows() == n && d.arcs.cols() == n, ErrorCode::kDimensionMismatch,
            "arc matrix of " + d.id + " does not match its turns");
    const std::string prefix = "d" + std::to_string(k) + "_";
    out += "  subgraph cluster_" + std::to_string(k) + " {\n    label=" + quoted(d.id) + ";\n";
    for (Eigen::Index i = 0; i < n; ++i) {
      out += "    " + prefix + std::to_string(i) + " [label=" + quoted(d.turns[static_cast<std::size_t>(i)]) + "];\n";
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const long alpha = std::lround(255.0 * std::clamp(d.arcs(i, j), 0.0, 1.0));
        if (alpha == 0) continue;
        char color[16];
        std::snprintf(color, sizeof color, "#000000%02lX", alpha);
        out += "    " + prefix + std::to_string(i) + " -> " + prefix + std::to_string(j) + " [color=\"" + color +
               "\", label=\"" + fixed2(d.arcs(i, j)) + "\"];\n";
      }
    }
    out += "  }\n";
  }
  return out + "}\n";
}

std::string structure_to_dot(const Structure& s, double threshold) {
  return s.kind == Variant::kChain ? chain_to_dot(s.chain, threshold) : tree_to_dot(s.tree);
}

}  // namespace svrnn
