#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/graphviz.hpp>

#include "doctest.h"
#include "svrnn/error.hpp"
#include "svrnn/structure_io.hpp"

using namespace svrnn;

namespace {

struct Parsed {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::vector<std::string> labels;
};

// Parses with the Boost Graphviz reader, which rejects malformed DOT.
Parsed parse_dot(const std::string& dot) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS,
                                      boost::property<boost::vertex_name_t, std::string>,
                                      boost::property<boost::edge_name_t, std::string>>;
  Graph g;
  boost::dynamic_properties dp(boost::ignore_other_properties);
  dp.property("node_id", boost::get(boost::vertex_name, g));
  dp.property("label", boost::get(boost::edge_name, g));
  std::istringstream in(dot);
  REQUIRE(boost::read_graphviz(in, g, dp, "node_id"));
  Parsed p;
  p.vertices = boost::num_vertices(g);
  p.edges = boost::num_edges(g);
  for (auto [it, end] = boost::edges(g); it != end; ++it) p.labels.push_back(boost::get(boost::edge_name, g, *it));
  return p;
}

ChainStructure three_state() {
  ChainStructure c;
  c.states = {"hello", "ask \"time\"", "bye"};
  c.transitions.resize(3, 3);
  c.transitions << 0.05, 0.9, 0.05, 0.0, 0.5, 0.5, 1.0 / 3, 1.0 / 3, 1.0 / 3;
  return c;
}

}  // namespace

TEST_CASE("chain DOT") {
  ChainStructure one{{"only"}, Eigen::MatrixXd::Ones(1, 1)};
  const std::string dot = chain_to_dot(one);
  CHECK(dot.find("s0 -> s0 [label=\"1.00\"];") != std::string::npos);
  Parsed p = parse_dot(dot);
  CHECK(p.vertices == 1);
  CHECK(p.edges == 1);

  CHECK(parse_dot(chain_to_dot(one, 1.1)).edges == 0);

  const ChainStructure c = three_state();
  p = parse_dot(chain_to_dot(c));
  CHECK(p.vertices == 3);
  CHECK(p.edges == 6);  // 0.05 and 0.0 pruned
  CHECK(std::count(p.labels.begin(), p.labels.end(), "0.33") == 3);
  CHECK(chain_to_dot(c) == chain_to_dot(c));
  CHECK(chain_to_dot(c, 0.0).find("s1 -> s0 [label=\"0.00\"]") != std::string::npos);

  CHECK_THROWS_AS(chain_to_dot(ChainStructure{}), Error);
}

TEST_CASE("tree DOT") {
  TreeDialogue d{"dlg-1", {"p0 : hi", "p1 : \"hey\"", "p2 : yo"}, Eigen::MatrixXd::Zero(3, 3)};
  d.arcs(0, 1) = 1.0;
  d.arcs(0, 2) = 0.25;
  d.arcs(1, 2) = 0.75;
  TreeStructure t{{d, d}};
  const std::string dot = tree_to_dot(t);
  CHECK(dot.find("subgraph cluster_1") != std::string::npos);
  CHECK(dot.find("color=\"#000000FF\"") != std::string::npos);
  CHECK(dot.find("color=\"#00000040\"") != std::string::npos);  // round(63.75)
  CHECK(dot.find("color=\"#000000BF\"") != std::string::npos);
  const Parsed p = parse_dot(dot);
  CHECK(p.vertices == 6);
  CHECK(p.edges == 6);
  CHECK_THROWS_AS(tree_to_dot(TreeStructure{}), Error);
}

TEST_CASE("structure JSON round trip") {
  Structure s;
  s.chain = three_state();
  Structure r = structure_from_json(structure_to_json(s));
  CHECK(r.kind == Variant::kChain);
  CHECK(r.chain.states == s.chain.states);
  CHECK(r.chain.transitions == s.chain.transitions);

  Structure t;
  t.kind = Variant::kTree;
  t.tree.dialogues.push_back({"a", {"x", "y"}, Eigen::MatrixXd::Zero(2, 2)});
  t.tree.dialogues[0].arcs(0, 1) = 1.0;
  r = structure_from_json(structure_to_json(t));
  CHECK(r.kind == Variant::kTree);
  REQUIRE(r.tree.dialogues.size() == 1);
  CHECK(r.tree.dialogues[0].arcs == t.tree.dialogues[0].arcs);

  // Extra fields are tolerated.
  CHECK_NOTHROW(structure_from_json(R"({"kind":"chain","states":["a"],"transitions":[[1]],"domain":"bus"})"));
  CHECK_THROWS_AS(structure_from_json(R"({"kind":"chain","states":["a","b"],"transitions":[[1]]})"), Error);
  CHECK_THROWS_AS(structure_from_json(R"({"kind":"ring"})"), Error);
  CHECK_THROWS_AS(structure_from_json("not json"), Error);
  CHECK(default_state_names(3) == std::vector<std::string>{"s0", "s1", "s2"});
}
