#include <set>

#include "cqg/graph.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cqg;
using testutil::GraphBuilder;

namespace {

int tree_depth(const EncodingTree& t, int node = 0) {
  int best = 0;
  for (int c : t.nodes[node].children) best = std::max(best, 1 + tree_depth(t, c));
  return best;
}

bool trees_equal(const EncodingTree& a, const EncodingTree& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    if (a.nodes[i].graph_node != b.nodes[i].graph_node) return false;
    if (a.nodes[i].parent_triple != b.nodes[i].parent_triple) return false;
    if (a.nodes[i].children != b.nodes[i].children) return false;
    if (a.nodes[i].duplicate != b.nodes[i].duplicate) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("validate_graph accepts a single grounded triple") {
  QueryGraph g = GraphBuilder()
                     .question("x", "person")
                     .terminal("LeiaOrgana", "person")
                     .edge("x", "parent", "LeiaOrgana")
                     .build();
  CHECK(validate_graph(g).empty());
  CHECK_FALSE(g.is_complex());
  CHECK(g.grounded_triples() == std::vector<std::size_t>{0});
}

TEST_CASE("validate_graph flags every violation") {
  SUBCASE("multiple question nodes") {
    QueryGraph g = GraphBuilder()
                       .question("x")
                       .question("y")
                       .edge("x", "p", "y")
                       .build();
    auto issues = validate_graph(g);
    bool found = false;
    for (const auto& m : issues) found = found || m.find("multiple question") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("two grounded entities") {
    QueryGraph g = GraphBuilder()
                       .question("x")
                       .terminal("A")
                       .terminal("B")
                       .edge("x", "p", "A")
                       .edge("A", "q", "B")
                       .build();
    bool found = false;
    for (const auto& m : validate_graph(g)) found = found || m.find("two grounded") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("disconnected") {
    GraphBuilder b;
    b.question("x").variable("y").variable("u").variable("v");
    b.edge("x", "p", "y").edge("u", "p", "v");
    bool found = false;
    for (const auto& m : validate_graph(b.build()))
      found = found || m.find("not connected") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("no triples") {
    QueryGraph g;
    g.nodes.push_back(testutil::node("x", NodeRole::Question, "t"));
    CHECK_FALSE(validate_graph(g).empty());
  }
}

TEST_CASE("encoding tree of a chain") {
  // x <- z <- E as two triples.
  QueryGraph g = GraphBuilder()
                     .question("x")
                     .variable("z")
                     .terminal("E")
                     .edge("z", "p1", "x")
                     .edge("E", "p2", "z")
                     .build();
  REQUIRE(validate_graph(g).empty());
  EncodingTree t = to_encoding_tree(g);
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].graph_node == "x");
  CHECK(t.nodes[0].parent_triple == -1);
  REQUIRE(t.nodes[0].children == std::vector<int>{1});
  CHECK(t.nodes[1].graph_node == "z");
  CHECK(t.nodes[1].parent_triple == 0);
  REQUIRE(t.nodes[1].children == std::vector<int>{2});
  CHECK(t.nodes[2].graph_node == "E");
  CHECK(t.nodes[2].parent_triple == 1);
}

TEST_CASE("diamond cycle duplicates the revisited node as a leaf") {
  // x-y (t0), x-z (t1), y-w (t2), z-w (t3): w appears under y and, as a
  // duplicate leaf, under z.
  QueryGraph g = GraphBuilder()
                     .question("x")
                     .variable("y")
                     .variable("z")
                     .variable("w")
                     .edge("x", "a", "y")
                     .edge("x", "b", "z")
                     .edge("y", "c", "w")
                     .edge("z", "d", "w")
                     .build();
  REQUIRE(validate_graph(g).empty());
  EncodingTree t = to_encoding_tree(g);
  REQUIRE(t.nodes.size() == 5);
  CHECK(t.nodes[0].graph_node == "x");
  CHECK(t.nodes[1].graph_node == "y");
  CHECK(t.nodes[2].graph_node == "z");
  CHECK(t.nodes[3].graph_node == "w");
  CHECK(t.nodes[3].parent_triple == 2);
  CHECK_FALSE(t.nodes[3].duplicate);
  CHECK(t.nodes[4].graph_node == "w");
  CHECK(t.nodes[4].parent_triple == 3);
  CHECK(t.nodes[4].duplicate);
  CHECK(t.nodes[4].children.empty());
  // the duplicate hangs under z
  CHECK(t.nodes[2].children == std::vector<int>{4});
}

TEST_CASE("figure graph: five triples, tree of depth 3") {
  QueryGraph g = testutil::figure_graph();
  REQUIRE(validate_graph(g).empty());
  REQUIRE(g.triples.size() == 5);
  EncodingTree t = to_encoding_tree(g);
  CHECK(t.nodes.size() == 6);  // root + one per triple
  CHECK(tree_depth(t) == 3);
  CHECK(t.nodes[0].graph_node == "x");
}

TEST_CASE("to_encoding_tree is deterministic and uses every triple once") {
  testutil::Rng rng(99);
  for (int it = 0; it < 100; ++it) {
    QueryGraph g = testutil::random_graph(rng, 6);
    if (!validate_graph(g).empty()) continue;
    EncodingTree a = to_encoding_tree(g);
    EncodingTree b = to_encoding_tree(g);
    CHECK(trees_equal(a, b));
    std::multiset<int> used;
    for (std::size_t i = 1; i < a.nodes.size(); ++i) used.insert(a.nodes[i].parent_triple);
    CHECK(used.size() == g.triples.size());
    for (std::size_t ti = 0; ti < g.triples.size(); ++ti) {
      CHECK(used.count(static_cast<int>(ti)) == 1);
    }
    // children are in ascending triple order
    for (const auto& nd : a.nodes) {
      for (std::size_t c = 1; c < nd.children.size(); ++c) {
        CHECK(a.nodes[nd.children[c - 1]].parent_triple <
              a.nodes[nd.children[c]].parent_triple);
      }
    }
  }
}
