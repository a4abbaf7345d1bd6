#pragma once

#include <string>
#include <vector>

#include "cqg/graph.hpp"
#include "test_util.hpp"

namespace testutil {

inline cqg::GraphNode node(std::string id, cqg::NodeRole role, std::string type) {
  cqg::GraphNode n;
  n.id = std::move(id);
  n.role = role;
  n.entity_type = type;
  n.type_name = {type};
  return n;
}

inline cqg::Triple triple(const cqg::QueryGraph& g, std::string s, std::string p,
                          std::string o) {
  cqg::Triple t;
  t.subject = std::move(s);
  t.predicate = p;
  t.object = std::move(o);
  t.predicate_name = {p};
  t.inverse_predicate_name = {p, "of"};
  const auto* sn = g.find_node(t.subject);
  const auto* on = g.find_node(t.object);
  if (sn && on) {
    const bool st = sn->role == cqg::NodeRole::Terminal;
    const bool ot = on->role == cqg::NodeRole::Terminal;
    if (st != ot) t.grounded = cqg::Grounded{st ? t.subject : t.object,
                                             st ? t.subject : t.object};
  }
  return t;
}

/// Small builder: declare nodes, then edges.
struct GraphBuilder {
  cqg::QueryGraph g;
  GraphBuilder& question(const std::string& id, const std::string& type = "thing") {
    g.nodes.push_back(node(id, cqg::NodeRole::Question, type));
    return *this;
  }
  GraphBuilder& variable(const std::string& id, const std::string& type = "thing") {
    g.nodes.push_back(node(id, cqg::NodeRole::Variable, type));
    return *this;
  }
  GraphBuilder& terminal(const std::string& id, const std::string& type = "entity") {
    g.nodes.push_back(node(id, cqg::NodeRole::Terminal, type));
    return *this;
  }
  GraphBuilder& edge(const std::string& s, const std::string& p, const std::string& o) {
    g.triples.push_back(triple(g, s, p, o));
    return *this;
  }
  cqg::QueryGraph build() const { return g; }
};

/// The running example graph: question node x with an award-nomination CVT
/// child c, and a film branch x -> z -> y where y has a grounded child and a
/// gender. Five triples, tree depth 3.
inline cqg::QueryGraph figure_graph() {
  return GraphBuilder()
      .question("x", "person")
      .variable("c", "award_nomination")
      .variable("z", "performance")
      .variable("y", "person")
      .terminal("LeiaOrgana", "person")
      .terminal("female", "gender")
      .edge("x", "award_nomination", "c")
      .edge("x", "film", "z")
      .edge("z", "character", "y")
      .edge("y", "children", "LeiaOrgana")
      .edge("y", "gender", "female")
      .build();
}

/// Its sub-question graph: who has child LeiaOrgana.
inline cqg::QueryGraph figure_subquestion_graph() {
  return GraphBuilder()
      .question("q", "person")
      .terminal("LeiaOrgana", "person")
      .edge("q", "children", "LeiaOrgana")
      .build();
}

/// Two pseudo sub-question graphs: same predicates, other entities.
inline cqg::QueryGraph figure_pseudo_graph_children() {
  return GraphBuilder()
      .question("q", "person")
      .terminal("PadmeAmidala", "person")
      .edge("q", "children", "PadmeAmidala")
      .build();
}

inline cqg::QueryGraph figure_pseudo_graph_gender() {
  return GraphBuilder()
      .question("q", "person")
      .terminal("male", "gender")
      .edge("q", "gender", "male")
      .build();
}

/// Random small connected valid graph for property tests.
inline cqg::QueryGraph random_graph(Rng& rng, std::size_t max_triples = 5,
                                    std::size_t n_predicates = 4,
                                    std::size_t n_entities = 4) {
  GraphBuilder b;
  b.question("q", "thing");
  std::vector<std::string> nonterm{"q"};
  std::vector<std::string> terms;
  const std::size_t n = 1 + rng.below(max_triples);
  std::size_t vars = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string from = nonterm[rng.below(nonterm.size())];
    std::string to;
    const double roll = rng.unit();
    if (roll < 0.45) {
      // fresh terminal from a small shared entity pool
      to = "E" + std::to_string(rng.below(n_entities));
      bool fresh = true;
      for (const auto& t : terms) {
        if (t == to) fresh = false;
      }
      if (fresh && !b.g.find_node(to)) {
        b.terminal(to, "entity");
        terms.push_back(to);
      } else if (!b.g.find_node(to)) {
        terms.push_back(to);
        b.terminal(to, "entity");
      }
    } else if (roll < 0.85 || nonterm.size() < 2) {
      to = "v" + std::to_string(vars++);
      b.variable(to, "thing");
      nonterm.push_back(to);
    } else {
      // close a cycle between existing non-terminals
      to = nonterm[rng.below(nonterm.size())];
      if (to == from) {
        to = "v" + std::to_string(vars++);
        b.variable(to, "thing");
        nonterm.push_back(to);
      }
    }
    const std::string pred = "p" + std::to_string(rng.below(n_predicates));
    if (rng.unit() < 0.5) {
      b.edge(from, pred, to);
    } else {
      b.edge(to, pred, from);
    }
  }
  return b.build();
}

}  // namespace testutil
