#include "cqg/graph.hpp"

#include <deque>
#include <map>
#include <set>

#include "cqg/errors.hpp"

namespace cqg {

std::string role_name(NodeRole r) {
  switch (r) {
    case NodeRole::Question: return "question";
    case NodeRole::Variable: return "variable";
    case NodeRole::Terminal: return "terminal";
  }
  return "?";
}

NodeRole role_from_name(const std::string& s) {
  if (s == "question") return NodeRole::Question;
  if (s == "variable") return NodeRole::Variable;
  if (s == "terminal") return NodeRole::Terminal;
  throw ParseError("unknown node role: " + s);
}

const GraphNode* QueryGraph::find_node(const std::string& id) const {
  for (const GraphNode& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

NodeRole QueryGraph::role(const std::string& id) const {
  const GraphNode* n = find_node(id);
  if (!n) throw ConfigError("unknown node id: " + id);
  return n->role;
}

std::string QueryGraph::question_node() const {
  for (const GraphNode& n : nodes) {
    if (n.role == NodeRole::Question) return n.id;
  }
  throw ConfigError("graph has no question node");
}

std::vector<std::size_t> QueryGraph::grounded_triples() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (triples[i].grounded) out.push_back(i);
  }
  return out;
}

std::vector<std::string> validate_graph(const QueryGraph& g) {
  std::vector<std::string> issues;

  if (g.triples.empty()) issues.push_back("graph has no triples");

  std::set<std::string> ids;
  for (const GraphNode& n : g.nodes) {
    if (!ids.insert(n.id).second) issues.push_back("duplicate node id: " + n.id);
    if (n.type_name.empty()) issues.push_back("empty type name for node " + n.id);
  }

  std::size_t questions = 0;
  for (const GraphNode& n : g.nodes) {
    if (n.role == NodeRole::Question) ++questions;
  }
  if (questions == 0) issues.push_back("no question node");
  if (questions > 1) issues.push_back("multiple question nodes");

  for (std::size_t i = 0; i < g.triples.size(); ++i) {
    const Triple& t = g.triples[i];
    const std::string where = "triple " + std::to_string(i);
    const GraphNode* s = g.find_node(t.subject);
    const GraphNode* o = g.find_node(t.object);
    if (!s) issues.push_back(where + ": unknown subject node " + t.subject);
    if (!o) issues.push_back(where + ": unknown object node " + t.object);
    if (t.predicate_name.empty()) issues.push_back(where + ": empty predicate name");
    if (t.inverse_predicate_name.empty())
      issues.push_back(where + ": empty inverse predicate name");
    if (!s || !o) continue;

    const bool s_term = s->role == NodeRole::Terminal;
    const bool o_term = o->role == NodeRole::Terminal;
    if (s_term && o_term) issues.push_back(where + ": two grounded entities");
    const bool expect_grounded = s_term != o_term;
    if (expect_grounded && !t.grounded)
      issues.push_back(where + ": terminal endpoint without grounded entity");
    if (!expect_grounded && t.grounded)
      issues.push_back(where + ": grounded entity without a single terminal endpoint");
    if (t.grounded) {
      const std::string& gn = t.grounded->node;
      if (gn != t.subject && gn != t.object)
        issues.push_back(where + ": grounded node is not an endpoint");
      else if (expect_grounded && gn != (s_term ? t.subject : t.object))
        issues.push_back(where + ": grounded node is not the terminal endpoint");
      if (t.grounded->name.empty()) issues.push_back(where + ": empty grounded name");
    }
  }

  // Connectivity over the undirected triple edges.
  if (!g.nodes.empty() && !g.triples.empty()) {
    std::set<std::string> seen;
    std::deque<std::string> frontier{g.nodes.front().id};
    seen.insert(g.nodes.front().id);
    while (!frontier.empty()) {
      const std::string u = frontier.front();
      frontier.pop_front();
      for (const Triple& t : g.triples) {
        std::string other;
        if (t.subject == u) other = t.object;
        else if (t.object == u) other = t.subject;
        else continue;
        if (seen.insert(other).second) frontier.push_back(other);
      }
    }
    if (seen.size() != ids.size()) issues.push_back("graph is not connected");
  }

  return issues;
}

EncodingTree to_encoding_tree(const QueryGraph& g) {
  EncodingTree tree;
  const std::string root_id = g.question_node();
  tree.nodes.push_back({root_id, -1, {}, false});

  std::set<std::string> discovered{root_id};
  std::vector<bool> used(g.triples.size(), false);
  std::deque<int> frontier{0};

  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    const std::string uid = tree.nodes[u].graph_node;
    if (tree.nodes[u].duplicate) continue;
    for (std::size_t ti = 0; ti < g.triples.size(); ++ti) {
      if (used[ti]) continue;
      const Triple& t = g.triples[ti];
      std::string other;
      if (t.subject == uid) other = t.object;
      else if (t.object == uid) other = t.subject;
      else continue;
      used[ti] = true;
      const bool dup = !discovered.insert(other).second;
      tree.nodes.push_back({other, static_cast<int>(ti), {}, dup});
      const int child = static_cast<int>(tree.nodes.size()) - 1;
      tree.nodes[u].children.push_back(child);
      if (!dup) frontier.push_back(child);
    }
  }
  return tree;
}

}  // namespace cqg
