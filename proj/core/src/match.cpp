#include "cqg/match.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cqg {

namespace {

// Backtracking injection of sub's triples into g's, threading the node map.
struct SubMatcher {
  const QueryGraph& sub;
  const QueryGraph& g;
  std::map<std::string, std::string> node_map;
  std::set<std::string> targets_taken;
  std::vector<bool> triple_taken;

  SubMatcher(const QueryGraph& s, const QueryGraph& graph)
      : sub(s), g(graph), triple_taken(graph.triples.size(), false) {}

  bool assign(const std::string& from, const std::string& to) {
    auto it = node_map.find(from);
    if (it != node_map.end()) return it->second == to;
    if (targets_taken.count(to)) return false;
    if (sub.role(from) == NodeRole::Terminal && from != to) return false;
    node_map.emplace(from, to);
    targets_taken.insert(to);
    return true;
  }

  void unassign(const std::string& from, bool was_new) {
    if (!was_new) return;
    targets_taken.erase(node_map[from]);
    node_map.erase(from);
  }

  bool search(std::size_t si) {
    if (si == sub.triples.size()) return true;
    const Triple& st = sub.triples[si];
    for (std::size_t gi = 0; gi < g.triples.size(); ++gi) {
      if (triple_taken[gi]) continue;
      const Triple& gt = g.triples[gi];
      if (gt.predicate != st.predicate) continue;

      const bool s_new = !node_map.count(st.subject);
      if (!assign(st.subject, gt.subject)) continue;
      const bool o_new = !node_map.count(st.object);
      if (!assign(st.object, gt.object)) {
        unassign(st.subject, s_new);
        continue;
      }
      triple_taken[gi] = true;
      if (search(si + 1)) return true;
      triple_taken[gi] = false;
      unassign(st.object, o_new);
      unassign(st.subject, s_new);
    }
    return false;
  }
};

}  // namespace

bool is_subquestion(const QueryGraph& g_sub, const QueryGraph& g) {
  if (g_sub.triples.size() >= g.triples.size()) return false;  // strict subset
  SubMatcher m(g_sub, g);
  return m.search(0);
}

bool is_pseudo_subquestion(const QueryGraph& g_sub, const QueryGraph& g) {
  std::set<std::string> preds;
  for (const Triple& t : g.triples) preds.insert(t.predicate);
  for (const Triple& t : g_sub.triples) {
    if (!preds.count(t.predicate)) return false;
  }
  return !is_subquestion(g_sub, g);
}

std::vector<TokenSequence> find_pseudo_pool(
    const QueryGraph& g,
    const std::vector<std::pair<QueryGraph, TokenSequence>>& corpus) {
  std::vector<TokenSequence> out;
  for (const auto& [graph, question] : corpus) {
    if (is_pseudo_subquestion(graph, g)) out.push_back(question);
  }
  return out;
}

std::vector<std::size_t> find_pseudo_pool_ids(const QueryGraph& g,
                                              const std::vector<QueryGraph>& corpus) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (is_pseudo_subquestion(corpus[i], g)) out.push_back(i);
  }
  return out;
}

namespace {

bool nodes_compatible(const GraphNode& a, const GraphNode& b) {
  return a.role == b.role && a.entity_type == b.entity_type && a.type_name == b.type_name;
}

bool triples_compatible(const Triple& a, const Triple& b) {
  return a.predicate == b.predicate && a.predicate_name == b.predicate_name &&
         a.inverse_predicate_name == b.inverse_predicate_name &&
         a.grounded.has_value() == b.grounded.has_value();
}

struct EquivMatcher {
  const QueryGraph& a;
  const QueryGraph& b;
  std::map<std::string, std::string> node_map;
  std::set<std::string> taken;
  std::vector<bool> triple_taken;
  std::vector<std::size_t> mapping;

  EquivMatcher(const QueryGraph& ga, const QueryGraph& gb)
      : a(ga), b(gb), triple_taken(gb.triples.size(), false),
        mapping(ga.triples.size(), 0) {}

  bool assign(const std::string& from, const std::string& to) {
    auto it = node_map.find(from);
    if (it != node_map.end()) return it->second == to;
    if (taken.count(to)) return false;
    if (!nodes_compatible(*a.find_node(from), *b.find_node(to))) return false;
    node_map.emplace(from, to);
    taken.insert(to);
    return true;
  }

  void unassign(const std::string& from, bool was_new) {
    if (!was_new) return;
    taken.erase(node_map[from]);
    node_map.erase(from);
  }

  bool search(std::size_t ai) {
    if (ai == a.triples.size()) return true;
    const Triple& at = a.triples[ai];
    for (std::size_t bi = 0; bi < b.triples.size(); ++bi) {
      if (triple_taken[bi]) continue;
      const Triple& bt = b.triples[bi];
      if (!triples_compatible(at, bt)) continue;

      const bool s_new = !node_map.count(at.subject);
      if (!assign(at.subject, bt.subject)) continue;
      const bool o_new = !node_map.count(at.object);
      if (!assign(at.object, bt.object)) {
        unassign(at.subject, s_new);
        continue;
      }
      triple_taken[bi] = true;
      mapping[ai] = bi;
      if (search(ai + 1)) return true;
      triple_taken[bi] = false;
      unassign(at.object, o_new);
      unassign(at.subject, s_new);
    }
    return false;
  }
};

}  // namespace

std::optional<std::vector<std::size_t>> find_equivalence(const QueryGraph& a,
                                                         const QueryGraph& b) {
  if (a.triples.size() != b.triples.size() || a.nodes.size() != b.nodes.size()) {
    return std::nullopt;
  }
  EquivMatcher m(a, b);
  if (!m.search(0)) return std::nullopt;
  return m.mapping;
}

}  // namespace cqg
