#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cqg/tokens.hpp"

namespace cqg {

enum class NodeRole { Question, Variable, Terminal };

std::string role_name(NodeRole r);
NodeRole role_from_name(const std::string& s);

struct GraphNode {
  std::string id;
  NodeRole role = NodeRole::Variable;
  std::string entity_type;
  std::vector<std::string> type_name;  // canonical name tokens of the entity type
};

struct Grounded {
  std::string node;  // terminal endpoint of the triple
  std::string name;  // surface name of the entity
};

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
  std::vector<std::string> predicate_name;
  std::vector<std::string> inverse_predicate_name;
  std::optional<Grounded> grounded;  // present iff exactly one endpoint is terminal
};

/// A query graph: relation triples over role-tagged nodes, exactly one of
/// which is the question node. Immutable once built.
struct QueryGraph {
  std::vector<GraphNode> nodes;
  std::vector<Triple> triples;

  const GraphNode* find_node(const std::string& id) const;
  NodeRole role(const std::string& id) const;  // ConfigError on unknown id
  std::string question_node() const;           // first question-role node
  bool is_complex() const { return triples.size() > 1; }
  /// Indices of triples carrying a grounded entity, ascending.
  std::vector<std::size_t> grounded_triples() const;
};

/// Check every QueryGraph invariant; returns one message per violation
/// (empty means valid).
std::vector<std::string> validate_graph(const QueryGraph& g);

/// Tree form of a query graph for the encoder: rooted at the question node,
/// every triple appearing exactly once as an edge. Revisited nodes are
/// duplicated and the duplicates become leaves.
struct EncodingTree {
  struct Node {
    std::string graph_node;
    int parent_triple = -1;  // triple linking this node to its parent; -1 at root
    std::vector<int> children;
    bool duplicate = false;
  };
  std::vector<Node> nodes;  // nodes[0] is the root (question node)
};

/// Deterministic level-order expansion from the question node; at each node
/// the incident unused triples are consumed in ascending index order.
EncodingTree to_encoding_tree(const QueryGraph& g);

}  // namespace cqg
