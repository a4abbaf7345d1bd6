#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cqg/graph.hpp"

namespace cqg {

/// True iff g_sub's triple set is a strict subset of g's up to an injective
/// renaming of g_sub's non-terminal nodes; terminal nodes must match by
/// entity identity and predicates exactly.
bool is_subquestion(const QueryGraph& g_sub, const QueryGraph& g);

/// True iff g_sub is not a sub-question of g but every predicate of g_sub
/// appears in g (forward predicate ids, direction ignored).
bool is_pseudo_subquestion(const QueryGraph& g_sub, const QueryGraph& g);

/// Corpus questions whose graph is a pseudo sub-question of g, in corpus
/// order.
std::vector<TokenSequence> find_pseudo_pool(
    const QueryGraph& g,
    const std::vector<std::pair<QueryGraph, TokenSequence>>& corpus);

/// Index variant of find_pseudo_pool.
std::vector<std::size_t> find_pseudo_pool_ids(const QueryGraph& g,
                                              const std::vector<QueryGraph>& corpus);

/// Structural equivalence for grouping placeholder-normalized graphs: a node
/// bijection preserving roles, entity types and type names under which the
/// triple sets (predicate, names, direction, groundedness) correspond; the
/// grounded entities themselves are ignored. Returns the triple mapping
/// a-index -> b-index when equivalent.
std::optional<std::vector<std::size_t>> find_equivalence(const QueryGraph& a,
                                                         const QueryGraph& b);

}  // namespace cqg
