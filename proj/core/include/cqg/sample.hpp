#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cqg/graph.hpp"
#include "cqg/tokens.hpp"

namespace cqg {

/// One training/evaluation unit: a placeholder-normalized query graph with
/// all of its reference questions, the corresponding sub-question when known,
/// and indices of pseudo sub-questions in the simple-question corpus.
struct Sample {
  QueryGraph graph;  // triples in canonical order; placeholders index them
  std::vector<TokenSequence> references;
  std::optional<TokenSequence> subquestion;
  std::vector<std::size_t> pseudo_pool_ids;
};

struct SplitSpec {
  double train = 0.7;
  double dev = 0.15;
  double test = 0.15;
  std::uint64_t seed = 13;
};

}  // namespace cqg
