#pragma once

#include <cstdint>

#include "cqg/sample.hpp"

namespace cqg {

struct SyntheticCorpus {
  std::vector<Sample> samples;        // complex samples with sub-questions + pools
  std::vector<Sample> simple_corpus;  // single-triple questions
};

/// Template-generated desk-scale corpus. Every complex sample has 2-4
/// triples, at least one grounded entity, a true sub-question in the simple
/// corpus and at least three pseudo sub-questions. Deterministic per seed.
SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n_graphs,
                                          std::size_t predicate_vocab_size = 8);

}  // namespace cqg
