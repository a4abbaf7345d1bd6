#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cqg/sample.hpp"
#include "cqg/vocab.hpp"

namespace cqg {

/// Lowercase + whitespace tokenization with punctuation and trailing 's
/// split off as their own tokens.
std::vector<std::string> tokenize(const std::string& text);

/// Replace entity surface names in a raw question with placeholder tokens.
/// Entities are tried longest name first; each match is the longest common
/// contiguous token span (earliest in the question on ties). Index -1 gives
/// the unindexed placeholder used in sub-questions. Unmatched entities leave
/// the question unchanged and are reported through warnings.
TokenSequence replace_entities(const std::string& question,
                               const std::vector<std::pair<int, std::string>>& entities,
                               std::vector<std::string>* warnings = nullptr);

/// Sort triples into the canonical order (by structural signature, stable):
/// placeholder index k refers to the k-th canonical triple.
void canonicalize_graph(QueryGraph& g);

/// Bucketing key invariant under node renaming (equal for equivalent graphs
/// once both are canonical).
std::string graph_signature(const QueryGraph& g);

struct GroupItem {
  QueryGraph graph;  // canonical
  TokenSequence question;
  std::optional<TokenSequence> subquestion;
};

/// Merge items whose graphs are equivalent up to renaming (entities ignored)
/// into multi-reference samples; references keep first-appearance order and
/// placeholder indices are remapped onto the representative graph.
std::vector<Sample> group_samples(const std::vector<GroupItem>& items);

struct SplitResult {
  std::vector<Sample> train, dev, test;
};

/// Seeded shuffle, then floor(train), floor(dev), remainder test.
SplitResult split_dataset(const std::vector<Sample>& samples, const SplitSpec& spec);

// JSONL corpus files: one sample object per line, unknown fields rejected.
std::vector<Sample> load_samples_jsonl(const std::string& path);
void save_samples_jsonl(const std::string& path, const std::vector<Sample>& samples);

/// Raw pipeline input: a graph plus an unprocessed question, optionally with
/// its corresponding sub-question.
struct RawItem {
  QueryGraph graph;
  std::string question;
  std::optional<QueryGraph> sub_graph;
  std::optional<std::string> sub_question;
};

std::vector<RawItem> load_raw_jsonl(const std::string& path);

/// Full pipeline over raw complex items and an optional raw simple-question
/// corpus: entity replacement, grouping, pseudo-pool resolution.
struct PreprocessResult {
  std::vector<Sample> samples;         // grouped complex samples
  std::vector<Sample> simple_corpus;   // one-reference simple samples
  std::vector<std::string> warnings;
};
PreprocessResult preprocess_corpus(const std::vector<RawItem>& complex_items,
                                   const std::vector<RawItem>& simple_items);

}  // namespace cqg
