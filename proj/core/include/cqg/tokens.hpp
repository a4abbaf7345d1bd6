#pragma once

#include <string>
#include <vector>

namespace cqg {

/// One question token: either a vocabulary word or an entity placeholder.
/// Placeholder index -1 means an unindexed placeholder ("PH"), the form used
/// inside sub-questions.
struct Token {
  enum class Kind { Word, Placeholder };
  Kind kind = Kind::Word;
  std::string word;
  int ph_index = -1;

  static Token make_word(std::string w) { return {Kind::Word, std::move(w), -1}; }
  static Token make_placeholder(int index) { return {Kind::Placeholder, {}, index}; }

  bool is_placeholder() const { return kind == Kind::Placeholder; }
  /// Serialized form: the word itself, "PH" or "PH<k>".
  std::string text() const;

  bool operator==(const Token& o) const {
    return kind == o.kind && word == o.word && ph_index == o.ph_index;
  }
};

using TokenSequence = std::vector<Token>;

/// Parse a serialized token ("PH", "PH3" or a word).
Token token_from_text(const std::string& text);

std::string tokens_to_text(const TokenSequence& seq);
TokenSequence tokens_from_texts(const std::vector<std::string>& texts);

/// Copy with every placeholder index dropped (sub-question form).
TokenSequence strip_placeholder_indices(const TokenSequence& seq);

}  // namespace cqg
