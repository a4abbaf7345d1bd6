#pragma once

#include <map>
#include <string>
#include <vector>

namespace cqg {

/// Word vocabulary with fixed reserved slots. Ids are assigned in insertion
/// order, so building from the same corpus in the same order is
/// deterministic.
class Vocabulary {
public:
  static constexpr std::size_t kBos = 0;
  static constexpr std::size_t kEos = 1;
  static constexpr std::size_t kUnk = 2;
  static constexpr std::size_t kDelim = 3;
  static constexpr std::size_t kPh = 4;

  Vocabulary();

  std::size_t add(const std::string& word);
  std::size_t id(const std::string& word) const;  // kUnk when absent
  bool contains(const std::string& word) const;
  const std::string& word(std::size_t id) const;
  std::size_t size() const { return words_.size(); }
  /// Words beyond the reserved slots, in id order.
  std::vector<std::string> user_words() const;
  static Vocabulary from_user_words(const std::vector<std::string>& words);

private:
  std::vector<std::string> words_;
  std::map<std::string, std::size_t> index_;
};

/// Symbol table for predicates and entity types; slot 0 is the unknown
/// symbol.
class SymbolTable {
public:
  static constexpr std::size_t kUnk = 0;

  SymbolTable();
  std::size_t add(const std::string& symbol);
  std::size_t id(const std::string& symbol) const;  // kUnk when absent
  const std::string& symbol(std::size_t id) const;
  std::size_t size() const { return symbols_.size(); }
  std::vector<std::string> user_symbols() const;
  static SymbolTable from_user_symbols(const std::vector<std::string>& symbols);

private:
  std::vector<std::string> symbols_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace cqg
