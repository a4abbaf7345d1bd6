#include "cqg/vocab.hpp"

#include "cqg/errors.hpp"

namespace cqg {

Vocabulary::Vocabulary() {
  for (const char* w : {"<bos>", "<eos>", "<unk>", "<d>", "<ph>"}) {
    words_.emplace_back(w);
    index_.emplace(w, words_.size() - 1);
  }
}

std::size_t Vocabulary::add(const std::string& word) {
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  words_.push_back(word);
  index_.emplace(word, words_.size() - 1);
  return words_.size() - 1;
}

std::size_t Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& word) const { return index_.count(word) > 0; }

const std::string& Vocabulary::word(std::size_t id) const {
  if (id >= words_.size()) throw IndexError("vocabulary id out of range");
  return words_[id];
}

std::vector<std::string> Vocabulary::user_words() const {
  return std::vector<std::string>(words_.begin() + 5, words_.end());
}

Vocabulary Vocabulary::from_user_words(const std::vector<std::string>& words) {
  Vocabulary v;
  for (const std::string& w : words) v.add(w);
  return v;
}

SymbolTable::SymbolTable() {
  symbols_.emplace_back("<unk>");
  index_.emplace("<unk>", 0);
}

std::size_t SymbolTable::add(const std::string& symbol) {
  auto it = index_.find(symbol);
  if (it != index_.end()) return it->second;
  symbols_.push_back(symbol);
  index_.emplace(symbol, symbols_.size() - 1);
  return symbols_.size() - 1;
}

std::size_t SymbolTable::id(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& SymbolTable::symbol(std::size_t id) const {
  if (id >= symbols_.size()) throw IndexError("symbol id out of range");
  return symbols_[id];
}

std::vector<std::string> SymbolTable::user_symbols() const {
  return std::vector<std::string>(symbols_.begin() + 1, symbols_.end());
}

SymbolTable SymbolTable::from_user_symbols(const std::vector<std::string>& symbols) {
  SymbolTable t;
  for (const std::string& s : symbols) t.add(s);
  return t;
}

}  // namespace cqg
