#include "cqg/tokens.hpp"

#include <cctype>

namespace cqg {

std::string Token::text() const {
  if (kind == Kind::Word) return word;
  if (ph_index < 0) return "PH";
  return "PH" + std::to_string(ph_index);
}

Token token_from_text(const std::string& text) {
  if (text.size() >= 2 && text[0] == 'P' && text[1] == 'H') {
    bool digits = true;
    for (std::size_t i = 2; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
        digits = false;
        break;
      }
    }
    if (digits) {
      if (text.size() == 2) return Token::make_placeholder(-1);
      return Token::make_placeholder(std::stoi(text.substr(2)));
    }
  }
  return Token::make_word(text);
}

std::string tokens_to_text(const TokenSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += seq[i].text();
  }
  return out;
}

TokenSequence tokens_from_texts(const std::vector<std::string>& texts) {
  TokenSequence out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(token_from_text(t));
  return out;
}

TokenSequence strip_placeholder_indices(const TokenSequence& seq) {
  TokenSequence out = seq;
  for (Token& t : out) {
    if (t.is_placeholder()) t.ph_index = -1;
  }
  return out;
}

}  // namespace cqg
