#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "confusion_lens/span.hpp"

namespace confusion_lens::java {

enum class TokenKind {
  identifier,
  keyword,
  literal,    // numeric, string, char, text block
  op,         // operators, including ? : and ->
  separator,  // ( ) { } [ ] ; , . ... @ ::
  whitespace,
  comment,
  unknown,
  end,
};

struct Token {
  TokenKind kind = TokenKind::end;
  CharSpan span;
  std::string text;
  // For literals: the tree-sitter style node kind, e.g. "hex_integer_literal".
  std::string literal_kind;
};

bool is_keyword(std::string_view word);
bool is_primitive_type(std::string_view word);

/// Lexes Java source with maximal munch. With `keep_trivia`, whitespace and
/// comments are returned too, so the tokens partition the source. Never
/// throws: unrecognised bytes become `unknown` tokens and unterminated
/// literals or comments run to the end of their line or the input.
std::vector<Token> lex(std::string_view source, bool keep_trivia = false);

/// Node kind for a numeric literal such as "0b1100" -> "binary_integer_literal";
/// empty when `text` is not numeric.
std::string numeric_literal_kind(std::string_view text);

}  // namespace confusion_lens::java
