#include "confusion_lens/java_lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace confusion_lens::java {

namespace {

constexpr std::array<std::string_view, 53> kKeywords = {
    "abstract", "assert",     "boolean",   "break",     "byte",         "case",
    "catch",    "char",       "class",     "const",     "continue",     "default",
    "do",       "double",     "else",      "enum",      "extends",      "final",
    "finally",  "float",      "for",       "goto",      "if",           "implements",
    "import",   "instanceof", "int",       "interface", "long",         "native",
    "new",      "package",    "private",   "protected", "public",       "return",
    "short",    "static",     "strictfp",  "super",     "switch",       "synchronized",
    "this",     "throw",      "throws",    "transient", "try",          "void",
    "volatile", "while",      "true",      "false",     "null"};

// Longest first so maximal munch is a linear scan.
constexpr std::array<std::string_view, 49> kPunctuators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=",
    "<=",   ">=",  "+=",  "-=",  "*=",  "/=", "&=", "|=", "^=", "%=", "<<", ">>", "=",
    ">",    "<",   "!",   "~",   "?",   ":",  "+",  "-",  "*",  "/",  "&",  "|",  "^",
    "%",    "@",   "(",   ")",   "{",   "}",  "[",  "]",  ";",  ","};

bool is_separator(std::string_view p) {
  return p == "(" || p == ")" || p == "{" || p == "}" || p == "[" || p == "]" || p == ";" ||
         p == "," || p == "." || p == "..." || p == "@" || p == "::";
}

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}
bool is_ident_part(unsigned char c) { return is_ident_start(c) || std::isdigit(c); }

bool is_hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Scans a numeric literal starting at `i`; returns its end.
std::size_t scan_number(std::string_view s, std::size_t i) {
  const std::size_t n = s.size();
  auto digits = [&](auto pred) {
    while (i < n && (pred(s[i]) || s[i] == '_')) ++i;
  };
  if (s[i] == '0' && i + 1 < n && (s[i + 1] == 'x' || s[i + 1] == 'X')) {
    i += 2;
    digits(is_hex);
    if (i < n && s[i] == '.') {
      ++i;
      digits(is_hex);
    }
    if (i < n && (s[i] == 'p' || s[i] == 'P')) {
      ++i;
      if (i < n && (s[i] == '+' || s[i] == '-')) ++i;
      digits(is_digit);
      if (i < n && std::string_view("fFdD").find(s[i]) != std::string_view::npos) ++i;
    } else if (i < n && (s[i] == 'l' || s[i] == 'L')) {
      ++i;
    }
    return i;
  }
  if (s[i] == '0' && i + 1 < n && (s[i + 1] == 'b' || s[i + 1] == 'B')) {
    i += 2;
    digits([](char c) { return c == '0' || c == '1'; });
    if (i < n && (s[i] == 'l' || s[i] == 'L')) ++i;
    return i;
  }
  digits(is_digit);
  if (i < n && s[i] == '.' && !(i + 1 < n && s[i + 1] == '.') &&
      !(i + 1 < n && is_ident_start(static_cast<unsigned char>(s[i + 1])) &&
        std::string_view("eEfFdD").find(s[i + 1]) == std::string_view::npos)) {
    ++i;
    digits(is_digit);
  }
  if (i < n && (s[i] == 'e' || s[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < n && (s[j] == '+' || s[j] == '-')) ++j;
    if (j < n && is_digit(s[j])) {
      i = j;
      digits(is_digit);
    }
  }
  if (i < n && std::string_view("fFdDlL").find(s[i]) != std::string_view::npos) ++i;
  return i;
}

std::size_t scan_quoted(std::string_view s, std::size_t i, char quote) {
  ++i;
  while (i < s.size() && s[i] != quote && s[i] != '\n') {
    if (s[i] == '\\' && i + 1 < s.size()) ++i;
    ++i;
  }
  return i < s.size() && s[i] == quote ? i + 1 : i;
}

}  // namespace

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

bool is_primitive_type(std::string_view word) {
  return word == "byte" || word == "short" || word == "int" || word == "long" ||
         word == "char" || word == "float" || word == "double" || word == "boolean";
}

std::string numeric_literal_kind(std::string_view t) {
  if (t.empty() || !(is_digit(t[0]) || (t[0] == '.' && t.size() > 1 && is_digit(t[1])))) {
    return {};
  }
  if (scan_number(t, 0) != t.size()) return {};
  const bool hex = t.size() > 1 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X');
  const bool bin = t.size() > 1 && t[0] == '0' && (t[1] == 'b' || t[1] == 'B');
  if (hex) {
    const bool is_float = t.find_first_of("pP.") != std::string_view::npos;
    return is_float ? "hex_floating_point_literal" : "hex_integer_literal";
  }
  if (bin) return "binary_integer_literal";
  const char last = t.back();
  const bool is_float = t.find_first_of(".eE") != std::string_view::npos ||
                        last == 'f' || last == 'F' || last == 'd' || last == 'D';
  if (is_float) return "decimal_floating_point_literal";
  std::string_view body = t;
  if (last == 'l' || last == 'L') body.remove_suffix(1);
  if (body.size() > 1 && body[0] == '0') return "octal_integer_literal";
  return "decimal_integer_literal";
}

std::vector<Token> lex(std::string_view s, bool keep_trivia) {
  std::vector<Token> out;
  const std::size_t n = s.size();
  std::size_t i = 0;
  auto emit = [&](TokenKind kind, std::size_t end, std::string literal_kind = {}) {
    if (keep_trivia || (kind != TokenKind::whitespace && kind != TokenKind::comment)) {
      out.push_back({kind, {i, end}, std::string(s.substr(i, end - i)), std::move(literal_kind)});
    }
    i = end;
  };

  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      std::size_t j = i;
      while (j < n && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      emit(TokenKind::whitespace, j);
    } else if (s.substr(i, 2) == "//") {
      std::size_t j = s.find('\n', i);
      emit(TokenKind::comment, j == std::string_view::npos ? n : j);
    } else if (s.substr(i, 2) == "/*") {
      std::size_t j = s.find("*/", i + 2);
      emit(TokenKind::comment, j == std::string_view::npos ? n : j + 2);
    } else if (s.substr(i, 3) == "\"\"\"") {
      std::size_t j = s.find("\"\"\"", i + 3);
      emit(TokenKind::literal, j == std::string_view::npos ? n : j + 3, "string_literal");
    } else if (c == '"') {
      emit(TokenKind::literal, scan_quoted(s, i, '"'), "string_literal");
    } else if (c == '\'') {
      emit(TokenKind::literal, scan_quoted(s, i, '\''), "character_literal");
    } else if (is_digit(static_cast<char>(c)) || (c == '.' && i + 1 < n && is_digit(s[i + 1]))) {
      const std::size_t end = scan_number(s, i);
      emit(TokenKind::literal, end, numeric_literal_kind(s.substr(i, end - i)));
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < n && is_ident_part(static_cast<unsigned char>(s[j]))) ++j;
      const std::string_view word = s.substr(i, j - i);
      if (word == "true" || word == "false") {
        emit(TokenKind::literal, j, std::string(word));
      } else if (word == "null") {
        emit(TokenKind::literal, j, "null_literal");
      } else {
        emit(is_keyword(word) ? TokenKind::keyword : TokenKind::identifier, j);
      }
    } else if (s.substr(i, 3) == "...") {
      emit(TokenKind::separator, i + 3);
    } else if (c == '.') {
      emit(TokenKind::separator, i + 1);
    } else {
      bool matched = false;
      for (const std::string_view p : kPunctuators) {
        if (s.substr(i, p.size()) == p) {
          emit(is_separator(p) ? TokenKind::separator : TokenKind::op, i + p.size());
          matched = true;
          break;
        }
      }
      if (!matched) {
        std::size_t j = i + 1;
        while (j < n && (static_cast<unsigned char>(s[j]) & 0xC0) == 0x80) ++j;
        emit(TokenKind::unknown, j);
      }
    }
  }
  return out;
}

}  // namespace confusion_lens::java
