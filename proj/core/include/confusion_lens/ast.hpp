#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confusion_lens/error.hpp"
#include "confusion_lens/span.hpp"

namespace confusion_lens {

struct AstNode {
  std::string kind;  // tree-sitter style: "binary_expression", ";", "int", ...
  CharSpan span;
  bool named = true;  // false for punctuation/keyword/operator leaves
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
};

/// Parsed syntax tree. Child spans nest inside their parent's span; the
/// root spans the whole source.
class Ast {
 public:
  Ast(std::string source, std::vector<AstNode> nodes, std::size_t root);

  std::string_view source() const { return source_; }
  std::size_t root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  const AstNode& node(std::size_t id) const { return nodes_.at(id); }
  const std::vector<AstNode>& nodes() const { return nodes_; }
  std::size_t depth(std::size_t id) const;
  std::string_view text(std::size_t id) const;

  /// S-expression of named nodes, e.g. "(program (expression_statement ...))".
  std::string to_sexp() const;

 private:
  std::string source_;
  std::vector<AstNode> nodes_;
  std::size_t root_;
};

struct AstNodeRef {
  std::size_t id = 0;
  std::string kind;
  CharSpan span;
  std::optional<std::size_t> parent;
};

/// The tightest node whose span contains `span`; on equal spans the deeper
/// node wins. Throws DataError when `span` is not within the source.
AstNodeRef covering_node(const Ast& ast, CharSpan span);

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : DataError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

namespace java {

/// Parses a compilation unit, a bare member list, or a statement sequence
/// (the usual shape of code snippets). Throws ParseError.
Ast parse(std::string_view source);

}  // namespace java

}  // namespace confusion_lens
