#include "confusion_lens/ast.hpp"

#include <functional>

namespace confusion_lens {

Ast::Ast(std::string source, std::vector<AstNode> nodes, std::size_t root)
    : source_(std::move(source)), nodes_(std::move(nodes)), root_(root) {
  for (auto& n : nodes_) n.parent.reset();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const std::size_t child : nodes_[i].children) nodes_[child].parent = i;
  }
}

std::size_t Ast::depth(std::size_t id) const {
  std::size_t d = 0;
  for (auto p = nodes_.at(id).parent; p; p = nodes_[*p].parent) ++d;
  return d;
}

std::string_view Ast::text(std::size_t id) const {
  const CharSpan s = nodes_.at(id).span;
  return std::string_view(source_).substr(s.start, s.length());
}

std::string Ast::to_sexp() const {
  std::string out;
  std::function<void(std::size_t)> visit = [&](std::size_t id) {
    const AstNode& n = nodes_[id];
    out += "(" + n.kind;
    for (const std::size_t c : n.children) {
      if (!nodes_[c].named) continue;
      out += ' ';
      visit(c);
    }
    out += ")";
  };
  visit(root_);
  return out;
}

AstNodeRef covering_node(const Ast& ast, CharSpan span) {
  if (span.end > ast.source().size() || span.start > span.end) {
    throw DataError("span [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                    ") outside the parsed source");
  }
  // Spans nest, so descending while a child still contains the region ends
  // at the tightest container; a child with an equal span is preferred.
  std::size_t current = ast.root();
  bool descended = true;
  while (descended) {
    descended = false;
    for (const std::size_t child : ast.node(current).children) {
      if (ast.node(child).span.contains(span)) {
        current = child;
        descended = true;
        break;
      }
    }
  }
  const AstNode& n = ast.node(current);
  return {current, n.kind, n.span, n.parent};
}

}  // namespace confusion_lens
