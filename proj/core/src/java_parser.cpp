// Recursive-descent parser for the Java subset found in comprehension
// snippets. Node kinds follow the tree-sitter-java grammar so that category
// mapping tables written against it apply unchanged. The parser is lenient
// in one respect: any expression may stand as a statement ("12 & 3;").

#include <algorithm>
#include <array>

#include "confusion_lens/ast.hpp"
#include "confusion_lens/java_lexer.hpp"

namespace confusion_lens::java {

namespace {

using Id = std::size_t;

constexpr std::array<std::string_view, 12> kModifierKeywords = {
    "public", "protected", "private",   "static",    "final",    "abstract",
    "native", "strictfp",  "transient", "volatile", "synchronized", "default"};

constexpr std::array<std::string_view, 12> kAssignmentOps = {
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="};

int binary_precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "^") return 4;
  if (op == "&") return 5;
  if (op == "==" || op == "!=") return 6;
  if (op == "<" || op == ">" || op == "<=" || op == ">=" || op == "instanceof") return 7;
  if (op == "<<" || op == ">>" || op == ">>>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  return 0;
}

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source), tokens_(lex(source)) {
    Token end;
    end.kind = TokenKind::end;
    end.span = {source.size(), source.size()};
    tokens_.push_back(end);
  }

  Ast run() {
    std::vector<Id> children;
    while (!at_end()) children.push_back(top_level());
    AstNode root;
    root.kind = "program";
    root.span = {0, source_.size()};
    root.children = std::move(children);
    nodes_.push_back(std::move(root));
    const Id root_id = nodes_.size() - 1;
    return Ast(std::string(source_), std::move(nodes_), root_id);
  }

 private:
  struct Mark {
    std::size_t pos;
    std::size_t nodes;
    std::size_t history;
  };

  // ---- token access -------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    return tokens_[std::min(pos_ + k, tokens_.size() - 1)];
  }
  bool at_end() const { return peek().kind == TokenKind::end; }
  static bool is_punct_or_keyword(const Token& t) {
    return t.kind == TokenKind::op || t.kind == TokenKind::separator ||
           t.kind == TokenKind::keyword;
  }
  bool at(std::string_view text, std::size_t k = 0) const {
    const Token& t = peek(k);
    return is_punct_or_keyword(t) && t.text == text;
  }
  bool at_identifier(std::size_t k = 0) const { return peek(k).kind == TokenKind::identifier; }
  bool at_modifier(std::size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind == TokenKind::keyword &&
           std::find(kModifierKeywords.begin(), kModifierKeywords.end(), t.text) !=
               kModifierKeywords.end();
  }
  bool at_primitive(std::size_t k = 0) const {
    return peek(k).kind == TokenKind::keyword && is_primitive_type(peek(k).text);
  }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < t.span.start && i < source_.size(); ++i) {
      if (source_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    const std::string found = t.kind == TokenKind::end ? "end of input" : "\"" + t.text + "\"";
    throw ParseError(line, column, message + ", found " + found);
  }

  Mark mark() const { return {pos_, nodes_.size(), history_.size()}; }
  void reset(const Mark& m) {
    pos_ = m.pos;
    nodes_.resize(m.nodes);
    if (history_.size() > m.history) {
      tokens_ = std::move(history_[m.history]);
      history_.resize(m.history);
    }
  }

  // Runs `fn` speculatively; always rewinds. Returns whether it succeeded.
  template <typename Fn>
  bool lookahead(Fn&& fn) {
    const Mark m = mark();
    bool ok = false;
    try {
      ok = fn();
    } catch (const ParseError&) {
      ok = false;
    }
    reset(m);
    return ok;
  }

  // ---- node construction --------------------------------------------------

  Id leaf(std::string kind, bool named) {
    if (at_end()) fail("unexpected end of input");
    if (peek().kind == TokenKind::unknown) fail("unexpected character");
    AstNode n;
    n.kind = std::move(kind);
    n.span = peek().span;
    n.named = named;
    nodes_.push_back(std::move(n));
    ++pos_;
    return nodes_.size() - 1;
  }
  // Anonymous leaf whose kind is its own text.
  Id token() { return leaf(peek().text, false); }

  Id expect(std::string_view text) {
    if (!at(text)) fail("expected \"" + std::string(text) + "\"");
    return token();
  }
  Id identifier() {
    if (!at_identifier()) fail("expected identifier");
    return leaf("identifier", true);
  }

  Id make(std::string kind, std::vector<Id> children) {
    AstNode n;
    n.kind = std::move(kind);
    n.span = {nodes_[children.front()].span.start, nodes_[children.back()].span.end};
    n.children = std::move(children);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  // Consumes one ">" closing a type argument list, splitting ">>", ">>>"
  // and friends when generics nest.
  Id close_angle() {
    const Token& t = peek();
    if (t.kind == TokenKind::op && t.text.size() > 1 && t.text[0] == '>') {
      history_.push_back(tokens_);
      Token first = t;
      Token rest = t;
      first.text = ">";
      first.span.end = first.span.start + 1;
      rest.text = t.text.substr(1);
      rest.span.start += 1;
      tokens_[pos_] = first;
      tokens_.insert(tokens_.begin() + static_cast<std::ptrdiff_t>(pos_) + 1, rest);
    }
    return expect(">");
  }

  // ---- declarations -------------------------------------------------------

  bool type_declaration_ahead() const {
    std::size_t k = 0;
    while (true) {
      if (at_modifier(k) && !at("default", k)) {
        ++k;
      } else if (at("@", k) && !at("interface", k + 1)) {
        k += 2;
        while (at(".", k) && peek(k + 1).kind == TokenKind::identifier) k += 2;
        if (at("(", k)) {
          int depth = 0;
          do {
            if (at("(", k)) ++depth;
            if (at(")", k)) --depth;
            ++k;
          } while (depth > 0 && peek(k).kind != TokenKind::end);
        }
      } else {
        break;
      }
    }
    return at("class", k) || at("interface", k) || at("enum", k) ||
           (at("@", k) && at("interface", k + 1));
  }

  bool method_ahead() {
    return lookahead([this] {
      if (at_modifier() || at("@")) modifiers();
      if (at("<")) type_parameters();
      if (at("void")) {
        token();
      } else {
        type();
      }
      return at_identifier() && at("(", 1);
    });
  }

  Id top_level() {
    if (at("package")) {
      std::vector<Id> c{token()};
      c.push_back(qualified_name());
      c.push_back(expect(";"));
      return make("package_declaration", std::move(c));
    }
    if (at("import")) {
      std::vector<Id> c{token()};
      if (at("static")) c.push_back(token());
      c.push_back(qualified_name());
      if (at(".") && at("*", 1)) {
        c.push_back(token());
        c.push_back(leaf("asterisk", true));
      }
      c.push_back(expect(";"));
      return make("import_declaration", std::move(c));
    }
    if (type_declaration_ahead()) return type_declaration();
    if (method_ahead()) return member();
    if (local_variable_declaration_ahead()) return local_variable_declaration();
    return statement();
  }

  Id qualified_name() {
    Id name = identifier();
    while (at(".") && at_identifier(1)) {
      const Id dot = token();
      name = make("scoped_identifier", {name, dot, identifier()});
    }
    return name;
  }

  Id annotation() {
    std::vector<Id> c{expect("@")};
    c.push_back(qualified_name());
    if (!at("(")) return make("marker_annotation", std::move(c));
    std::vector<Id> args{token()};
    while (!at(")")) {
      if (at_identifier() && at("=", 1)) {
        const Id key = identifier();
        const Id eq = token();
        args.push_back(make("element_value_pair", {key, eq, element_value()}));
      } else {
        args.push_back(element_value());
      }
      if (!at(")")) args.push_back(expect(","));
    }
    args.push_back(expect(")"));
    c.push_back(make("annotation_argument_list", std::move(args)));
    return make("annotation", std::move(c));
  }

  Id element_value() {
    if (at("@")) return annotation();
    if (at("{")) return array_initializer("element_value_array_initializer");
    return ternary();
  }

  Id modifiers() {
    std::vector<Id> c;
    while (true) {
      if (at("@") && !at("interface", 1)) {
        c.push_back(annotation());
      } else if (at_modifier() && !(at("default") && (at(":", 1) || at("->", 1)))) {
        c.push_back(token());
      } else {
        break;
      }
    }
    if (c.empty()) fail("expected modifier");
    return make("modifiers", std::move(c));
  }

  Id type_parameters() {
    std::vector<Id> c{expect("<")};
    while (true) {
      std::vector<Id> p;
      while (at("@")) p.push_back(annotation());
      p.push_back(leaf("type_identifier", true));
      if (at("extends")) {
        std::vector<Id> bound{token(), type()};
        while (at("&")) {
          bound.push_back(token());
          bound.push_back(type());
        }
        p.push_back(make("type_bound", std::move(bound)));
      }
      c.push_back(make("type_parameter", std::move(p)));
      if (!at(",")) break;
      c.push_back(token());
    }
    c.push_back(close_angle());
    return make("type_parameters", std::move(c));
  }

  Id type_list(std::string kind, Id keyword) {
    std::vector<Id> c{keyword, type()};
    while (at(",")) {
      c.push_back(token());
      c.push_back(type());
    }
    return make(std::move(kind), std::move(c));
  }

  Id type_declaration() {
    std::vector<Id> c;
    if (at_modifier() || (at("@") && !at("interface", 1))) c.push_back(modifiers());
    if (at("class")) {
      c.push_back(token());
      c.push_back(identifier());
      if (at("<")) c.push_back(type_parameters());
      if (at("extends")) {
        const Id kw = token();
        c.push_back(make("superclass", {kw, type()}));
      }
      if (at("implements")) c.push_back(type_list("super_interfaces", token()));
      c.push_back(class_body("class_body"));
      return make("class_declaration", std::move(c));
    }
    if (at("interface")) {
      c.push_back(token());
      c.push_back(identifier());
      if (at("<")) c.push_back(type_parameters());
      if (at("extends")) c.push_back(type_list("extends_interfaces", token()));
      c.push_back(class_body("interface_body"));
      return make("interface_declaration", std::move(c));
    }
    if (at("enum")) {
      c.push_back(token());
      c.push_back(identifier());
      if (at("implements")) c.push_back(type_list("super_interfaces", token()));
      c.push_back(enum_body());
      return make("enum_declaration", std::move(c));
    }
    if (at("@") && at("interface", 1)) {
      c.push_back(token());
      c.push_back(token());
      c.push_back(identifier());
      c.push_back(class_body("annotation_type_body"));
      return make("annotation_type_declaration", std::move(c));
    }
    fail("expected class, interface or enum");
  }

  Id enum_body() {
    std::vector<Id> c{expect("{")};
    while (!at(";") && !at("}")) {
      std::vector<Id> constant;
      if (at("@")) constant.push_back(modifiers());
      constant.push_back(identifier());
      if (at("(")) constant.push_back(argument_list());
      if (at("{")) constant.push_back(class_body("class_body"));
      c.push_back(make("enum_constant", std::move(constant)));
      if (!at(",")) break;
      c.push_back(token());
    }
    if (at(";")) {
      std::vector<Id> decls{token()};
      while (!at("}")) decls.push_back(member());
      c.push_back(make("enum_body_declarations", std::move(decls)));
    }
    c.push_back(expect("}"));
    return make("enum_body", std::move(c));
  }

  Id class_body(std::string kind) {
    std::vector<Id> c{expect("{")};
    while (!at("}")) {
      if (at_end()) fail("unterminated class body");
      c.push_back(member());
    }
    c.push_back(expect("}"));
    return make(std::move(kind), std::move(c));
  }

  Id member() {
    if (at(";")) return token();
    if (at("{")) return block();
    if (at("static") && at("{", 1)) {
      const Id kw = token();
      return make("static_initializer", {kw, block()});
    }
    if (type_declaration_ahead()) return type_declaration();

    std::vector<Id> c;
    if (at_modifier() || at("@")) c.push_back(modifiers());
    if (at("<")) c.push_back(type_parameters());
    if (at_identifier() && at("(", 1)) {
      c.push_back(identifier());
      c.push_back(formal_parameters());
      if (at("throws")) c.push_back(type_list("throws", token()));
      c.push_back(block("constructor_body"));
      return make("constructor_declaration", std::move(c));
    }
    c.push_back(at("void") ? leaf("void_type", true) : type());
    if (at_identifier() && at("(", 1)) {
      c.push_back(identifier());
      c.push_back(formal_parameters());
      if (at("[")) c.push_back(dimensions());
      if (at("throws")) c.push_back(type_list("throws", token()));
      if (at(";")) {
        c.push_back(token());
      } else {
        c.push_back(block());
      }
      return make("method_declaration", std::move(c));
    }
    c.push_back(variable_declarator());
    while (at(",")) {
      c.push_back(token());
      c.push_back(variable_declarator());
    }
    c.push_back(expect(";"));
    return make("field_declaration", std::move(c));
  }

  Id formal_parameters() {
    std::vector<Id> c{expect("(")};
    while (!at(")")) {
      std::vector<Id> p;
      if (at_modifier() || at("@")) p.push_back(modifiers());
      p.push_back(type());
      if (at("...")) {
        p.push_back(token());
        p.push_back(variable_declarator_id());
        c.push_back(make("spread_parameter", std::move(p)));
      } else {
        p.push_back(identifier());
        if (at("[")) p.push_back(dimensions());
        c.push_back(make("formal_parameter", std::move(p)));
      }
      if (!at(")")) c.push_back(expect(","));
    }
    c.push_back(expect(")"));
    return make("formal_parameters", std::move(c));
  }

  Id variable_declarator_id() {
    const Id name = identifier();
    if (!at("[")) return make("variable_declarator", {name});
    return make("variable_declarator", {name, dimensions()});
  }

  Id variable_declarator() {
    std::vector<Id> c{identifier()};
    if (at("[")) c.push_back(dimensions());
    if (at("=")) {
      c.push_back(token());
      c.push_back(at("{") ? array_initializer("array_initializer") : expression());
    }
    return make("variable_declarator", std::move(c));
  }

  // ---- types ---------------------------------------------------------------

  Id dimensions() {
    std::vector<Id> c;
    while (at("[") && at("]", 1)) {
      c.push_back(token());
      c.push_back(token());
    }
    if (c.empty()) fail("expected \"[]\"");
    return make("dimensions", std::move(c));
  }

  Id primitive_type() {
    const std::string& word = peek().text;
    std::string kind = "integral_type";
    if (word == "float" || word == "double") kind = "floating_point_type";
    if (word == "boolean") kind = "boolean_type";
    const Id kw = token();
    return make(std::move(kind), {kw});
  }

  Id type_arguments() {
    std::vector<Id> c{expect("<")};
    while (!at(">") && !(peek().kind == TokenKind::op && peek().text.starts_with(">"))) {
      if (at("?")) {
        std::vector<Id> w{token()};
        if (at("extends") || at("super")) {
          w.push_back(token());
          w.push_back(type());
        }
        c.push_back(make("wildcard", std::move(w)));
      } else {
        c.push_back(type());
      }
      if (!at(",")) break;
      c.push_back(token());
    }
    c.push_back(close_angle());
    return make("type_arguments", std::move(c));
  }

  Id unannotated_class_type() {
    Id t = leaf("type_identifier", true);
    while (true) {
      if (at("<")) {
        t = make("generic_type", {t, type_arguments()});
      } else if (at(".") && at_identifier(1)) {
        const Id dot = token();
        t = make("scoped_type_identifier", {t, dot, leaf("type_identifier", true)});
      } else {
        return t;
      }
    }
  }

  // A type without trailing dimensions.
  Id element_type() {
    while (at("@")) annotation();
    if (at_primitive()) return primitive_type();
    if (at_identifier()) return unannotated_class_type();
    fail("expected type");
  }

  Id type() {
    const Id t = element_type();
    if (at("[") && at("]", 1)) return make("array_type", {t, dimensions()});
    return t;
  }

  // ---- statements ----------------------------------------------------------

  Id block(std::string kind = "block") {
    std::vector<Id> c{expect("{")};
    while (!at("}")) {
      if (at_end()) fail("unterminated block");
      c.push_back(block_statement());
    }
    c.push_back(expect("}"));
    return make(std::move(kind), std::move(c));
  }

  Id block_statement() {
    if (type_declaration_ahead()) return type_declaration();
    if (local_variable_declaration_ahead()) return local_variable_declaration();
    return statement();
  }

  bool local_variable_declaration_ahead() {
    if (at_primitive()) return !at(".", 1);
    if (!(at_identifier() || at("final") || at("@"))) return false;
    return lookahead([this] {
      if (at("final") || at("@")) modifiers();
      type();
      return at_identifier() &&
             (at("=", 1) || at(";", 1) || at(",", 1) || at("[", 1) || at(":", 1));
    });
  }

  Id local_variable_declaration() {
    std::vector<Id> c;
    if (at("final") || at("@")) c.push_back(modifiers());
    c.push_back(type());
    c.push_back(variable_declarator());
    while (at(",")) {
      c.push_back(token());
      c.push_back(variable_declarator());
    }
    c.push_back(expect(";"));
    return make("local_variable_declaration", std::move(c));
  }

  Id parenthesized() {
    const Id open = expect("(");
    const Id inner = expression();
    return make("parenthesized_expression", {open, inner, expect(")")});
  }

  Id statement() {
    const Token& t = peek();
    if (at_end()) fail("expected statement");
    if (at("{")) return block();
    if (at(";")) return token();
    if (t.kind == TokenKind::keyword) {
      const std::string word = t.text;
      if (word == "if") {
        std::vector<Id> c{token(), parenthesized(), statement()};
        if (at("else")) {
          c.push_back(token());
          c.push_back(statement());
        }
        return make("if_statement", std::move(c));
      }
      if (word == "while") {
        const Id kw = token();
        const Id cond = parenthesized();
        return make("while_statement", {kw, cond, statement()});
      }
      if (word == "do") {
        const Id kw = token();
        const Id body = statement();
        const Id w = expect("while");
        const Id cond = parenthesized();
        return make("do_statement", {kw, body, w, cond, expect(";")});
      }
      if (word == "for") return for_statement();
      if (word == "return" || word == "throw") {
        std::vector<Id> c{token()};
        if (!at(";")) c.push_back(expression());
        c.push_back(expect(";"));
        return make(word + "_statement", std::move(c));
      }
      if (word == "break" || word == "continue") {
        std::vector<Id> c{token()};
        if (at_identifier()) c.push_back(identifier());
        c.push_back(expect(";"));
        return make(word + "_statement", std::move(c));
      }
      if (word == "switch") return switch_expression();
      if (word == "try") return try_statement();
      if (word == "synchronized") {
        const Id kw = token();
        const Id lock = parenthesized();
        return make("synchronized_statement", {kw, lock, block()});
      }
      if (word == "assert") {
        std::vector<Id> c{token(), expression()};
        if (at(":")) {
          c.push_back(token());
          c.push_back(expression());
        }
        c.push_back(expect(";"));
        return make("assert_statement", std::move(c));
      }
    }
    if (at_identifier() && at(":", 1)) {
      const Id label = identifier();
      const Id colon = token();
      return make("labeled_statement", {label, colon, statement()});
    }
    if (at_identifier() && peek().text == "yield" && !at("=", 1) && !at("(", 1) &&
        !at(".", 1)) {
      const Id kw = leaf("yield", false);
      const Id value = expression();
      return make("yield_statement", {kw, value, expect(";")});
    }
    const Id e = expression();
    return make("expression_statement", {e, expect(";")});
  }

  Id for_statement() {
    std::vector<Id> c{expect("for"), expect("(")};
    const bool enhanced = lookahead([this] {
      if (at("final") || at("@")) modifiers();
      type();
      return at_identifier() && at(":", 1);
    });
    if (enhanced) {
      if (at("final") || at("@")) c.push_back(modifiers());
      c.push_back(type());
      c.push_back(identifier());
      c.push_back(expect(":"));
      c.push_back(expression());
      c.push_back(expect(")"));
      c.push_back(statement());
      return make("enhanced_for_statement", std::move(c));
    }
    if (at(";")) {
      c.push_back(token());
    } else if (local_variable_declaration_ahead()) {
      c.push_back(local_variable_declaration());
    } else {
      c.push_back(expression());
      while (at(",")) {
        c.push_back(token());
        c.push_back(expression());
      }
      c.push_back(expect(";"));
    }
    if (!at(";")) c.push_back(expression());
    c.push_back(expect(";"));
    while (!at(")")) {
      c.push_back(expression());
      if (!at(")")) c.push_back(expect(","));
    }
    c.push_back(expect(")"));
    c.push_back(statement());
    return make("for_statement", std::move(c));
  }

  Id switch_label() {
    if (at("default")) return make("switch_label", {token()});
    std::vector<Id> c{expect("case"), ternary()};
    while (at(",")) {
      c.push_back(token());
      c.push_back(ternary());
    }
    return make("switch_label", std::move(c));
  }

  Id switch_expression() {
    const Id kw = expect("switch");
    const Id cond = parenthesized();
    std::vector<Id> body{expect("{")};
    while (!at("}")) {
      if (at_end()) fail("unterminated switch block");
      const Id label = switch_label();
      if (at("->")) {
        const Id arrow = token();
        Id target;
        if (at("{")) {
          target = block();
        } else if (at("throw")) {
          target = statement();
        } else {
          const Id e = expression();
          target = make("expression_statement", {e, expect(";")});
        }
        body.push_back(make("switch_rule", {label, arrow, target}));
        continue;
      }
      std::vector<Id> group{label, expect(":")};
      while (at("case") || at("default")) {
        group.push_back(switch_label());
        group.push_back(expect(":"));
      }
      while (!at("case") && !at("default") && !at("}")) {
        if (at_end()) fail("unterminated switch block");
        group.push_back(block_statement());
      }
      body.push_back(make("switch_block_statement_group", std::move(group)));
    }
    body.push_back(expect("}"));
    const Id switch_block = make("switch_block", std::move(body));
    return make("switch_expression", {kw, cond, switch_block});
  }

  Id try_statement() {
    std::vector<Id> c{expect("try")};
    bool resources = false;
    if (at("(")) {
      resources = true;
      std::vector<Id> spec{token()};
      while (!at(")")) {
        if (local_variable_declaration_ahead() || at("final")) {
          std::vector<Id> r;
          if (at("final") || at("@")) r.push_back(modifiers());
          r.push_back(type());
          r.push_back(identifier());
          r.push_back(expect("="));
          r.push_back(expression());
          spec.push_back(make("resource", std::move(r)));
        } else {
          spec.push_back(make("resource", {expression()}));
        }
        if (at(";")) spec.push_back(token());
      }
      spec.push_back(expect(")"));
      c.push_back(make("resource_specification", std::move(spec)));
    }
    c.push_back(block());
    while (at("catch")) {
      std::vector<Id> clause{token(), expect("(")};
      std::vector<Id> param;
      if (at("final") || at("@")) param.push_back(modifiers());
      std::vector<Id> types{type()};
      while (at("|")) {
        types.push_back(token());
        types.push_back(type());
      }
      param.push_back(make("catch_type", std::move(types)));
      param.push_back(identifier());
      clause.push_back(make("catch_formal_parameter", std::move(param)));
      clause.push_back(expect(")"));
      clause.push_back(block());
      c.push_back(make("catch_clause", std::move(clause)));
    }
    if (at("finally")) {
      const Id kw = token();
      c.push_back(make("finally_clause", {kw, block()}));
    }
    if (!resources && c.size() == 2) fail("expected catch or finally");
    return make(resources ? "try_with_resources_statement" : "try_statement", std::move(c));
  }

  // ---- expressions -----------------------------------------------------------

  Id expression() { return assignment(); }

  bool lambda_ahead() const {
    if (at_identifier() && at("->", 1)) return true;
    if (!at("(")) return false;
    int depth = 0;
    std::size_t k = 0;
    do {
      if (at("(", k)) ++depth;
      if (at(")", k)) --depth;
      if (peek(k).kind == TokenKind::end) return false;
      ++k;
    } while (depth > 0);
    return at("->", k);
  }

  Id lambda() {
    Id params;
    if (at_identifier()) {
      params = identifier();
    } else {
      const bool inferred = lookahead([this] {
        expect("(");
        while (!at(")")) {
          identifier();
          if (!at(")")) expect(",");
        }
        return true;
      });
      if (inferred) {
        std::vector<Id> c{expect("(")};
        while (!at(")")) {
          c.push_back(identifier());
          if (!at(")")) c.push_back(expect(","));
        }
        c.push_back(expect(")"));
        params = make("inferred_parameters", std::move(c));
      } else {
        params = formal_parameters();
      }
    }
    const Id arrow = expect("->");
    const Id body = at("{") ? block() : expression();
    return make("lambda_expression", {params, arrow, body});
  }

  Id assignment() {
    if (lambda_ahead()) return lambda();
    const Id lhs = ternary();
    const Token& t = peek();
    if (t.kind == TokenKind::op &&
        std::find(kAssignmentOps.begin(), kAssignmentOps.end(), t.text) != kAssignmentOps.end()) {
      const Id op = token();
      return make("assignment_expression", {lhs, op, assignment()});
    }
    return lhs;
  }

  Id ternary() {
    const Id condition = binary(1);
    if (!at("?")) return condition;
    const Id q = token();
    const Id yes = expression();
    const Id colon = expect(":");
    const Id no = lambda_ahead() ? lambda() : ternary();
    return make("ternary_expression", {condition, q, yes, colon, no});
  }

  Id binary(int min_precedence) {
    Id lhs = unary();
    while (true) {
      const Token& t = peek();
      if (!is_punct_or_keyword(t)) break;
      const int precedence = binary_precedence(t.text);
      if (precedence == 0 || precedence < min_precedence) break;
      if (t.text == "instanceof") {
        std::vector<Id> c{lhs, token()};
        if (at("final")) c.push_back(modifiers());
        c.push_back(type());
        if (at_identifier()) c.push_back(identifier());
        lhs = make("instanceof_expression", std::move(c));
        continue;
      }
      const Id op = token();
      const Id rhs = binary(precedence + 1);
      lhs = make("binary_expression", {lhs, op, rhs});
    }
    return lhs;
  }

  bool starts_cast_operand(std::size_t k) const {
    const Token& t = peek(k);
    switch (t.kind) {
      case TokenKind::identifier:
      case TokenKind::literal:
        return true;
      case TokenKind::keyword:
        return t.text == "this" || t.text == "super" || t.text == "new" ||
               is_primitive_type(t.text) || t.text == "switch";
      case TokenKind::op:
        return t.text == "!" || t.text == "~";
      case TokenKind::separator:
        return t.text == "(";
      default:
        return false;
    }
  }

  std::optional<Id> try_cast() {
    const bool primitive = at_primitive(1);
    bool is_cast = false;
    if (primitive || at_identifier(1)) {
      is_cast = lookahead([this, primitive] {
        expect("(");
        type();
        while (at("&")) {
          token();
          type();
        }
        if (!at(")")) return false;
        token();
        // "(a) - b" stays a subtraction; primitive casts admit any operand.
        if (primitive) return true;
        return starts_cast_operand(0);
      });
    }
    if (!is_cast) return std::nullopt;
    std::vector<Id> c{expect("("), type()};
    while (at("&")) {
      c.push_back(token());
      c.push_back(type());
    }
    c.push_back(expect(")"));
    c.push_back(lambda_ahead() ? lambda() : unary());
    return make("cast_expression", std::move(c));
  }

  Id unary() {
    if (at("+") || at("-") || at("!") || at("~")) {
      const Id op = token();
      return make("unary_expression", {op, unary()});
    }
    if (at("++") || at("--")) {
      const Id op = token();
      return make("update_expression", {op, unary()});
    }
    if (at("(")) {
      if (auto cast = try_cast()) return *cast;
    }
    return postfix(primary());
  }

  Id argument_list() {
    std::vector<Id> c{expect("(")};
    while (!at(")")) {
      c.push_back(expression());
      if (!at(")")) c.push_back(expect(","));
    }
    c.push_back(expect(")"));
    return make("argument_list", std::move(c));
  }

  Id array_initializer(std::string kind) {
    std::vector<Id> c{expect("{")};
    while (!at("}")) {
      c.push_back(at("{") ? array_initializer(kind) : expression());
      if (!at("}")) c.push_back(expect(","));
    }
    c.push_back(expect("}"));
    return make(std::move(kind), std::move(c));
  }

  Id creation() {
    std::vector<Id> c{expect("new")};
    if (at("<")) c.push_back(type_arguments());
    c.push_back(element_type());
    if (at("[")) {
      while (at("[") && !at("]", 1)) {
        const Id open = token();
        const Id size = expression();
        c.push_back(make("dimensions_expr", {open, size, expect("]")}));
      }
      if (at("[")) c.push_back(dimensions());
      if (at("{")) c.push_back(array_initializer("array_initializer"));
      return make("array_creation_expression", std::move(c));
    }
    c.push_back(argument_list());
    if (at("{")) c.push_back(class_body("class_body"));
    return make("object_creation_expression", std::move(c));
  }

  Id primary() {
    const Token& t = peek();
    if (t.kind == TokenKind::literal) return leaf(t.literal_kind, true);
    if (t.kind == TokenKind::identifier) {
      const Id name = identifier();
      if (at("(")) return make("method_invocation", {name, argument_list()});
      return name;
    }
    if (at("this") || at("super")) {
      const Id kw = leaf(t.text, true);
      if (at("(")) return make("explicit_constructor_invocation", {kw, argument_list()});
      return kw;
    }
    if (at("(")) return parenthesized();
    if (at("new")) return creation();
    if (at("switch")) return switch_expression();
    if (at_primitive() || at("void")) {
      Id ty = at("void") ? leaf("void_type", true) : primitive_type();
      if (at("[")) ty = make("array_type", {ty, dimensions()});
      const Id dot = expect(".");
      const Id kw = expect("class");
      return make("class_literal", {ty, dot, kw});
    }
    if (at("{")) return array_initializer("array_initializer");
    fail("expected expression");
  }

  Id postfix(Id expr) {
    while (true) {
      if (at(".")) {
        if (at("class", 1)) {
          const Id dot = token();
          expr = make("class_literal", {expr, dot, token()});
        } else if (at("this", 1) || at("super", 1)) {
          const Id dot = token();
          expr = make("field_access", {expr, dot, leaf(peek().text, true)});
        } else if (at("new", 1)) {
          const Id dot = token();
          const Id created = creation();
          expr = make("object_creation_expression", {expr, dot, created});
        } else {
          const Id dot = token();
          std::optional<Id> targs;
          if (at("<")) targs = type_arguments();
          const Id name = identifier();
          if (at("(")) {
            std::vector<Id> c{expr, dot};
            if (targs) c.push_back(*targs);
            c.push_back(name);
            c.push_back(argument_list());
            expr = make("method_invocation", std::move(c));
          } else {
            expr = make("field_access", {expr, dot, name});
          }
        }
      } else if (at("[")) {
        const Id open = token();
        const Id index = expression();
        expr = make("array_access", {expr, open, index, expect("]")});
      } else if (at("++") || at("--")) {
        expr = make("update_expression", {expr, token()});
      } else if (at("::")) {
        const Id colons = token();
        const Id name = at("new") ? token() : identifier();
        expr = make("method_reference", {expr, colons, name});
      } else {
        return expr;
      }
    }
  }

  std::string_view source_;
  std::vector<Token> tokens_;
  std::vector<std::vector<Token>> history_;
  std::size_t pos_ = 0;
  std::vector<AstNode> nodes_;
};

}  // namespace

Ast parse(std::string_view source) { return Parser(source).run(); }

}  // namespace confusion_lens::java
