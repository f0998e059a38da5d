#include <doctest.h>

#include <functional>

#include "confusion_lens/ast.hpp"
#include "confusion_lens/corpus.hpp"
#include "confusion_lens/java_lexer.hpp"
#include "support.hpp"

using namespace confusion_lens;

namespace {

CharSpan find_span(std::string_view source, std::string_view text) {
  const std::size_t at = source.find(text);
  REQUIRE(at != std::string_view::npos);
  return {at, at + text.size()};
}

void check_nesting(const Ast& ast) {
  for (std::size_t id = 0; id < ast.size(); ++id) {
    const AstNode& n = ast.node(id);
    for (std::size_t c : n.children) {
      const AstNode& child = ast.node(c);
      CHECK(child.parent == id);
      CHECK(n.span.start <= child.span.start);
      CHECK(child.span.end <= n.span.end);
    }
  }
}

}  // namespace

TEST_CASE("lexer partitions the source with trivia") {
  const std::string src = "int x = 0b1100; // note\n/* c */ x++;";
  const auto tokens = java::lex(src, true);
  std::string joined;
  for (const auto& tok : tokens) {
    if (tok.kind != java::TokenKind::end) joined += tok.text;
  }
  CHECK(joined == src);
  CHECK(java::numeric_literal_kind("0b1100") == "binary_integer_literal");
  CHECK(java::numeric_literal_kind("0x1F") == "hex_integer_literal");
  CHECK(java::numeric_literal_kind("12") == "decimal_integer_literal");
  CHECK(java::numeric_literal_kind("1.5f") == "decimal_floating_point_literal");
  CHECK(java::numeric_literal_kind("abc").empty());
}

TEST_CASE("update expression is the covering node of V1--") {
  const std::string src = "int R = 3 + V1--;";
  const Ast ast = java::parse(src);
  check_nesting(ast);
  CHECK(ast.node(ast.root()).kind == "program");
  CHECK(covering_node(ast, find_span(src, "V1--")).kind == "update_expression");
}

TEST_CASE("a span equal to the whole snippet covers the root") {
  const std::string src = "int V1 = 4;\nint R = 3 * V1--;\n";
  const Ast ast = java::parse(src);
  CHECK(covering_node(ast, {0, src.size()}).id == ast.root());
  // With a single statement the statement and the root share a span and
  // the deeper node wins.
  const std::string one = "x++;";
  const Ast single = java::parse(one);
  CHECK(covering_node(single, {0, one.size()}).kind == "expression_statement");
}

TEST_CASE("binary expression covers 12 & 3") {
  const std::string src = "int R = 12 & 3;";
  const Ast ast = java::parse(src);
  const auto node = covering_node(ast, find_span(src, "12 & 3"));
  CHECK(node.kind == "binary_expression");
  CHECK(node.span == find_span(src, "12 & 3"));
}

TEST_CASE("covering node picks the tightest, deeper on ties") {
  const std::string src = "x = (a);";
  const Ast ast = java::parse(src);
  // "a" alone is an identifier leaf.
  CHECK(covering_node(ast, find_span(src, "a")).kind == "identifier");
  CHECK(covering_node(ast, find_span(src, "(a)")).kind == "parenthesized_expression");
}

TEST_CASE("minimality: no child of the covering node contains the span") {
  const std::string src = "if (a > b) { c = d * e + f; }";
  const Ast ast = java::parse(src);
  check_nesting(ast);
  for (std::size_t s = 0; s < src.size(); ++s) {
    for (std::size_t e = s + 1; e <= src.size(); e += 3) {
      const auto ref = covering_node(ast, {s, e});
      CHECK(ref.span.start <= s);
      CHECK(e <= ref.span.end);
      for (std::size_t c : ast.node(ref.id).children) {
        const auto& child = ast.node(c);
        CHECK_FALSE((child.span.start <= s && e <= child.span.end));
      }
    }
  }
}

TEST_CASE("the bundled table snippets parse") {
  const Corpus corpus = load_corpus(testing::source_dir() / "data" / "table1_corpus.jsonl");
  for (const auto& s : corpus.snippets()) {
    CAPTURE(s.id);
    CHECK_NOTHROW(check_nesting(java::parse(s.source)));
  }
}

TEST_CASE("common snippet shapes") {
  for (const char* src : {
           "class A { int f() { return 1; } }",
           "public static void main(String[] args) { System.out.println(args.length); }",
           "for (int i = 0; i < 10; i++) { if (i % 2 == 0) continue; }",
           "int[] a = new int[]{1, 2};\nString s = a.length > 1 ? \"y\" : \"n\";",
           "while (x-- > 0) y += x << 2;",
           "Object o = (Object) \"s\"; boolean b = o instanceof String;",
           "switch (k) { case 1: break; default: k = ~k; }",
           "Runnable r = () -> {}; java.util.List<Integer> l = new java.util.ArrayList<>();",
           "do { x++; } while (x < 3);",
       }) {
    CAPTURE(src);
    CHECK_NOTHROW(java::parse(src));
  }
}

TEST_CASE("syntax errors carry a position") {
  try {
    java::parse("int x = ;\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() >= 8);
  }
  CHECK_THROWS_AS(java::parse("int x = (1;"), ParseError);
}
