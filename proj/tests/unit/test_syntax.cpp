#include <doctest.h>

#include "confusion_lens/error.hpp"
#include "confusion_lens/syntax.hpp"
#include "support.hpp"

using namespace confusion_lens;

TEST_CASE("default categories") {
  CHECK(categorize("if_statement") == SyntaxCategory::ControlFlow);
  CHECK(categorize("for_statement") == SyntaxCategory::ControlFlow);
  CHECK(categorize("update_expression") == SyntaxCategory::Operator);
  CHECK(categorize("binary_expression") == SyntaxCategory::Operator);
  CHECK(categorize("decimal_integer_literal") == SyntaxCategory::Literal);
  CHECK(categorize("binary_integer_literal") == SyntaxCategory::Literal);
  CHECK(categorize("identifier") == SyntaxCategory::Identifier);
  CHECK(categorize("integral_type") == SyntaxCategory::Type);
  CHECK(categorize(";") == SyntaxCategory::Punctuation);
  CHECK(categorize("block") == SyntaxCategory::ProgramStructure);
  CHECK(categorize("program") == SyntaxCategory::ProgramStructure);
  CHECK(categorize("cast_expression") == SyntaxCategory::Expression);
}

TEST_CASE("every kind the parser emits is mapped") {
  const auto& map = CategoryMap::java_default();
  const std::string src =
      "class A { int f(int[] a) { for (int i = 0; i < a.length; i++) { if (a[i] != 0) return (int) a[i]; }"
      " while (true) { break; } return -1 + (0x1F & 0b11) * 'c' % 2 >> 1; } }";
  const Ast ast = java::parse(src);
  for (const auto& node : ast.nodes()) {
    CAPTURE(node.kind);
    CHECK(map.contains(node.kind));
  }
}

TEST_CASE("unmapped kinds fall back to Expression with a warning") {
  const CategoryMap map = CategoryMap::from_json(R"({"if_statement":"ControlFlow"})");
  std::vector<std::string> warnings;
  const auto sink = [&](const std::string& w) { warnings.push_back(w); };
  CHECK(map.categorize("if_statement", sink) == SyntaxCategory::ControlFlow);
  CHECK(warnings.empty());
  CHECK(map.categorize("mystery_node", sink) == SyntaxCategory::Expression);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("mystery_node") != std::string::npos);
}

TEST_CASE("mapping files") {
  CHECK_THROWS_AS(CategoryMap::from_json(R"({"x":"Nonsense"})"), DataError);
  CHECK_THROWS_AS(CategoryMap::from_json("[1]"), DataError);
  CHECK_THROWS_AS(CategoryMap::from_json("{"), DataError);
  const auto& map = CategoryMap::java_default();
  CHECK(CategoryMap::from_json(map.to_json()).table() == map.table());
}

namespace {
Region categorized(SyntaxCategory c, std::size_t start) {
  Region r;
  r.span = {start, start + 1};
  r.category = c;
  return r;
}
}  // namespace

TEST_CASE("filter keeps the retained categories in order") {
  const std::vector<Region> in{categorized(SyntaxCategory::Identifier, 0), categorized(SyntaxCategory::Operator, 1),
                               categorized(SyntaxCategory::Type, 2), categorized(SyntaxCategory::Literal, 3),
                               categorized(SyntaxCategory::ControlFlow, 4), categorized(SyntaxCategory::Punctuation, 5),
                               categorized(SyntaxCategory::Expression, 6),
                               categorized(SyntaxCategory::ProgramStructure, 7)};
  const auto out = filter_regions(in);
  REQUIRE(out.size() == 4);
  CHECK(out[0].category == SyntaxCategory::Operator);
  CHECK(out[1].category == SyntaxCategory::Literal);
  CHECK(out[2].category == SyntaxCategory::Expression);
  CHECK(out[3].category == SyntaxCategory::ProgramStructure);
  CHECK(filter_regions(std::vector<Region>{}).empty());
}

TEST_CASE("labelling trims surrounding whitespace") {
  const std::string src = "int R = 3 * V1--;";
  const Ast ast = parse_source(src);
  Region r;
  const std::size_t at = src.find(" V1--");
  r.span = {at, at + 5};
  label_region(r, ast, CategoryMap::java_default());
  CHECK(r.label == "update_expression");
  CHECK(r.category == SyntaxCategory::Operator);
  CHECK_THROWS_AS(parse_source(src, "cobol"), DataError);
}
