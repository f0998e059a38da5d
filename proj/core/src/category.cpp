#include "confusion_lens/category.hpp"

#include <array>
#include <utility>

namespace confusion_lens {

namespace {

constexpr std::array<std::pair<SyntaxCategory, std::string_view>, 8> kNames = {{
    {SyntaxCategory::Literal, "Literal"},
    {SyntaxCategory::ProgramStructure, "ProgramStructure"},
    {SyntaxCategory::Expression, "Expression"},
    {SyntaxCategory::Operator, "Operator"},
    {SyntaxCategory::ControlFlow, "ControlFlow"},
    {SyntaxCategory::Identifier, "Identifier"},
    {SyntaxCategory::Type, "Type"},
    {SyntaxCategory::Punctuation, "Punctuation"},
}};

}  // namespace

std::string_view to_string(SyntaxCategory category) {
  for (const auto& [c, name] : kNames) {
    if (c == category) return name;
  }
  return "Expression";
}

std::optional<SyntaxCategory> parse_category(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

bool is_retained(SyntaxCategory category) {
  switch (category) {
    case SyntaxCategory::Literal:
    case SyntaxCategory::ProgramStructure:
    case SyntaxCategory::Expression:
    case SyntaxCategory::Operator:
      return true;
    default:
      return false;
  }
}

}  // namespace confusion_lens
