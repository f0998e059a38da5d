#pragma once

#include <optional>
#include <string_view>

namespace confusion_lens {

enum class SyntaxCategory {
  Literal,
  ProgramStructure,
  Expression,
  Operator,
  ControlFlow,
  Identifier,
  Type,
  Punctuation,
};

std::string_view to_string(SyntaxCategory category);
std::optional<SyntaxCategory> parse_category(std::string_view name);

/// Literal, ProgramStructure, Expression and Operator survive filtering.
bool is_retained(SyntaxCategory category);

}  // namespace confusion_lens
