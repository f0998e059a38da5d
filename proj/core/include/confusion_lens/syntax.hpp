#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confusion_lens/ast.hpp"
#include "confusion_lens/category.hpp"
#include "confusion_lens/regions.hpp"

namespace confusion_lens {

/// Node kind -> category table. Kinds missing from the table fall back to
/// Expression and are reported through the warning callback.
class CategoryMap {
 public:
  using WarningSink = std::function<void(const std::string&)>;

  CategoryMap() = default;
  explicit CategoryMap(std::map<std::string, SyntaxCategory, std::less<>> table)
      : table_(std::move(table)) {}

  /// Built-in table for the bundled Java grammar.
  static const CategoryMap& java_default();
  /// JSON object {"node_kind": "Category", ...}. Throws DataError.
  static CategoryMap from_json(std::string_view text);
  static CategoryMap load(const std::filesystem::path& path);

  SyntaxCategory categorize(std::string_view node_kind,
                            const WarningSink& warn = nullptr) const;
  bool contains(std::string_view node_kind) const { return table_.find(node_kind) != table_.end(); }
  const std::map<std::string, SyntaxCategory, std::less<>>& table() const { return table_; }

  std::string to_json() const;

 private:
  std::map<std::string, SyntaxCategory, std::less<>> table_;
};

SyntaxCategory categorize(std::string_view node_kind,
                          const CategoryMap& map = CategoryMap::java_default());

/// Parses `source` for a supported language. Throws ParseError, or
/// DataError for languages without a bundled grammar.
Ast parse_source(std::string_view source, std::string_view language = "java");

/// Sets label and category from the node covering the region; surrounding
/// whitespace in the region is ignored for the lookup.
void label_region(Region& region, const Ast& ast, const CategoryMap& map,
                  const CategoryMap::WarningSink& warn = nullptr);

/// Keeps regions whose category is retained, in their original order.
std::vector<Region> filter_regions(std::span<const Region> regions);

}  // namespace confusion_lens
