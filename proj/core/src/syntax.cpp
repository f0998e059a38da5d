#include "confusion_lens/syntax.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "confusion_lens/json_format.hpp"
#include "java_categories_json.inc"

namespace confusion_lens {

const CategoryMap& CategoryMap::java_default() {
  static const CategoryMap map = from_json(kJavaCategoriesJson);
  return map;
}

CategoryMap CategoryMap::from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed category map: ") + e.what());
  }
  if (!j.is_object()) throw DataError("category map must be a JSON object");
  std::map<std::string, SyntaxCategory, std::less<>> table;
  for (const auto& [kind, value] : j.items()) {
    if (!value.is_string()) throw DataError("category for \"" + kind + "\" must be a string");
    const auto category = parse_category(value.get<std::string>());
    if (!category) {
      throw DataError("unknown category \"" + value.get<std::string>() + "\" for \"" + kind + "\"");
    }
    table.emplace(kind, *category);
  }
  return CategoryMap(std::move(table));
}

CategoryMap CategoryMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open category map " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return from_json(buffer.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

SyntaxCategory CategoryMap::categorize(std::string_view node_kind, const WarningSink& warn) const {
  if (const auto it = table_.find(node_kind); it != table_.end()) return it->second;
  if (warn) warn("unmapped node kind \"" + std::string(node_kind) + "\", using Expression");
  return SyntaxCategory::Expression;
}

std::string CategoryMap::to_json() const {
  Json j = Json::object();
  for (const auto& [kind, category] : table_) j[kind] = std::string(to_string(category));
  return j.dump(2) + "\n";
}

SyntaxCategory categorize(std::string_view node_kind, const CategoryMap& map) {
  return map.categorize(node_kind);
}

Ast parse_source(std::string_view source, std::string_view language) {
  if (language == "java") return java::parse(source);
  throw DataError("no grammar for language \"" + std::string(language) + "\"");
}

void label_region(Region& region, const Ast& ast, const CategoryMap& map,
                  const CategoryMap::WarningSink& warn) {
  const std::string_view src = ast.source();
  CharSpan span = region.span;
  auto blank = [&](std::size_t i) {
    const char c = src[i];
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
  };
  CharSpan trimmed = span;
  while (trimmed.start < trimmed.end && trimmed.end <= src.size() && blank(trimmed.start)) {
    ++trimmed.start;
  }
  while (trimmed.end > trimmed.start && trimmed.end <= src.size() && blank(trimmed.end - 1)) {
    --trimmed.end;
  }
  if (!trimmed.empty()) span = trimmed;
  const AstNodeRef node = covering_node(ast, span);
  region.label = node.kind;
  region.category = map.categorize(node.kind, warn);
}

std::vector<Region> filter_regions(std::span<const Region> regions) {
  std::vector<Region> out;
  std::copy_if(regions.begin(), regions.end(), std::back_inserter(out), [](const Region& r) {
    return r.category && is_retained(*r.category);
  });
  return out;
}

}  // namespace confusion_lens
