#include "confusion_lens/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "confusion_lens/error.hpp"
#include "confusion_lens/json_format.hpp"
#include "confusion_lens/utf8.hpp"

namespace confusion_lens {

std::string_view to_string(Variant variant) {
  return variant == Variant::clean ? "clean" : "confusing";
}

Variant parse_variant(std::string_view text) {
  if (text == "clean") return Variant::clean;
  if (text == "confusing") return Variant::confusing;
  throw DataError("unknown variant \"" + std::string(text) + "\"");
}

CharSpan aoi_of(const Snippet& snippet, std::size_t index) {
  if (index >= snippet.aois.size()) {
    throw DataError("aoi index " + std::to_string(index) +
                    " out of range for snippet " + snippet.id + " (" +
                    std::to_string(snippet.aois.size()) + " aois)");
  }
  return snippet.aois[index];
}

namespace {

void validate_aois(Snippet& snippet) {
  std::sort(snippet.aois.begin(), snippet.aois.end());
  const std::string_view source = snippet.source;
  for (std::size_t i = 0; i < snippet.aois.size(); ++i) {
    const CharSpan& aoi = snippet.aois[i];
    if (aoi.start >= aoi.end) {
      throw DataError("snippet " + snippet.id + ": aoi [" +
                      std::to_string(aoi.start) + "," + std::to_string(aoi.end) +
                      ") has non-positive length");
    }
    if (aoi.end > source.size()) {
      throw DataError("snippet " + snippet.id + ": aoi out of bounds [" +
                      std::to_string(aoi.start) + "," + std::to_string(aoi.end) +
                      ") for source of length " + std::to_string(source.size()));
    }
    if (!utf8::is_boundary(source, aoi.start) ||
        !utf8::is_boundary(source, aoi.end)) {
      throw DataError("snippet " + snippet.id +
                      ": aoi offsets split a UTF-8 character");
    }
    if (i > 0 && snippet.aois[i - 1].end > aoi.start) {
      throw DataError("snippet " + snippet.id + ": overlapping aois");
    }
  }
}

}  // namespace

Corpus::Corpus(std::vector<Snippet> snippets) : snippets_(std::move(snippets)) {
  struct Members {
    std::vector<std::size_t> clean;
    std::vector<std::size_t> confusing;
  };
  std::map<std::string, Members> members;

  for (std::size_t i = 0; i < snippets_.size(); ++i) {
    Snippet& snippet = snippets_[i];
    if (snippet.id.empty()) throw DataError("snippet with empty id");
    if (!by_id_.emplace(snippet.id, i).second) {
      throw DataError("duplicate snippet id \"" + snippet.id + "\"");
    }
    if (!utf8::is_valid(snippet.source)) {
      throw DataError("snippet " + snippet.id + ": source is not valid UTF-8");
    }
    validate_aois(snippet);
    auto& slot = members[snippet.pair_id];
    (snippet.variant == Variant::clean ? slot.clean : slot.confusing).push_back(i);
  }

  for (const auto& [pair_id, m] : members) {
    if (m.clean.size() != 1 || m.confusing.size() != 1) {
      throw DataError("unpaired pair_id \"" + pair_id + "\": " +
                      std::to_string(m.clean.size()) + " clean, " +
                      std::to_string(m.confusing.size()) + " confusing");
    }
    pairs_.emplace(pair_id, SnippetPair{m.clean.front(), m.confusing.front()});
  }
}

const Snippet* Corpus::find(std::string_view id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &snippets_[it->second];
}

const Snippet& Corpus::at(std::string_view id) const {
  if (const Snippet* s = find(id)) return *s;
  throw DataError("unknown snippet id \"" + std::string(id) + "\"");
}

Snippet parse_snippet(std::string_view line, std::size_t line_number) {
  const std::string where =
      line_number > 0 ? "line " + std::to_string(line_number) + ": " : "";
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw DataError(where + "malformed JSON: " + e.what());
  }
  try {
    Snippet s;
    s.id = j.at("id").get<std::string>();
    s.pair_id = j.at("pair_id").get<std::string>();
    s.variant = parse_variant(j.at("variant").get<std::string>());
    s.language = j.value("language", std::string("java"));
    s.source = j.at("source").get<std::string>();
    if (auto it = j.find("atom_category"); it != j.end() && !it->is_null()) {
      s.atom_category = it->get<std::string>();
    }
    if (auto it = j.find("aois"); it != j.end()) {
      for (const auto& aoi : *it) {
        const auto start = aoi.at("start").get<std::int64_t>();
        const auto end = aoi.at("end").get<std::int64_t>();
        if (start < 0 || end < 0) throw DataError("aoi out of bounds: negative offset");
        s.aois.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end)});
      }
    }
    return s;
  } catch (const Json::exception& e) {
    throw DataError(where + "invalid snippet record: " + e.what());
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  }
}

std::string serialize_snippet(const Snippet& snippet) {
  Json j;
  j["id"] = snippet.id;
  j["pair_id"] = snippet.pair_id;
  j["variant"] = std::string(to_string(snippet.variant));
  j["language"] = snippet.language;
  j["source"] = snippet.source;
  if (snippet.atom_category) j["atom_category"] = *snippet.atom_category;
  Json aois = Json::array();
  for (const auto& aoi : snippet.aois) aois.push_back({{"start", aoi.start}, {"end", aoi.end}});
  j["aois"] = std::move(aois);
  return dump_canonical(j);
}

Corpus read_corpus(std::istream& in, std::string_view origin) {
  std::vector<Snippet> snippets;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Snippet s = parse_snippet(line, 0);
      validate_aois(s);
      snippets.push_back(std::move(s));
    } catch (const DataError& e) {
      throw DataError(std::string(origin) + ":" + std::to_string(line_number) +
                      ": " + e.what());
    }
  }
  try {
    return Corpus(std::move(snippets));
  } catch (const DataError& e) {
    throw DataError(std::string(origin) + ": " + e.what());
  }
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return read_corpus(in, path.string());
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& snippet : corpus.snippets()) {
    out += serialize_snippet(snippet);
    out += '\n';
  }
  return out;
}

}  // namespace confusion_lens
