#include "confusion_lens/regions.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <tuple>

#include "confusion_lens/error.hpp"
#include "confusion_lens/java_lexer.hpp"
#include "confusion_lens/json_format.hpp"

namespace confusion_lens {

std::string_view to_string(LexClass lex_class) {
  switch (lex_class) {
    case LexClass::identifier_part:
      return "identifier_part";
    case LexClass::number:
      return "number";
    case LexClass::op:
      return "operator";
    case LexClass::bracket:
      return "bracket";
    case LexClass::punctuation:
      return "punctuation";
    case LexClass::whitespace:
      return "whitespace";
    case LexClass::keyword:
      return "keyword";
    case LexClass::other:
      return "other";
  }
  return "other";
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

bool all_of(std::string_view text, std::string_view charset) {
  return !text.empty() && text.find_first_not_of(charset) == std::string_view::npos;
}

bool is_word_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool is_word_part(unsigned char c) { return is_word_start(c) || std::isdigit(c); }

int binary_precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "^") return 4;
  if (op == "&") return 5;
  if (op == "==" || op == "!=") return 6;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
  if (op == "<<" || op == ">>" || op == ">>>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  return 0;
}

constexpr int kUnaryPrecedence = 11;

bool is_assignment(std::string_view op) {
  static constexpr std::array<std::string_view, 12> ops = {
      "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="};
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

bool is_open_bracket(std::string_view t) { return t == "(" || t == "[" || t == "{"; }

// A lexeme of the source with its lexical class.
struct Unit {
  CharSpan span;
  std::string_view text;
  LexClass cls;
  bool trivia;
};

class Expander {
 public:
  Expander(std::string_view source, std::string_view language) {
    for (const auto& t : java::lex(source, true)) {
      const std::string_view text = source.substr(t.span.start, t.span.length());
      const bool trivia =
          t.kind == java::TokenKind::whitespace || t.kind == java::TokenKind::comment;
      units_.push_back({t.span, text, trivia ? LexClass::whitespace : classify(text, language),
                        trivia});
    }
  }

  // Unit range [first, last] covering `span`.
  std::pair<std::size_t, std::size_t> units_covering(CharSpan span) const {
    std::size_t first = units_.size();
    std::size_t last = 0;
    for (std::size_t u = 0; u < units_.size(); ++u) {
      if (units_[u].span.intersects(span)) {
        first = std::min(first, u);
        last = std::max(last, u);
      }
    }
    return {first, last};
  }

  const Unit& unit(std::size_t u) const { return units_[u]; }

  std::optional<std::size_t> prev_sig(std::size_t u) const {
    while (u-- > 0) {
      if (!units_[u].trivia) return u;
    }
    return std::nullopt;
  }
  std::optional<std::size_t> next_sig(std::size_t u) const {
    for (++u; u < units_.size(); ++u) {
      if (!units_[u].trivia) return u;
    }
    return std::nullopt;
  }

  bool is_operand(std::optional<std::size_t> u) const {
    return u && (units_[*u].cls == LexClass::identifier_part || units_[*u].cls == LexClass::number);
  }
  bool is_member_access(std::optional<std::size_t> u) const {
    return u && (units_[*u].text == "." || units_[*u].text == "::");
  }

  // Whether the operand ending at `p` is the whole left operand of an
  // operator with precedence `prec`.
  bool single_left(std::size_t p, int prec) const {
    const auto pp = prev_sig(p);
    if (!pp) return true;
    const Unit& u = units_[*pp];
    if (is_member_access(pp)) return false;
    if (u.cls != LexClass::op) return true;
    if (is_assignment(u.text) || u.text == "?" || u.text == ":" || u.text == "->") return true;
    const int left = binary_precedence(u.text);
    return left > 0 && left < prec && !is_unary_position(*pp);
  }

  // Whether the operand starting at `q` is the whole right operand.
  bool single_right(std::size_t q, int prec) const {
    const auto qq = next_sig(q);
    if (!qq) return true;
    const Unit& u = units_[*qq];
    if (u.text == "." || u.text == "::" || u.text == "(" || u.text == "[" || u.text == "++" ||
        u.text == "--") {
      return false;
    }
    if (u.cls != LexClass::op) return true;
    const int right = binary_precedence(u.text);
    return right == 0 || right <= prec;
  }

  // "+"/"-" at `u` acts as a sign rather than a binary operator.
  bool is_unary_position(std::size_t u) const {
    const auto p = prev_sig(u);
    if (!p) return true;
    const Unit& prev = units_[*p];
    if (prev.cls == LexClass::op) {
      if (prev.text == "++" || prev.text == "--") return !is_operand(prev_sig(*p));
      return true;
    }
    if (prev.cls == LexClass::bracket) return is_open_bracket(prev.text);
    return prev.cls == LexClass::punctuation || prev.cls == LexClass::keyword;
  }

  // Applies the absorption rules to [first, last] until nothing changes.
  void grow(std::size_t& first, std::size_t& last) const {
    bool changed = true;
    auto absorb = [&](std::optional<std::size_t> u) {
      if (!u) return;
      if (*u < first) {
        first = *u;
        changed = true;
      }
      if (*u > last) {
        last = *u;
        changed = true;
      }
    };
    while (changed) {
      changed = false;
      for (std::size_t u = first; u <= last; ++u) {
        const Unit& unit = units_[u];
        if (unit.cls == LexClass::op) {
          apply_operator_rule(u, absorb);
        } else if (unit.cls == LexClass::number) {
          // Negative literal: a sign directly before the number whose own
          // left neighbour is an operator or opening bracket.
          if (u == 0 || units_[u - 1].cls != LexClass::op) continue;
          const std::string_view sign = units_[u - 1].text;
          if (sign != "-" && sign != "+") continue;
          const auto before = prev_sig(u - 1);
          if (before && (units_[*before].cls == LexClass::op ||
                         (units_[*before].cls == LexClass::bracket &&
                          is_open_bracket(units_[*before].text)))) {
            absorb(u - 1);
          }
        }
      }
    }
  }

 private:
  template <typename Absorb>
  void apply_operator_rule(std::size_t u, Absorb& absorb) const {
    const std::string_view text = units_[u].text;
    const auto p = prev_sig(u);
    const auto q = next_sig(u);
    if (text == "++" || text == "--") {
      if (is_operand(p) && !is_member_access(prev_sig(*p))) {
        absorb(p);
      } else if (is_operand(q) && single_right(*q, kUnaryPrecedence)) {
        absorb(q);
      }
      return;
    }
    if (text == "!" || text == "~" ||
        ((text == "+" || text == "-") && is_unary_position(u))) {
      if (is_operand(q) && single_right(*q, kUnaryPrecedence)) absorb(q);
      return;
    }
    const int prec = binary_precedence(text);
    if (prec == 0) return;
    if (is_operand(p) && is_operand(q) && single_left(*p, prec) && single_right(*q, prec)) {
      absorb(p);
      absorb(q);
    }
  }

  std::vector<Unit> units_;
};

std::string concatenate(std::span<const TokenRecord> records) {
  std::string out;
  for (const auto& r : records) out += r.text;
  return out;
}

void compute_metrics(Region& region, std::span<const TokenRecord> records,
                     const PerplexityOptions& options) {
  const auto members = records.subspan(region.first_token,
                                       region.last_token - region.first_token + 1);
  const bool any = std::any_of(members.begin(), members.end(),
                               [&](const TokenRecord& r) { return is_included(r, options); });
  if (!any) return;
  region.avg_ppl = avg_perplexity(members, std::nullopt, options);
  region.max_ppl = max_perplexity(members, std::nullopt, options);
}

}  // namespace

LexClass classify(std::string_view token_text, std::string_view language) {
  const std::string_view t = trim(token_text);
  if (t.empty()) return LexClass::whitespace;
  if (language == "java" && java::is_keyword(t)) return LexClass::keyword;
  if (std::isdigit(static_cast<unsigned char>(t.front())) ||
      (t.front() == '.' && t.size() > 1 && std::isdigit(static_cast<unsigned char>(t[1])))) {
    if (!java::numeric_literal_kind(t).empty() || all_of(t, "0123456789")) return LexClass::number;
    return LexClass::other;
  }
  if (is_word_start(static_cast<unsigned char>(t.front())) &&
      std::all_of(t.begin(), t.end(), [](char c) { return is_word_part(static_cast<unsigned char>(c)); })) {
    return LexClass::identifier_part;
  }
  if (all_of(t, "+-*/%=!<>&|^~?")) return LexClass::op;
  if (all_of(t, "()[]{}")) return LexClass::bracket;
  if (all_of(t, ";,.:")) return LexClass::punctuation;
  if (t == "->") return LexClass::op;
  return LexClass::other;
}

std::vector<std::size_t> Region::token_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = first_token; i <= last_token; ++i) out.push_back(i);
  return out;
}

Region expand(std::size_t peak_token, double peak_value, std::span<const TokenRecord> records,
              std::string_view snippet_id, const PerplexityOptions& options,
              std::string_view language) {
  if (peak_token >= records.size()) throw DataError("peak token outside the token sequence");
  const std::string source = concatenate(records);
  const Expander expander(source, language);

  auto [first_unit, last_unit] = expander.units_covering(records[peak_token].span);
  expander.grow(first_unit, last_unit);
  const CharSpan covered{expander.unit(first_unit).span.start, expander.unit(last_unit).span.end};

  Region region;
  region.snippet_id = std::string(snippet_id);
  region.peak_index = peak_token;
  region.peak_value = peak_value;
  region.first_token = peak_token;
  region.last_token = peak_token;
  for (const auto& r : records) {
    if (!r.span.intersects(covered)) continue;
    region.first_token = std::min(region.first_token, r.index);
    region.last_token = std::max(region.last_token, r.index);
  }
  region.span = {records[region.first_token].span.start, records[region.last_token].span.end};
  compute_metrics(region, records, options);
  return region;
}

std::vector<Region> merge(std::vector<Region> regions, std::span<const TokenRecord> records,
                          std::size_t gap_tokens, const PerplexityOptions& options) {
  if (regions.empty()) return regions;
  std::sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
    return std::tie(a.first_token, a.last_token, a.peak_index) <
           std::tie(b.first_token, b.last_token, b.peak_index);
  });

  auto non_whitespace_between = [&](std::size_t after, std::size_t before) {
    std::size_t count = 0;
    for (std::size_t i = after + 1; i < before; ++i) {
      if (!trim(records[i].text).empty()) ++count;
    }
    return count;
  };

  std::vector<Region> out;
  Region current = regions.front();
  bool dirty = false;
  for (std::size_t i = 1; i < regions.size(); ++i) {
    const Region& next = regions[i];
    const bool joins = next.first_token <= current.last_token + 1 ||
                       non_whitespace_between(current.last_token, next.first_token) <= gap_tokens;
    if (!joins) {
      if (dirty) compute_metrics(current, records, options);
      out.push_back(std::move(current));
      current = next;
      dirty = false;
      continue;
    }
    current.first_token = std::min(current.first_token, next.first_token);
    current.last_token = std::max(current.last_token, next.last_token);
    current.span = {records[current.first_token].span.start, records[current.last_token].span.end};
    if (next.peak_value > current.peak_value ||
        (next.peak_value == current.peak_value && next.peak_index < current.peak_index)) {
      current.peak_index = next.peak_index;
      current.peak_value = next.peak_value;
    }
    dirty = true;
  }
  if (dirty) compute_metrics(current, records, options);
  out.push_back(std::move(current));
  return out;
}

bool overlaps_aoi(const Region& region, const Snippet& snippet,
                  std::span<const TokenRecord> records) {
  for (const CharSpan& aoi : snippet.aois) {
    for (const std::size_t t : intersecting_tokens(records, aoi)) {
      if (region.contains_token(t)) return true;
    }
  }
  return false;
}

bool overlaps_aoi(CharSpan region_span, const Snippet& snippet) {
  return std::any_of(snippet.aois.begin(), snippet.aois.end(),
                     [&](const CharSpan& aoi) { return aoi.intersects(region_span); });
}

OverlapSummary overlap_counts(std::span<const Region> regions, const Corpus& corpus) {
  OverlapSummary summary;
  std::map<std::string, std::vector<CharSpan>, std::less<>> by_snippet;
  for (const Region& r : regions) {
    if (!corpus.find(r.snippet_id)) {
      throw DataError("region refers to unknown snippet \"" + r.snippet_id + "\"");
    }
    by_snippet[r.snippet_id].push_back(r.span);
  }
  for (const Snippet& s : corpus.snippets()) {
    VariantOverlap& v = s.variant == Variant::clean ? summary.clean : summary.confusing;
    const auto it = by_snippet.find(s.id);
    const std::vector<CharSpan> none;
    const std::vector<CharSpan>& spans = it == by_snippet.end() ? none : it->second;
    for (const CharSpan& span : spans) {
      ++v.regions;
      if (overlaps_aoi(span, s)) {
        ++v.overlap;
      } else {
        ++v.novel;
      }
    }
    for (const CharSpan& aoi : s.aois) {
      ++v.aois;
      const bool hit = std::any_of(spans.begin(), spans.end(),
                                   [&](const CharSpan& span) { return span.intersects(aoi); });
      if (hit) {
        ++v.hit;
      } else {
        ++v.missed;
      }
    }
  }
  return summary;
}

std::string serialize_region(const Region& region) {
  Json j;
  j["snippet_id"] = region.snippet_id;
  j["start"] = region.span.start;
  j["end"] = region.span.end;
  j["peak_token"] = region.peak_index;
  j["max_ppl"] = json_number(region.max_ppl);
  j["avg_ppl"] = json_number(region.avg_ppl);
  j["category"] = region.category ? Json(std::string(to_string(*region.category))) : Json(nullptr);
  j["label"] = region.label ? Json(*region.label) : Json(nullptr);
  j["overlaps_aoi"] = region.overlaps_aoi;
  return dump_canonical(j);
}

Region parse_region(std::string_view line) {
  try {
    const Json j = Json::parse(line);
    Region r;
    r.snippet_id = j.at("snippet_id").get<std::string>();
    r.span = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
    if (r.span.start >= r.span.end) throw DataError("region with empty span");
    r.peak_index = j.at("peak_token").get<std::size_t>();
    r.max_ppl = j.at("max_ppl").get<double>();
    r.avg_ppl = j.at("avg_ppl").get<double>();
    if (const auto& c = j.at("category"); !c.is_null()) {
      r.category = parse_category(c.get<std::string>());
      if (!r.category) throw DataError("unknown category \"" + c.get<std::string>() + "\"");
    }
    if (const auto& l = j.at("label"); !l.is_null()) r.label = l.get<std::string>();
    r.overlaps_aoi = j.value("overlaps_aoi", false);
    return r;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed region: ") + e.what());
  }
}

}  // namespace confusion_lens
