#include <doctest.h>

#include <algorithm>
#include <random>

#include "confusion_lens/corpus.hpp"
#include "confusion_lens/error.hpp"
#include "confusion_lens/regions.hpp"
#include "support.hpp"

using namespace confusion_lens;
namespace t = confusion_lens::testing;

namespace {

std::string region_text(const Region& r, const std::vector<std::string>& pieces) {
  return t::concat(pieces).substr(r.span.start, r.span.length());
}

std::size_t index_of(const std::vector<std::string>& pieces, const std::string& piece,
                     std::size_t nth = 0) {
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i] == piece && nth-- == 0) return i;
  }
  FAIL("piece not found: " << piece);
  return 0;
}

Region expand_on(const std::vector<std::string>& pieces, const std::string& piece,
                 std::size_t nth = 0) {
  const auto records = t::flat_records(pieces);
  return expand(index_of(pieces, piece, nth), 5.0, records, "s");
}

// One-character tokens so token indices equal byte offsets.
std::vector<TokenRecord> chars(std::size_t n, char fill = 'x') {
  return t::flat_records(std::vector<std::string>(n, std::string(1, fill)));
}

Region token_region(std::size_t first, std::size_t last, std::size_t peak, double value,
                    std::span<const TokenRecord> records) {
  Region r = expand(peak, value, records, "s");
  r.first_token = first;
  r.last_token = last;
  r.span = {records[first].span.start, records[last].span.end};
  return r;
}

}  // namespace

TEST_CASE("lexical classes") {
  CHECK(classify("V") == LexClass::identifier_part);
  CHECK(classify("1") == LexClass::number);
  CHECK(classify("--") == LexClass::op);
  CHECK(classify("while") == LexClass::keyword);
  CHECK(classify("0b1100") == LexClass::number);
  CHECK(classify("0x1F") == LexClass::number);
  CHECK(classify(" (") == LexClass::bracket);
  CHECK(classify(";") == LexClass::punctuation);
  CHECK(classify(".") == LexClass::punctuation);
  CHECK(classify(" \n\t") == LexClass::whitespace);
  CHECK(classify("") == LexClass::whitespace);
  CHECK(classify("_x9") == LexClass::identifier_part);
  CHECK(classify("\"s\"") == LexClass::other);
  CHECK(classify("while", "python") == LexClass::identifier_part);
  CHECK(to_string(LexClass::op) == "operator");
}

TEST_CASE("post-decrement takes its operand") {
  const std::vector<std::string> pieces{"V1", "--", ";"};
  const Region r = expand_on(pieces, "--");
  CHECK(region_text(r, pieces) == "V1--");
  CHECK(r.contains_token(r.peak_index));
}

TEST_CASE("split identifiers are rejoined") {
  const std::vector<std::string> pieces{"V", "1", " ", "="};
  CHECK(region_text(expand_on(pieces, "1"), pieces) == "V1");
  CHECK(region_text(expand_on(pieces, "V"), pieces) == "V1");
}

TEST_CASE("binary operator between single operands") {
  const std::vector<std::string> pieces{"12", " ", "&", " ", "3"};
  CHECK(region_text(expand_on(pieces, "&"), pieces) == "12 & 3");
  const std::vector<std::string> stmt{"int", " R", " =", " 12", " &", " 3", ";"};
  CHECK(region_text(expand_on(stmt, " &"), stmt) == " 12 & 3");
}

TEST_CASE("binary operator next to a tighter operator keeps to its side") {
  // In a + b * c the "+" right operand is b * c, not a single lexeme.
  const std::vector<std::string> pieces{"a", " +", " b", " *", " c"};
  CHECK(region_text(expand_on(pieces, " +"), pieces) == " +");
  CHECK(region_text(expand_on(pieces, " *"), pieces) == " b * c");
}

TEST_CASE("unary and prefix operators") {
  const std::vector<std::string> pieces{"x", " =", " !", "flag", ";"};
  CHECK(region_text(expand_on(pieces, " !"), pieces) == " !flag");
  const std::vector<std::string> pre{"y", " =", " ++", "V1", ";"};
  CHECK(region_text(expand_on(pre, " ++"), pre) == " ++V1");
  const std::vector<std::string> member{"a", ".", "b", "++", ";"};
  CHECK(region_text(expand_on(member, "++"), member) == "++");
}

TEST_CASE("negative literals take their sign after an operator or bracket") {
  const std::vector<std::string> pieces{"f", "(", "-", "5", ")"};
  CHECK(region_text(expand_on(pieces, "5"), pieces) == "-5");
  const std::vector<std::string> after_op{"x", " =", " -", "5", ";"};
  CHECK(region_text(expand_on(after_op, "5"), after_op) == " -5");
  // After an identifier the sign is a binary minus.
  const std::vector<std::string> after_id{"a", " -", "5"};
  CHECK(region_text(expand_on(after_id, "5"), after_id) == "5");
}

TEST_CASE("assignments do not absorb") {
  const std::vector<std::string> pieces{"x", " =", " 1", ";"};
  CHECK(region_text(expand_on(pieces, " ="), pieces) == " =");
}

TEST_CASE("expansion never crosses a statement terminator") {
  const std::vector<std::string> pieces{"a", "++", ";", "--", "b", ";"};
  for (std::size_t peak = 0; peak < pieces.size(); ++peak) {
    const auto records = t::flat_records(pieces);
    const Region r = expand(peak, 1.0, records, "s");
    const std::string text = region_text(r, pieces);
    if (pieces[peak] != ";") CHECK(text.find(';') == std::string::npos);
    CHECK(r.first_token <= peak);
    CHECK(peak <= r.last_token);
  }
}

TEST_CASE("merge overlapping and nearby regions") {
  const auto records = chars(20);
  SUBCASE("overlap") {
    const auto merged = merge({token_region(0, 4, 2, 1.0, records), token_region(3, 8, 5, 2.0, records)},
                              records);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].span == CharSpan{0, 9});
    CHECK(merged[0].peak_index == 5);
    CHECK(merged[0].peak_value == 2.0);
  }
  SUBCASE("one token gap") {
    CHECK(merge({token_region(0, 2, 1, 1.0, records), token_region(4, 6, 5, 1.0, records)}, records).size() == 1);
  }
  SUBCASE("three token gap") {
    CHECK(merge({token_region(0, 2, 1, 1.0, records), token_region(6, 8, 7, 1.0, records)}, records).size() == 2);
  }
  SUBCASE("ties keep the earlier peak") {
    const auto merged = merge({token_region(4, 6, 5, 3.0, records), token_region(0, 2, 1, 3.0, records)}, records);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].peak_index == 1);
  }
}

TEST_CASE("merge skips whitespace when counting the gap") {
  const std::vector<std::string> pieces{"a", " ", ";", " ", "b", "c"};
  const auto records = t::flat_records(pieces);
  CHECK(merge({token_region(0, 0, 0, 1.0, records), token_region(4, 4, 4, 1.0, records)}, records).size() == 1);
  CHECK(merge({token_region(0, 0, 0, 1.0, records), token_region(4, 4, 4, 1.0, records)}, records, 0).size() == 2);
}

TEST_CASE("merge recomputes metrics over the union") {
  const auto records = t::make_records({"a", "b", "c", "d"}, {std::nullopt, std::log(0.5), std::log(0.1), std::log(0.25)});
  const auto merged = merge({token_region(1, 1, 1, 1.0, records), token_region(2, 3, 2, 2.0, records)}, records);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].max_ppl == doctest::Approx(10.0));
  CHECK(merged[0].avg_ppl == doctest::Approx(std::cbrt(80.0)));
}

TEST_CASE("merge is idempotent and order independent") {
  const auto records = chars(60);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Region> regions;
    std::uniform_int_distribution<std::size_t> start(0, 55);
    std::uniform_int_distribution<std::size_t> width(0, 3);
    std::uniform_int_distribution<int> value(0, 4);
    for (int k = 0; k < 6; ++k) {
      const std::size_t first = start(rng);
      const std::size_t last = std::min<std::size_t>(59, first + width(rng));
      regions.push_back(token_region(first, last, first, value(rng), records));
    }
    const auto once = merge(regions, records);
    auto shuffled = regions;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto permuted = merge(shuffled, records);
    const auto twice = merge(once, records);
    REQUIRE(once.size() == permuted.size());
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(once[i].span == permuted[i].span);
      CHECK(once[i].peak_index == permuted[i].peak_index);
      CHECK(once[i].span == twice[i].span);
      CHECK(once[i].peak_index == twice[i].peak_index);
      CHECK(once[i].contains_token(once[i].peak_index));
    }
  }
}

TEST_CASE("aoi overlap by shared token") {
  const auto records = chars(10);
  Snippet s;
  s.id = "s";
  s.source = std::string(10, 'x');
  s.aois = {{5, 8}};
  CHECK(overlaps_aoi(token_region(4, 5, 4, 1, records), s, records));
  CHECK_FALSE(overlaps_aoi(token_region(0, 3, 1, 1, records), s, records));
  CHECK(overlaps_aoi(token_region(6, 6, 6, 1, records), s, records));
  CHECK(overlaps_aoi(CharSpan{4, 6}, s));
  CHECK_FALSE(overlaps_aoi(CharSpan{8, 10}, s));
}

TEST_CASE("aoi overlap uses token sets, not raw characters") {
  // The AOI covers part of token "abc"; a region on that token overlaps.
  const auto records = t::flat_records({"abc", "de"});
  Snippet s;
  s.id = "s";
  s.source = "abcde";
  s.aois = {{2, 3}};
  CHECK(overlaps_aoi(token_region(0, 0, 0, 1, records), s, records));
  CHECK_FALSE(overlaps_aoi(token_region(1, 1, 1, 1, records), s, records));
}

namespace {
Corpus small_corpus() {
  Snippet a;
  a.id = "p_clean";
  a.pair_id = "p";
  a.variant = Variant::clean;
  a.source = "int x = 1;";
  a.aois = {{8, 9}};
  Snippet b = a;
  b.id = "p_confusing";
  b.variant = Variant::confusing;
  b.source = "int x = 0x1;";
  b.aois = {{8, 11}, {0, 3}};
  return Corpus({a, b});
}
}  // namespace

TEST_CASE("overlap counts") {
  const Corpus corpus = small_corpus();
  SUBCASE("no detections") {
    const auto summary = overlap_counts({}, corpus);
    CHECK(summary.confusing.regions == 0);
    CHECK(summary.confusing.novel == 0);
    CHECK(summary.confusing.missed == 2);
    CHECK(summary.clean.missed == 1);
    CHECK(summary.confusing.detection_rate() == 0.0);
  }
  SUBCASE("one hit and one novel region") {
    Region hit;
    hit.snippet_id = "p_confusing";
    hit.span = {9, 10};
    Region novel = hit;
    novel.span = {4, 5};
    const std::vector<Region> regions{hit, novel};
    const auto summary = overlap_counts(regions, corpus);
    CHECK(summary.confusing.regions == 2);
    CHECK(summary.confusing.overlap == 1);
    CHECK(summary.confusing.novel == 1);
    CHECK(summary.confusing.hit == 1);
    CHECK(summary.confusing.missed == 1);
    CHECK(summary.confusing.detection_rate() == 0.5);
  }
  SUBCASE("unknown snippet") {
    Region r;
    r.snippet_id = "ghost";
    const std::vector<Region> regions{r};
    CHECK_THROWS_AS(overlap_counts(regions, corpus), DataError);
  }
}

TEST_CASE("region lines round trip") {
  Region r;
  r.snippet_id = "s";
  r.span = {3, 7};
  r.peak_index = 4;
  r.max_ppl = 555;
  r.avg_ppl = 9;
  r.category = SyntaxCategory::Operator;
  r.label = "update_expression";
  r.overlaps_aoi = true;
  const std::string line = serialize_region(r);
  const Region back = parse_region(line);
  CHECK(back.snippet_id == "s");
  CHECK(back.span == r.span);
  CHECK(back.peak_index == 4);
  CHECK(back.category == SyntaxCategory::Operator);
  CHECK(back.label == r.label);
  CHECK(back.overlaps_aoi);
  CHECK(serialize_region(back) == line);
  CHECK_THROWS_AS(parse_region("{\"snippet_id\":\"s\"}"), DataError);
}
