#include <doctest.h>

#include <sstream>

#include "confusion_lens/corpus.hpp"
#include "confusion_lens/error.hpp"
#include "support.hpp"

using namespace confusion_lens;

namespace {

std::string line(const std::string& id, const std::string& pair, const std::string& variant,
                 const std::string& source, const std::string& aois = "[]") {
  return R"({"id":")" + id + R"(","pair_id":")" + pair + R"(","variant":")" + variant +
         R"(","language":"java","source":")" + source + R"(","aois":)" + aois + "}\n";
}

Corpus read(const std::string& text) {
  std::istringstream in(text);
  return read_corpus(in, "test.jsonl");
}

std::string error_of(const std::string& text) {
  try {
    read(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("a clean/confusing pair loads with its pairing index") {
  const Corpus c = read(line("p1_clean", "p1", "clean", "int x = 1;") +
                        line("p1_conf", "p1", "confusing", "int x = 1 + 0;", R"([{"start":8,"end":13}])"));
  REQUIRE(c.size() == 2);
  REQUIRE(c.pairs().size() == 1);
  const SnippetPair& p = c.pairs().at("p1");
  CHECK(c.clean_of(p).id == "p1_clean");
  CHECK(c.confusing_of(p).id == "p1_conf");
  CHECK(c.at("p1_conf").aois == std::vector<CharSpan>{{8, 13}});
}

TEST_CASE("the bundled table corpus has 11 pairs") {
  const Corpus c = load_corpus(testing::source_dir() / "data" / "table1_corpus.jsonl");
  CHECK(c.size() == 22);
  CHECK(c.pairs().size() == 11);
  for (const auto& [id, pair] : c.pairs()) {
    CHECK(c.clean_of(pair).variant == Variant::clean);
    CHECK(c.confusing_of(pair).variant == Variant::confusing);
    CHECK(c.clean_of(pair).pair_id == c.confusing_of(pair).pair_id);
  }
}

TEST_CASE("72 pairs give 144 snippets and 72 pair entries") {
  std::string text;
  for (int i = 0; i < 72; ++i) {
    const std::string p = "p" + std::to_string(i);
    text += line(p + "a", p, "clean", "x;") + line(p + "b", p, "confusing", "y;");
  }
  const Corpus c = read(text);
  CHECK(c.size() == 144);
  CHECK(c.pairs().size() == 72);
}

TEST_CASE("corpus validation errors") {
  SUBCASE("aoi past the end") {
    const auto msg = error_of(line("a", "p", "clean", "abc", R"([{"start":1,"end":9}])") +
                              line("b", "p", "confusing", "abc"));
    CHECK(msg.find("aoi out of bounds") != std::string::npos);
  }
  SUBCASE("duplicate id") {
    const auto msg = error_of(line("a", "p", "clean", "x") + line("a", "p", "confusing", "y"));
    CHECK(msg.find("duplicate snippet id") != std::string::npos);
  }
  SUBCASE("unpaired") {
    const auto msg = error_of(line("a", "p", "clean", "x"));
    CHECK(msg.find("unpaired pair_id") != std::string::npos);
  }
  SUBCASE("two clean variants") {
    const auto msg = error_of(line("a", "p", "clean", "x") + line("b", "p", "clean", "y"));
    CHECK(msg.find("unpaired pair_id") != std::string::npos);
  }
  SUBCASE("malformed line reports its number") {
    const auto msg = error_of(line("a", "p", "clean", "x") + "{not json\n");
    CHECK(msg.find("test.jsonl:2") != std::string::npos);
  }
  SUBCASE("overlapping aois") {
    const auto msg = error_of(line("a", "p", "clean", "abcdef", R"([{"start":0,"end":3},{"start":2,"end":4}])") +
                              line("b", "p", "confusing", "y"));
    CHECK(msg.find("overlapping") != std::string::npos);
  }
  SUBCASE("empty aoi") {
    CHECK_FALSE(error_of(line("a", "p", "clean", "abc", R"([{"start":1,"end":1}])") +
                         line("b", "p", "confusing", "y"))
                    .empty());
  }
  SUBCASE("aoi inside a multi-byte character") {
    CHECK_FALSE(error_of(line("a", "p", "clean", "éx", R"([{"start":1,"end":3}])") +
                         line("b", "p", "confusing", "y"))
                    .empty());
  }
}

TEST_CASE("aois are normalized to start order and addressable by index") {
  const Corpus c = read(line("a", "p", "clean", "0123456789012345678901234567",
                             R"([{"start":20,"end":25},{"start":3,"end":7}])") +
                        line("b", "p", "confusing", "y"));
  const Snippet& s = c.at("a");
  CHECK(aoi_of(s, 0) == CharSpan{3, 7});
  CHECK(aoi_of(s, 1) == CharSpan{20, 25});
  CHECK_THROWS_AS(aoi_of(s, 2), DataError);
}

TEST_CASE("aoi_of single aoi") {
  Snippet s;
  s.source = std::string(20, 'x');
  s.aois = {{10, 16}};
  CHECK(aoi_of(s, 0) == CharSpan{10, 16});
  CHECK_THROWS_AS(aoi_of(s, 1), DataError);
}

TEST_CASE("serialize(load(file)) is a fixed point") {
  const std::string text = testing::read_file(testing::source_dir() / "data" / "table1_corpus.jsonl");
  const Corpus c = read(text);
  const std::string once = serialize_corpus(c);
  const std::string twice = serialize_corpus(read(once));
  CHECK(once == twice);
  CHECK(read(once).snippets().size() == c.snippets().size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(read(once).snippets()[i].source == c.snippets()[i].source);
    CHECK(read(once).snippets()[i].aois == c.snippets()[i].aois);
  }
}
