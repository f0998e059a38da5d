#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sys/wait.h>

#include "cli/commands.hpp"
#include "confusion_lens/backend.hpp"
#include "confusion_lens/corpus.hpp"
#include "confusion_lens/error.hpp"
#include "confusion_lens/json_format.hpp"
#include "confusion_lens/regions.hpp"
#include "support.hpp"

using namespace confusion_lens;
using namespace confusion_lens::cli;
namespace t = confusion_lens::testing;

namespace {

Snippet make_snippet(const std::string& pair, Variant v, const std::string& source,
                     std::vector<CharSpan> aois = {}) {
  Snippet s;
  s.pair_id = pair;
  s.variant = v;
  s.id = pair + (v == Variant::clean ? "_clean" : "_confusing");
  s.source = source;
  s.aois = std::move(aois);
  return s;
}

void write_corpus(const std::filesystem::path& path, const std::vector<Snippet>& snippets) {
  t::write_file(path, serialize_corpus(Corpus(snippets)));
}

void write_profiles(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::vector<TokenRecord>>>& items) {
  std::string text;
  for (const auto& [id, records] : items) text += serialize_profile(build_profile(id, records)) + "\n";
  t::write_file(path, text);
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(CONFUSION_LENS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::vector<std::string> kOperatorPieces{"int", " R", " =", " 3", " *", " V1", "--", ";"};

std::vector<TokenRecord> spiked(const std::vector<std::string>& pieces, std::size_t spike,
                                double spike_lp = -8.0) {
  auto records = t::flat_records(pieces, -1.0);
  records[spike].logprob = spike_lp;
  return records;
}

}  // namespace

TEST_CASE("ppl with the reference backend is deterministic") {
  t::TempDir dir("ppl");
  write_corpus(dir / "c.jsonl", {make_snippet("p", Variant::clean, "int x = 1;"),
                                 make_snippet("p", Variant::confusing, "int x = 0x1;")});
  PplOptions opts;
  opts.corpus = dir / "c.jsonl";
  Diagnostics d;
  const std::string first = run_ppl(opts, d);
  opts.jobs = 4;
  CHECK(run_ppl(opts, d) == first);
  CHECK(std::count(first.begin(), first.end(), '\n') == 2);
  CHECK(first.find("p_clean") < first.find("p_confusing"));
}

TEST_CASE("ppl succeeds from a warm cache with an unreachable endpoint") {
  t::TempDir dir("ppl_cache");
  const Snippet a = make_snippet("p", Variant::clean, "int x;");
  const Snippet b = make_snippet("p", Variant::confusing, "int y;");
  write_corpus(dir / "c.jsonl", {a, b});

  BackendConfig config = parse_backend_spec("http:http://127.0.0.1:1");
  HttpBackend http(config);
  {
    TokenCache cache(dir / "cache.jsonl");
    for (const auto* s : {&a, &b}) {
      cache.put(TokenCache::key_for(http, s->source), s->id,
                t::make_records({"int", s->source.substr(3)}, {std::nullopt, -2.0}));
    }
  }
  PplOptions opts;
  opts.corpus = dir / "c.jsonl";
  opts.backend = "http:http://127.0.0.1:1";
  opts.cache = dir / "cache.jsonl";
  opts.retries = 0;
  Diagnostics d;
  const std::string out = run_ppl(opts, d);
  CHECK(out.find("\"snippet_max\":7.38905609893") != std::string::npos);

  opts.cache.reset();
  CHECK_THROWS_AS(run_ppl(opts, d), BackendError);
}

TEST_CASE("ppl reports corrupt cache lines") {
  t::TempDir dir("ppl_corrupt");
  write_corpus(dir / "c.jsonl", {make_snippet("p", Variant::clean, "a;"),
                                 make_snippet("p", Variant::confusing, "b;")});
  t::write_file(dir / "cache.jsonl", "\n\nnot json\n");
  PplOptions opts;
  opts.corpus = dir / "c.jsonl";
  opts.cache = dir / "cache.jsonl";
  Diagnostics d;
  CHECK_THROWS_WITH_AS(run_ppl(opts, d), doctest::Contains("line 3"), DataError);
}

TEST_CASE("detect: an operator spike gives one Operator region") {
  t::TempDir dir("detect");
  const std::string source = t::concat(kOperatorPieces);
  const std::vector<std::string> clean_pieces{"int", " R", " =", " 3", ";"};
  write_corpus(dir / "c.jsonl", {make_snippet("p", Variant::clean, t::concat(clean_pieces)),
                                 make_snippet("p", Variant::confusing, source, {{source.find("V1--"), source.find(";")}})});
  write_profiles(dir / "p.jsonl", {{"p_clean", t::flat_records(clean_pieces)},
                                   {"p_confusing", spiked(kOperatorPieces, 6)}});
  DetectCommandOptions opts;
  opts.profiles = dir / "p.jsonl";
  opts.corpus = dir / "c.jsonl";
  Diagnostics d;
  const std::string out = run_detect(opts, d);
  REQUIRE(std::count(out.begin(), out.end(), '\n') == 1);
  const Region r = parse_region(out.substr(0, out.find('\n')));
  CHECK(r.snippet_id == "p_confusing");
  CHECK(r.category == SyntaxCategory::Operator);
  CHECK(r.label == "update_expression");
  CHECK(source.substr(r.span.start, r.span.length()) == " V1--");
  CHECK(r.overlaps_aoi);
  CHECK(r.max_ppl == doctest::Approx(std::exp(8.0)));
  CHECK_FALSE(d.partial);
}

TEST_CASE("detect: flat signals give no regions") {
  t::TempDir dir("detect_flat");
  write_corpus(dir / "c.jsonl", {make_snippet("p", Variant::clean, t::concat(kOperatorPieces)),
                                 make_snippet("p", Variant::confusing, t::concat(kOperatorPieces))});
  write_profiles(dir / "p.jsonl", {{"p_clean", t::flat_records(kOperatorPieces)},
                                   {"p_confusing", t::flat_records(kOperatorPieces)}});
  DetectCommandOptions opts;
  opts.profiles = dir / "p.jsonl";
  opts.corpus = dir / "c.jsonl";
  Diagnostics d;
  CHECK(run_detect(opts, d).empty());
}

TEST_CASE("detect: a spike on a lone semicolon is filtered as Punctuation") {
  t::TempDir dir("detect_semi");
  const std::vector<std::string> pieces{"int", " x", " =", " 1", ";", "\n", ";", "\n", "x", "++", ";"};
  write_corpus(dir / "c.jsonl", {make_snippet("p", Variant::clean, t::concat(pieces)),
                                 make_snippet("p", Variant::confusing, t::concat(pieces))});
  write_profiles(dir / "p.jsonl", {{"p_clean", spiked(pieces, 6)}, {"p_confusing", t::flat_records(pieces)}});
  DetectCommandOptions opts;
  opts.profiles = dir / "p.jsonl";
  opts.corpus = dir / "c.jsonl";
  Diagnostics d;
  CHECK(run_detect(opts, d).empty());
  opts.keep_filtered = true;
  const std::string kept = run_detect(opts, d);
  REQUIRE_FALSE(kept.empty());
  const Region r = parse_region(kept.substr(0, kept.find('\n')));
  CHECK(r.category == SyntaxCategory::Punctuation);
}

TEST_CASE("detect: unparsable snippets are skipped and flagged") {
  t::TempDir dir("detect_bad");
  const std::vector<std::string> bad{"int", " x", " =", " ;"};
  write_corpus(dir / "c.jsonl", {make_snippet("p", Variant::clean, t::concat(bad)),
                                 make_snippet("p", Variant::confusing, t::concat(kOperatorPieces))});
  write_profiles(dir / "p.jsonl", {{"p_clean", spiked(bad, 2)},
                                   {"p_confusing", spiked(kOperatorPieces, 6)}});
  DetectCommandOptions opts;
  opts.profiles = dir / "p.jsonl";
  opts.corpus = dir / "c.jsonl";
  Diagnostics d;
  const std::string out = run_detect(opts, d);
  CHECK(d.partial);
  REQUIRE(d.warnings.size() >= 1);
  CHECK(d.warnings[0].find("p_clean") != std::string::npos);
  CHECK(out.find("p_confusing") != std::string::npos);
}

namespace {
// Six pairs; confusing tokens are always less likely than clean ones.
void dominating_fixture(const t::TempDir& dir) {
  std::vector<Snippet> snippets;
  std::vector<std::pair<std::string, std::vector<TokenRecord>>> profiles;
  for (int i = 0; i < 6; ++i) {
    const std::string pair = "p" + std::to_string(i);
    const std::vector<std::string> pieces{"a", "b", "c", "d"};
    snippets.push_back(make_snippet(pair, Variant::clean, "abcd", {{1, 2}}));
    snippets.push_back(make_snippet(pair, Variant::confusing, "abcd", {{1, 2}}));
    profiles.push_back({pair + "_clean", t::flat_records(pieces, -1.0)});
    profiles.push_back({pair + "_confusing", t::flat_records(pieces, -1.0 - 0.1 * (i + 1))});
  }
  write_corpus(dir / "c.jsonl", snippets);
  write_profiles(dir / "p.jsonl", profiles);
}
}  // namespace

TEST_CASE("compare: dominating confusing values") {
  t::TempDir dir("compare");
  dominating_fixture(dir);
  CompareOptions opts;
  opts.profiles = dir / "p.jsonl";
  opts.corpus = dir / "c.jsonl";
  Diagnostics d;
  const Json j = Json::parse(run_compare(opts, d));
  CHECK(j["w_minus"] == 0);
  CHECK(j["p"].get<double>() < 0.05);
  CHECK(j["level"] == "snippet");
  CHECK(j["metric"] == "avg");
  CHECK(j["n"] == 6);
  CHECK(j["pairs"].size() == 6);

  opts.all = true;
  const Json all = Json::parse(run_compare(opts, d));
  REQUIRE(all["results"].size() == 4);
  std::vector<std::string> labels;
  for (const auto& r : all["results"]) labels.push_back(r["level"].get<std::string>() + "/" + r["metric"].get<std::string>());
  CHECK(labels == std::vector<std::string>{"snippet/avg", "snippet/max", "aoi/avg", "aoi/max"});
}

TEST_CASE("compare: identical pairs") {
  t::TempDir dir("compare_same");
  const std::vector<std::string> pieces{"a", "b"};
  write_corpus(dir / "c.jsonl", {make_snippet("p", Variant::clean, "ab"), make_snippet("p", Variant::confusing, "ab")});
  write_profiles(dir / "p.jsonl", {{"p_clean", t::flat_records(pieces)}, {"p_confusing", t::flat_records(pieces)}});
  CompareOptions opts;
  opts.profiles = dir / "p.jsonl";
  opts.corpus = dir / "c.jsonl";
  Diagnostics d;
  CHECK_THROWS_WITH_AS(run_compare(opts, d), doctest::Contains("all differences zero"), DataError);
}

TEST_CASE("correlate: planted identity gives rho 1 per variant") {
  t::TempDir dir("correlate");
  std::vector<Snippet> snippets;
  std::string regions;
  std::string csv = "snippet_id,start,end,value\n";
  for (int i = 0; i < 5; ++i) {
    const std::string pair = "p" + std::to_string(i);
    for (Variant v : {Variant::clean, Variant::confusing}) {
      snippets.push_back(make_snippet(pair, v, "int x = 1;"));
      Region r;
      r.snippet_id = snippets.back().id;
      r.span = {4, 5};
      r.max_ppl = 10.0 + i * (v == Variant::clean ? 1 : 7);
      r.avg_ppl = 2.0;
      regions += serialize_region(r) + "\n";
      // Measurements are a monotone function of max_ppl.
      csv += r.snippet_id + ",4,6," + std::to_string(std::log(r.max_ppl)) + "\n";
    }
  }
  write_corpus(dir / "c.jsonl", snippets);
  t::write_file(dir / "r.jsonl", regions);
  t::write_file(dir / "m.csv", csv);
  CorrelateOptions opts;
  opts.regions = dir / "r.jsonl";
  opts.corpus = dir / "c.jsonl";
  opts.measurements = dir / "m.csv";
  Diagnostics d;
  const Json j = Json::parse(run_correlate(opts, d));
  CHECK(j["clean"]["rho"] == 1);
  CHECK(j["confusing"]["rho"] == 1);
  CHECK(j["mode"] == "regions");

  opts.clustered = true;
  opts.replicates = 200;
  const Json b = Json::parse(run_correlate(opts, d));
  CHECK(b["confusing"]["test"] == "spearman_clustered_bootstrap");
  CHECK(b["confusing"]["ci"] == Json::array({1, 1}));

  t::write_file(dir / "bad.csv", "snippet_id,start,end,value\np0_clean,0,2,1\n");
  opts.measurements = dir / "bad.csv";
  CHECK_THROWS_WITH_AS(run_correlate(opts, d), doctest::Contains("unresolved"), DataError);
}

TEST_CASE("correlate: shuffled measurements give a CI straddling zero") {
  t::TempDir dir("correlate_null");
  std::vector<Snippet> snippets;
  std::string regions;
  std::string csv = "snippet_id,start,end,value\n";
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const std::string pair = "p" + std::to_string(i);
    for (Variant v : {Variant::clean, Variant::confusing}) {
      snippets.push_back(make_snippet(pair, v, "int x = 1; int y = 2;"));
      for (std::size_t start : {4u, 15u}) {
        Region r;
        r.snippet_id = snippets.back().id;
        r.span = {start, start + 1};
        r.max_ppl = 1.0 + 100.0 * u(rng);
        regions += serialize_region(r) + "\n";
        csv += r.snippet_id + "," + std::to_string(start) + "," + std::to_string(start + 1) + "," +
               std::to_string(u(rng)) + "\n";
      }
    }
  }
  write_corpus(dir / "c.jsonl", snippets);
  t::write_file(dir / "r.jsonl", regions);
  t::write_file(dir / "m.csv", csv);
  CorrelateOptions opts;
  opts.regions = dir / "r.jsonl";
  opts.corpus = dir / "c.jsonl";
  opts.measurements = dir / "m.csv";
  opts.clustered = true;
  opts.replicates = 1000;
  opts.seed = 3;
  Diagnostics d;
  const Json j = Json::parse(run_correlate(opts, d));
  for (const char* v : {"clean", "confusing"}) {
    CHECK(std::abs(j[v]["rho"].get<double>()) < 0.3);
    CHECK(j[v]["ci"][0].get<double>() < 0.0);
    CHECK(j[v]["ci"][1].get<double>() > 0.0);
    CHECK(j[v]["seed"] == 3);
  }
}

TEST_CASE("overlap: 64 percent of AOIs hit") {
  t::TempDir dir("overlap");
  std::vector<Snippet> snippets;
  std::string regions;
  for (int i = 0; i < 25; ++i) {
    const std::string pair = "p" + std::to_string(i);
    snippets.push_back(make_snippet(pair, Variant::clean, "int x = 1;"));
    snippets.push_back(make_snippet(pair, Variant::confusing, "int x = 0x1;", {{8, 11}}));
    if (i < 16) {
      Region r;
      r.snippet_id = pair + "_confusing";
      r.span = {9, 11};
      regions += serialize_region(r) + "\n";
    }
  }
  write_corpus(dir / "c.jsonl", snippets);
  t::write_file(dir / "r.jsonl", regions);
  OverlapOptions opts;
  opts.regions = dir / "r.jsonl";
  opts.corpus = dir / "c.jsonl";
  Diagnostics d;
  const Json j = Json::parse(run_overlap(opts, d));
  CHECK(j["confusing"]["detection_rate"] == 0.64);
  CHECK(j["confusing"]["missed"] == 9);
  CHECK(j["confusing"]["novel"] == 0);

  t::write_file(dir / "none.jsonl", "");
  opts.regions = dir / "none.jsonl";
  const Json none = Json::parse(run_overlap(opts, d));
  CHECK(none["confusing"]["novel"] == 0);
  CHECK(none["confusing"]["missed"] == 25);
}

TEST_CASE("report renders a heat strip with underlines") {
  t::TempDir dir("report");
  const std::string source = t::concat(kOperatorPieces);
  write_corpus(dir / "c.jsonl", {make_snippet("p", Variant::clean, source), make_snippet("p", Variant::confusing, source)});
  write_profiles(dir / "p.jsonl", {{"p_clean", t::flat_records(kOperatorPieces)}, {"p_confusing", spiked(kOperatorPieces, 6)}});
  Region r;
  r.snippet_id = "p_confusing";
  r.span = {source.find(" V1--"), source.find(";")};
  t::write_file(dir / "r.jsonl", serialize_region(r) + "\n");
  ReportOptions opts;
  opts.profiles = dir / "p.jsonl";
  opts.corpus = dir / "c.jsonl";
  opts.regions = dir / "r.jsonl";
  opts.snippet = "p_confusing";
  Diagnostics d;
  const std::string out = run_report(opts, d);
  CHECK(out.find("p_confusing") != std::string::npos);
  CHECK(out.find("p_clean") == std::string::npos);
  CHECK(out.find('@') != std::string::npos);
  CHECK(out.find("^^^^") != std::string::npos);
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  std::vector<int> hit(100, 0);
  parallel_for(100, 8, [&](std::size_t i) { hit[i] = 1; });
  CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i % 10 == 7) throw DataError("index " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()) == "index 7");
  }
}

TEST_CASE("option parsing helpers") {
  CHECK(parse_level("aoi") == Level::aoi);
  CHECK(parse_metric("max") == Metric::max);
  CHECK_THROWS_AS(parse_level("token"), UsageError);
  CHECK_THROWS_AS(parse_metric("median"), UsageError);
}

TEST_CASE("binary exit codes") {
  t::TempDir dir("exit");
  const auto corpus = (dir / "c.jsonl").string();
  write_corpus(corpus, {make_snippet("p", Variant::clean, "int x;"), make_snippet("p", Variant::confusing, "int y;")});
  CHECK(run_binary("ppl --corpus " + corpus + " --out " + (dir / "p.jsonl").string()) == 0);
  CHECK(run_binary("compare --profiles " + (dir / "p.jsonl").string() + " --corpus " + corpus + " --level nope") == 1);
  CHECK(run_binary("frobnicate") == 1);
  t::write_file(dir / "bad.jsonl", "{\"id\":\"a\"}\n");
  CHECK(run_binary("ppl --corpus " + (dir / "bad.jsonl").string()) == 2);
  CHECK(run_binary("ppl --corpus " + corpus + " --backend http:http://127.0.0.1:1 --retries 0") == 3);
}
