#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"

#include "clinev/corpus.hpp"
#include "clinev/errors.hpp"
#include "support/generators.hpp"

using namespace clinev;

namespace {

std::filesystem::path write_temp(const std::string& name,
                                 const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

Corpus random_corpus(testgen::Rng& rng, std::size_t n) {
  Corpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    corpus.records.push_back(
        testgen::random_record(rng, "rec" + std::to_string(i), 4));
  }
  return corpus;
}

}  // namespace

TEST_SUITE("corpus_tools") {

TEST_CASE("load a one-record corpus") {
  const auto path = write_temp(
      "clinev_load.jsonl",
      R"({"id":"r1","text":"postoperative of rectal cancer","events":)"
      R"([{"core_name":"cancer","tendency":"yes",)"
      R"("characteristics":["postoperation"],"anatomies":["rectum"]}]})"
      "\n");
  const Corpus corpus = load_corpus(path);
  REQUIRE(corpus.records.size() == 1);
  REQUIRE(corpus.records[0].events.size() == 1);
  const auto& e = corpus.records[0].events[0];
  CHECK(e.core_name == "cancer");
  CHECK(e.tendency == "yes");
  CHECK(e.characteristics == std::vector<std::string>{"postoperation"});
  CHECK(e.anatomies == std::vector<std::string>{"rectum"});
}

TEST_CASE("empty file loads as empty corpus") {
  const auto path = write_temp("clinev_empty.jsonl", "");
  CHECK(load_corpus(path).records.empty());
}

TEST_CASE("missing core_name is a schema error with the line number") {
  const auto path = write_temp(
      "clinev_schema.jsonl",
      R"({"id":"r1","text":"t","events":[]})"
      "\n"
      R"({"id":"r2","text":"t","events":[{"tendency":"yes"}]})"
      "\n");
  try {
    load_corpus(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line == 2);
    CHECK(e.field == "core_name");
  }
}

TEST_CASE("malformed json is a parse error with the line number") {
  const auto path = write_temp("clinev_parse.jsonl",
                               "{\"id\":\"r1\",\"text\":\"t\",\"events\":[]}\n"
                               "{nope\n");
  try {
    load_corpus(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("duplicate ids are rejected") {
  const auto path = write_temp(
      "clinev_dup.jsonl",
      R"({"id":"r1","text":"t","events":[]})"
      "\n"
      R"({"id":"r1","text":"t","events":[]})"
      "\n");
  CHECK_THROWS_AS(load_corpus(path), DuplicateId);
}

TEST_CASE("events are normalized on load") {
  const auto path = write_temp(
      "clinev_norm.jsonl",
      R"({"id":"r1","text":"t","events":[{"core_name":" a ",)"
      R"("characteristics":["x","x",""]}]})"
      "\n");
  const Corpus corpus = load_corpus(path);
  const auto& e = corpus.records[0].events[0];
  CHECK(e.core_name == "a");
  CHECK(e.characteristics == std::vector<std::string>{"x"});
}

TEST_CASE("bad span is a schema error") {
  const auto path = write_temp(
      "clinev_span.jsonl",
      R"({"id":"r1","text":"abc","events":[{"core_name":"zz",)"
      R"("core_span":[0,2]}]})"
      "\n");
  CHECK_THROWS_AS(load_corpus(path), SchemaError);
}

TEST_CASE("save then load is identity") {
  testgen::Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const Corpus corpus = random_corpus(rng, rng.below(8));
    const auto path = write_temp("clinev_roundtrip.jsonl", "");
    save_corpus(corpus, path);
    const Corpus reloaded = load_corpus(path);
    REQUIRE(reloaded.records.size() == corpus.records.size());
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
      CHECK(reloaded.records[i] == corpus.records[i]);
    }
  }
}

TEST_CASE("saved bytes are stable") {
  testgen::Rng rng(56);
  const Corpus corpus = random_corpus(rng, 5);
  const auto path1 = write_temp("clinev_stable1.jsonl", "");
  save_corpus(corpus, path1);
  const Corpus reloaded = load_corpus(path1);
  const auto path2 = write_temp("clinev_stable2.jsonl", "");
  save_corpus(reloaded, path2);
  std::ifstream a(path1), b(path2);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("split produces the paper-sized partition") {
  testgen::Rng rng(57);
  const Corpus corpus = random_corpus(rng, 40);
  const auto [train, valid] = split_corpus(corpus, 30, 7);
  CHECK(train.records.size() == 30);
  CHECK(valid.records.size() == 10);
  std::set<std::string> ids;
  for (const auto& r : train.records) ids.insert(r.record.id);
  for (const auto& r : valid.records) ids.insert(r.record.id);
  CHECK(ids.size() == 40);  // disjoint union, nothing lost
}

TEST_CASE("split is deterministic per seed") {
  testgen::Rng rng(58);
  const Corpus corpus = random_corpus(rng, 30);
  const auto [t1, v1] = split_corpus(corpus, 20, 42);
  const auto [t2, v2] = split_corpus(corpus, 20, 42);
  CHECK(t1.records.size() == t2.records.size());
  for (std::size_t i = 0; i < t1.records.size(); ++i) {
    CHECK(t1.records[i].record.id == t2.records[i].record.id);
  }
  const auto [t3, v3] = split_corpus(corpus, 20, 43);
  bool same = true;
  for (std::size_t i = 0; i < t1.records.size(); ++i) {
    if (t1.records[i].record.id != t3.records[i].record.id) same = false;
  }
  CHECK_FALSE(same);
}

TEST_CASE("split edge cases") {
  testgen::Rng rng(59);
  const Corpus corpus = random_corpus(rng, 5);
  const auto [t, v] = split_corpus(corpus, 0, 1);
  CHECK(t.records.empty());
  CHECK(v.records.size() == 5);
  CHECK_THROWS_AS(split_corpus(corpus, 6, 1), SizeError);
}

TEST_CASE("split preserves event totals") {
  testgen::Rng rng(60);
  for (int trial = 0; trial < 20; ++trial) {
    const Corpus corpus = random_corpus(rng, rng.below(20));
    const std::size_t take = rng.below(corpus.records.size() + 1);
    const auto [train, valid] = split_corpus(corpus, take, trial);
    CHECK(count_events(train) + count_events(valid) == count_events(corpus));
  }
}

TEST_CASE("histogram buckets and threshold fractions") {
  Corpus corpus;
  const auto add = [&](const std::string& id, std::size_t len) {
    AnnotatedRecord rec;
    rec.record.id = id;
    rec.record.text = std::string(len, 'x');
    corpus.records.push_back(rec);
  };
  add("a", 10);
  add("b", 150);
  add("c", 250);
  const LengthHistogram hist = length_histogram(corpus, 100, {200});
  CHECK(hist.total == 3);
  CHECK(hist.buckets.at(0) == 1);
  CHECK(hist.buckets.at(1) == 1);
  CHECK(hist.buckets.at(2) == 1);
  REQUIRE(hist.threshold_fractions.size() == 1);
  CHECK(hist.threshold_fractions[0].second ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(hist.fractions_defined);
}

TEST_CASE("histogram length is in code points") {
  Corpus corpus;
  AnnotatedRecord rec;
  rec.record.id = "zh";
  rec.record.text = "大便正常";  // 4 code points, 12 bytes
  corpus.records.push_back(rec);
  const LengthHistogram hist = length_histogram(corpus, 2, {});
  CHECK(hist.buckets.at(2) == 1);
}

TEST_CASE("empty corpus histogram is flagged") {
  const LengthHistogram hist = length_histogram(Corpus{}, 10, {200});
  CHECK(hist.total == 0);
  CHECK_FALSE(hist.fractions_defined);
  CHECK(hist.threshold_fractions[0].second == 0.0);
}

TEST_CASE("histogram totals match corpus size for any width") {
  testgen::Rng rng(61);
  const Corpus corpus = random_corpus(rng, 25);
  for (const std::size_t width : {1, 3, 10, 1000}) {
    const LengthHistogram hist = length_histogram(corpus, width, {});
    std::size_t sum = 0;
    for (const auto& [bucket, count] : hist.buckets) sum += count;
    CHECK(sum == hist.total);
    CHECK(hist.total == corpus.records.size());
  }
}

TEST_CASE("histogram csv") {
  Corpus corpus;
  AnnotatedRecord rec;
  rec.record.id = "a";
  rec.record.text = "12345";
  corpus.records.push_back(rec);
  const std::string csv = histogram_to_csv(length_histogram(corpus, 2, {}));
  CHECK(csv ==
        "bucket_start,bucket_end,count\n0,2,0\n2,4,0\n4,6,1\n");
}

TEST_CASE("count_events") {
  CHECK(count_events(Corpus{}) == 0);
  testgen::Rng rng(62);
  Corpus corpus = random_corpus(rng, 2);
  std::size_t expected = 0;
  for (const auto& r : corpus.records) expected += r.events.size();
  CHECK(count_events(corpus) == expected);
}

TEST_CASE("prediction files may carry raw output strings") {
  const auto gold_path = write_temp(
      "clinev_pred_gold.jsonl",
      R"({"id":"r1","text":"rectal cancer","events":[]})"
      "\n");
  const Corpus gold = load_corpus(gold_path);
  const auto pred_path = write_temp(
      "clinev_pred.jsonl",
      R"({"id":"r1","output":"<ent>cancer<tendency>yes<character><null>)"
      R"(<anatomy>rectum"})"
      "\n");
  PredictionLoadStats stats;
  const Corpus pred = load_predictions(pred_path, OutputFormat::SpecialToken,
                                       gold, &stats);
  REQUIRE(pred.records.size() == 1);
  CHECK(pred.records[0].record.text == "rectal cancer");  // joined from gold
  REQUIRE(pred.records[0].events.size() == 1);
  CHECK(pred.records[0].events[0].core_name == "cancer");
  CHECK(stats.decoded_lines == 1);
}

TEST_CASE("prediction with unknown id throws") {
  const auto gold_path = write_temp(
      "clinev_pred_gold2.jsonl",
      R"({"id":"r1","text":"t","events":[]})"
      "\n");
  const Corpus gold = load_corpus(gold_path);
  const auto pred_path = write_temp(
      "clinev_pred2.jsonl",
      R"({"id":"zz","output":""})"
      "\n");
  CHECK_THROWS_AS(
      load_predictions(pred_path, OutputFormat::SpecialToken, gold, nullptr),
      UnknownRecordId);
}

TEST_CASE("core frequencies") {
  testgen::Rng rng(63);
  const Corpus corpus = random_corpus(rng, 10);
  const auto freq = core_frequencies(corpus);
  std::size_t total = 0;
  for (const auto& [core, n] : freq) total += n;
  CHECK(total == count_events(corpus));
}

}  // TEST_SUITE
