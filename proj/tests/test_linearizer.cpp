#include <string>

#include "doctest.h"

#include "clinev/errors.hpp"
#include "clinev/linearizer.hpp"
#include "clinev/unicode.hpp"
#include "support/generators.hpp"

using namespace clinev;

namespace {

ClinicalEvent table1_event() {
  ClinicalEvent e;
  e.core_name = "cancer";
  e.tendency = "yes";
  e.characteristics = {"postoperation"};
  e.anatomies = {"rectum"};
  return e;
}

}  // namespace

TEST_SUITE("linearizer") {

TEST_CASE("golden encode in both formats") {
  const std::vector<ClinicalEvent> events = {table1_event()};
  CHECK(encode_events(events, OutputFormat::SpecialToken) ==
        "<ent>cancer<tendency>yes<character>postoperation<anatomy>rectum");
  CHECK(encode_events(events, OutputFormat::Baseline) ==
        "cancer<p>yes<p>postoperation<p>rectum");
}

TEST_CASE("golden decode inverts both formats with no diagnostics") {
  const std::vector<ClinicalEvent> events = {table1_event()};
  for (const auto format :
       {OutputFormat::SpecialToken, OutputFormat::Baseline}) {
    const DecodeResult r = decode_events(encode_events(events, format), format);
    REQUIRE(r.diagnostics.empty());
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0] == events[0]);
  }
}

TEST_CASE("multi-valued characteristics join with the separator") {
  ClinicalEvent e;
  e.core_name = "symptoms";
  e.tendency = "yes";
  e.characteristics = {"recurrence", "no incentives", "sudden occurrence"};
  const std::string s = encode_events({e}, OutputFormat::SpecialToken);
  CHECK(s ==
        "<ent>symptoms<tendency>yes<character>recurrence<unk>no "
        "incentives<unk>sudden occurrence<anatomy><null>");
  const DecodeResult r = decode_events(s, OutputFormat::SpecialToken);
  CHECK(r.diagnostics.empty());
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0] == e);
}

TEST_CASE("null tags decode to absent slots") {
  const DecodeResult r = decode_events(
      "<ent>stool<tendency><null><character>white pottery stool<anatomy>"
      "<null>",
      OutputFormat::SpecialToken);
  CHECK(r.diagnostics.empty());
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].core_name == "stool");
  CHECK_FALSE(r.events[0].tendency.has_value());
  CHECK(r.events[0].characteristics ==
        std::vector<std::string>{"white pottery stool"});
  CHECK(r.events[0].anatomies.empty());
}

TEST_CASE("empty input decodes to nothing") {
  for (const auto format :
       {OutputFormat::SpecialToken, OutputFormat::Baseline}) {
    const DecodeResult r = decode_events("", format);
    CHECK(r.events.empty());
    CHECK(r.diagnostics.empty());
  }
  CHECK(encode_events({}, OutputFormat::SpecialToken).empty());
  CHECK(encode_events({}, OutputFormat::Baseline).empty());
}

TEST_CASE("missing slots are recovered with diagnostics") {
  const DecodeResult r =
      decode_events("<ent>cough<character>dark red", OutputFormat::SpecialToken);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].core_name == "cough");
  CHECK_FALSE(r.events[0].tendency.has_value());
  CHECK(r.events[0].characteristics == std::vector<std::string>{"dark red"});
  CHECK(r.events[0].anatomies.empty());
  REQUIRE(r.diagnostics.size() == 2);
  CHECK(r.diagnostics[0].kind == DiagnosticKind::MissingSlot);
  CHECK(r.diagnostics[1].kind == DiagnosticKind::MissingSlot);
}

TEST_CASE("text before the first event marker") {
  const DecodeResult r = decode_events(
      "noise<ent>a<tendency>t<character><null><anatomy><null>",
      OutputFormat::SpecialToken);
  REQUIRE(r.events.size() == 1);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].kind == DiagnosticKind::TrailingGarbage);
  CHECK(r.diagnostics[0].position == 0);
}

TEST_CASE("empty core drops the event") {
  const DecodeResult r = decode_events(
      "<ent><tendency>yes<character>x<anatomy><null>",
      OutputFormat::SpecialToken);
  CHECK(r.events.empty());
  REQUIRE(!r.diagnostics.empty());
  CHECK(r.diagnostics[0].kind == DiagnosticKind::EmptyAttribute);
}

TEST_CASE("stray and out-of-order tokens become diagnostics") {
  const DecodeResult r = decode_events(
      "<ent>a<unk>b<tendency>t<character>c<tendency>d<anatomy><null>",
      OutputFormat::SpecialToken);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].core_name == "ab");  // separator dropped, text merged
  CHECK(r.events[0].characteristics == std::vector<std::string>{"cd"});
  std::size_t unexpected = 0;
  for (const auto& d : r.diagnostics) {
    if (d.kind == DiagnosticKind::UnexpectedToken) ++unexpected;
  }
  CHECK(unexpected == 2);
}

TEST_CASE("decode never throws on fuzzed input") {
  testgen::Rng rng(2024);
  const std::vector<std::string> atoms = {
      "<ent>", "<tendency>", "<character>", "<anatomy>", "<unk>",
      "<null>", "<p>",       "a",           "xy",        " ",
      "大便",   "<",          ">",           "en",        "t>"};
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const std::size_t n = rng.below(12);
    for (std::size_t k = 0; k < n; ++k) s += rng.pick(atoms);
    for (const auto format :
         {OutputFormat::SpecialToken, OutputFormat::Baseline}) {
      const DecodeResult r = decode_events(s, format);
      const std::size_t len = utf8::length(s);
      for (const auto& d : r.diagnostics) {
        CHECK(d.position <= len);
      }
      for (const auto& e : r.events) {
        CHECK(!e.core_name.empty());
      }
    }
  }
}

TEST_CASE("round trip property in both formats") {
  testgen::Rng rng(7);
  int baseline_eligible = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto events = testgen::random_event_list(rng, 5, true);
    CHECK(roundtrip_check(events, OutputFormat::SpecialToken));
    // Baseline is only invertible when every multi-slot has <= 1 value.
    bool single_valued = true;
    for (const auto& e : events) {
      if (e.characteristics.size() > 1 || e.anatomies.size() > 1) {
        single_valued = false;
      }
    }
    if (single_valued) {
      ++baseline_eligible;
      CHECK(roundtrip_check(events, OutputFormat::Baseline));
    }
  }
  CHECK(baseline_eligible > 50);
}

TEST_CASE("single event encoding is prefix-free and slot-complete") {
  testgen::Rng rng(8);
  const TokenSet tokens;
  for (int i = 0; i < 200; ++i) {
    const ClinicalEvent e = testgen::random_event(rng, true);
    const std::string s = encode_events({e}, OutputFormat::SpecialToken);
    CHECK(s.rfind(tokens.ent, 0) == 0);
    const auto count = [&](const std::string& lit) {
      std::size_t n = 0;
      for (std::size_t pos = s.find(lit); pos != std::string::npos;
           pos = s.find(lit, pos + lit.size())) {
        ++n;
      }
      return n;
    };
    CHECK(count(tokens.ent) == 1);
    CHECK(count(tokens.tendency) == 1);
    CHECK(count(tokens.character) == 1);
    CHECK(count(tokens.anatomy) == 1);
  }
}

TEST_CASE("baseline multi-event decode by fixed arity") {
  ClinicalEvent a = table1_event();
  ClinicalEvent b;
  b.core_name = "stool";
  const std::string s = encode_events({a, b}, OutputFormat::Baseline);
  CHECK(s ==
        "cancer<p>yes<p>postoperation<p>rectum<p>stool<p><null><p><null><p>"
        "<null>");
  const DecodeResult r = decode_events(s, OutputFormat::Baseline);
  CHECK(r.diagnostics.empty());
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0] == a);
  CHECK(r.events[1] == b);
}

TEST_CASE("baseline tail group reports missing slots") {
  const DecodeResult r = decode_events("a<p>yes<p>c<p>d<p>tail",
                                       OutputFormat::Baseline);
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[1].core_name == "tail");
  std::size_t missing = 0;
  for (const auto& d : r.diagnostics) {
    if (d.kind == DiagnosticKind::MissingSlot) ++missing;
  }
  CHECK(missing == 3);
}

TEST_CASE("encode validates events") {
  ClinicalEvent bad;
  bad.core_name = "";
  CHECK_THROWS_AS(encode_events({bad}, OutputFormat::SpecialToken),
                  InvalidEvent);
  bad.core_name = "a<null>b";
  CHECK_THROWS_AS(encode_events({bad}, OutputFormat::SpecialToken),
                  InvalidEvent);
}

TEST_CASE("custom token set is a config change") {
  TokenSet tokens;
  tokens.tendency = "<tency>";  // the alternative spelling
  ClinicalEvent e = table1_event();
  const std::string s = encode_events({e}, OutputFormat::SpecialToken, tokens);
  CHECK(s == "<ent>cancer<tency>yes<character>postoperation<anatomy>rectum");
  const DecodeResult r = decode_events(s, OutputFormat::SpecialToken, tokens);
  CHECK(r.diagnostics.empty());
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0] == e);
}

TEST_CASE("token set validation rejects collisions") {
  TokenSet tokens;
  tokens.ent = "<t>";
  tokens.tendency = "x<t>y";  // contains another literal
  CHECK_THROWS_AS(tokens.validate(), InvalidEvent);
  TokenSet dup;
  dup.ent = dup.anatomy;
  CHECK_THROWS_AS(dup.validate(), InvalidEvent);
  TokenSet empty;
  empty.separator = "";
  CHECK_THROWS_AS(empty.validate(), InvalidEvent);
}

TEST_CASE("values keep interior whitespace verbatim") {
  ClinicalEvent e;
  e.core_name = "a b";
  e.characteristics = {"x  y"};
  const std::string s = encode_events({e}, OutputFormat::SpecialToken);
  const DecodeResult r = decode_events(s, OutputFormat::SpecialToken);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].core_name == "a b");
  CHECK(r.events[0].characteristics == std::vector<std::string>{"x  y"});
}

}  // TEST_SUITE
