#include "doctest.h"

#include "clinev/errors.hpp"
#include "clinev/event_model.hpp"
#include "support/generators.hpp"

using namespace clinev;

TEST_SUITE("event_model") {

TEST_CASE("normalize strips whitespace") {
  ClinicalEvent e;
  e.core_name = " cancer ";
  e.tendency = "yes";
  e.characteristics = {"postoperation"};
  e.anatomies = {"rectum"};
  const ClinicalEvent n = normalize_event(e);
  CHECK(n.core_name == "cancer");
  CHECK(n.tendency == "yes");
  CHECK(n.characteristics == std::vector<std::string>{"postoperation"});
  CHECK(n.anatomies == std::vector<std::string>{"rectum"});
}

TEST_CASE("normalize deduplicates multi-valued slots") {
  ClinicalEvent e;
  e.core_name = "stool";
  e.characteristics = {"white", "white"};
  const ClinicalEvent n = normalize_event(e);
  CHECK(n.characteristics == std::vector<std::string>{"white"});
}

TEST_CASE("normalize keeps first occurrence order") {
  ClinicalEvent e;
  e.core_name = "x";
  e.characteristics = {"b", "a", " b", "c", "a"};
  const ClinicalEvent n = normalize_event(e);
  CHECK(n.characteristics == std::vector<std::string>{"b", "a", "c"});
}

TEST_CASE("normalize rejects empty core") {
  ClinicalEvent e;
  e.core_name = "  ";
  CHECK_THROWS_AS(normalize_event(e), InvalidEvent);
}

TEST_CASE("normalize drops empty values and blank tendency") {
  ClinicalEvent e;
  e.core_name = "x";
  e.tendency = "   ";
  e.characteristics = {"", "a", "  "};
  const ClinicalEvent n = normalize_event(e);
  CHECK_FALSE(n.tendency.has_value());
  CHECK(n.characteristics == std::vector<std::string>{"a"});
}

TEST_CASE("reserved tokens are rejected in every slot") {
  ClinicalEvent e;
  e.core_name = "a<ent>b";
  CHECK_THROWS_AS(normalize_event(e), InvalidEvent);
  e.core_name = "ok";
  e.anatomies = {"x<unk>y"};
  CHECK_THROWS_AS(normalize_event(e), InvalidEvent);
  e.anatomies = {};
  e.tendency = "<null>";
  CHECK_THROWS_AS(normalize_event(e), InvalidEvent);
}

TEST_CASE("normalize is idempotent") {
  testgen::Rng rng(101);
  for (int i = 0; i < 300; ++i) {
    ClinicalEvent raw;
    raw.core_name = " " + rng.pick(testgen::core_pool()) + "  ";
    if (rng.chance(0.5)) raw.tendency = " yes ";
    for (std::size_t k = 0; k < rng.below(4); ++k) {
      raw.characteristics.push_back(rng.pick(testgen::value_pool()) + " ");
    }
    const ClinicalEvent once = normalize_event(raw);
    CHECK(normalize_event(once) == once);
  }
}

TEST_CASE("event_key ignores multi-value order") {
  ClinicalEvent a, b;
  a.core_name = b.core_name = "x";
  a.characteristics = {"b", "a"};
  b.characteristics = {"a", "b"};
  CHECK(event_key(a) == event_key(b));
}

TEST_CASE("event_key excludes core_span") {
  ClinicalEvent a, b;
  a.core_name = b.core_name = "x";
  a.core_span = Span{0, 1};
  b.core_span = Span{5, 6};
  CHECK(event_key(a) == event_key(b));
  CHECK(a != b);
}

TEST_CASE("event_key permutation invariance on random events") {
  testgen::Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    ClinicalEvent e = testgen::random_event(rng);
    ClinicalEvent shuffled = e;
    for (std::size_t k = shuffled.characteristics.size(); k > 1; --k) {
      std::swap(shuffled.characteristics[k - 1],
                shuffled.characteristics[rng.below(k)]);
    }
    for (std::size_t k = shuffled.anatomies.size(); k > 1; --k) {
      std::swap(shuffled.anatomies[k - 1],
                shuffled.anatomies[rng.below(k)]);
    }
    CHECK(event_key(e) == event_key(shuffled));
  }
}

TEST_CASE("span validation") {
  MedicalRecord rec{"r", "rectal cancer"};
  ClinicalEvent e;
  e.core_name = "cancer";
  e.core_span = Span{7, 13};
  CHECK_NOTHROW(validate_span(e, rec));
  e.core_span = Span{0, 6};  // "rectal" != "cancer"
  CHECK_THROWS_AS(validate_span(e, rec), InvalidEvent);
  e.core_span = Span{7, 20};  // past the end
  CHECK_THROWS_AS(validate_span(e, rec), InvalidEvent);
  e.core_span = Span{5, 5};  // empty
  CHECK_THROWS_AS(validate_span(e, rec), InvalidEvent);
}

TEST_CASE("span offsets are code points, not bytes") {
  MedicalRecord rec{"r", "无白陶土样大便"};
  ClinicalEvent e;
  e.core_name = "大便";
  e.core_span = Span{5, 7};
  CHECK_NOTHROW(validate_span(e, rec));
}

}  // TEST_SUITE
