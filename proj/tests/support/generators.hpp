#pragma once

// Hand-rolled generators for property tests. Everything is driven by an
// explicit seed so failures replay.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "clinev/corpus.hpp"
#include "clinev/event_model.hpp"
#include "clinev/unicode.hpp"

namespace testgen {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}

  std::size_t below(std::size_t n) { return n == 0 ? 0 : eng() % n; }

  bool chance(double p) {
    return (eng() >> 11) * (1.0 / 9007199254740992.0) < p;
  }

  template <typename T>
  const T& pick(const std::vector<T>& values) {
    return values[below(values.size())];
  }
};

// Small pools so that duplicate keys and repeated core words actually
// happen.
inline const std::vector<std::string>& core_pool() {
  static const std::vector<std::string> pool = {"aa", "ab", "b",
                                                "ca", "cb"};
  return pool;
}

inline const std::vector<std::string>& value_pool() {
  static const std::vector<std::string> pool = {"x", "y", "z", "w", "v"};
  return pool;
}

// Values with spaces and non-ASCII content for linearizer round trips.
inline const std::vector<std::string>& rich_value_pool() {
  static const std::vector<std::string> pool = {
      "dark red", "white",    "sticky", "間歇",       "白陶土样",
      "no incentives", "sudden occurrence", "x y z", "postoperation"};
  return pool;
}

inline const std::vector<std::string>& rich_core_pool() {
  static const std::vector<std::string> pool = {
      "cancer", "stool", "咳血", "cough up phlegm", "symptoms"};
  return pool;
}

inline clinev::ClinicalEvent random_event(Rng& rng, bool rich = false) {
  const auto& cores = rich ? rich_core_pool() : core_pool();
  const auto& values = rich ? rich_value_pool() : value_pool();
  clinev::ClinicalEvent event;
  event.core_name = rng.pick(cores);
  if (rng.chance(0.7)) {
    event.tendency = rng.chance(0.5) ? "yes" : "negative";
  }
  const std::size_t n_char = rng.below(4);
  for (std::size_t i = 0; i < n_char; ++i) {
    event.characteristics.push_back(rng.pick(values));
  }
  const std::size_t n_anat = rng.below(3);
  for (std::size_t i = 0; i < n_anat; ++i) {
    event.anatomies.push_back(rng.pick(values));
  }
  return clinev::normalize_event(event);
}

inline std::vector<clinev::ClinicalEvent> random_event_list(
    Rng& rng, std::size_t max_events, bool rich = false) {
  std::vector<clinev::ClinicalEvent> events;
  const std::size_t n = rng.below(max_events + 1);
  for (std::size_t i = 0; i < n; ++i) events.push_back(random_event(rng, rich));
  return events;
}

// A record whose text is built from core-pool words, so core occurrences
// (including repeats) exist for strict-position matching. Some events get
// spans pointing at a genuine occurrence; some cores never occur at all.
inline clinev::AnnotatedRecord random_record(Rng& rng, const std::string& id,
                                             std::size_t max_events,
                                             bool with_spans = true) {
  clinev::AnnotatedRecord rec;
  rec.record.id = id;
  std::string text;
  const std::size_t n_words = 1 + rng.below(7);
  for (std::size_t i = 0; i < n_words; ++i) {
    text += rng.pick(core_pool());
    text += rng.chance(0.3) ? "" : " ";
  }
  text += ".";
  rec.record.text = text;

  const std::size_t n_events = rng.below(max_events + 1);
  for (std::size_t i = 0; i < n_events; ++i) {
    clinev::ClinicalEvent event = random_event(rng);
    if (with_spans && rng.chance(0.5)) {
      const auto occs = clinev::utf8::occurrences(
          clinev::utf8::decode(text), clinev::utf8::decode(event.core_name));
      if (!occs.empty()) {
        const std::size_t start = occs[rng.below(occs.size())];
        event.core_span = clinev::Span{
            start, start + clinev::utf8::length(event.core_name)};
      }
    }
    rec.events.push_back(std::move(event));
  }
  return rec;
}

// Aligned gold/pred corpora over the same records. Predictions share some
// gold events verbatim and add noise, so every mode sees hits and misses.
inline std::pair<clinev::Corpus, clinev::Corpus> random_corpus_pair(
    Rng& rng, std::size_t max_records, std::size_t max_events) {
  clinev::Corpus gold, pred;
  const std::size_t n = rng.below(max_records + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "r" + std::to_string(i);
    clinev::AnnotatedRecord g = random_record(rng, id, max_events);
    clinev::AnnotatedRecord p;
    p.record = g.record;
    for (const auto& event : g.events) {
      if (rng.chance(0.5)) {
        clinev::ClinicalEvent copy = event;
        copy.core_span.reset();
        if (rng.chance(0.3)) {  // perturb an attribute
          copy.characteristics.push_back(rng.pick(value_pool()));
          copy = clinev::normalize_event(copy);
        }
        p.events.push_back(std::move(copy));
      }
    }
    const std::size_t extra = rng.below(3);
    for (std::size_t k = 0; k < extra; ++k) {
      clinev::ClinicalEvent noise = random_event(rng);
      noise.core_span.reset();
      p.events.push_back(std::move(noise));
    }
    gold.records.push_back(std::move(g));
    if (rng.chance(0.9)) pred.records.push_back(std::move(p));
  }
  return {std::move(gold), std::move(pred)};
}

}  // namespace testgen
