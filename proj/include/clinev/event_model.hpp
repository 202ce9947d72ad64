#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace clinev {

// Half-open [start, end) code-point span into a record's text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

// A source sentence from an electronic health record. text is indexed by
// Unicode code points everywhere in the library.
struct MedicalRecord {
  std::string id;
  std::string text;
  bool operator==(const MedicalRecord&) const = default;
};

// One clinical finding event. core_name is the trigger-like head term;
// tendency is the occurrence polarity (e.g. "yes", "negative");
// characteristics and anatomies may hold several values each. core_span,
// when present, locates the core word in the source text.
struct ClinicalEvent {
  std::string core_name;
  std::optional<std::string> tendency;
  std::vector<std::string> characteristics;
  std::vector<std::string> anatomies;
  std::optional<Span> core_span;
  bool operator==(const ClinicalEvent&) const = default;
};

// A record together with its gold or predicted events.
struct AnnotatedRecord {
  MedicalRecord record;
  std::vector<ClinicalEvent> events;
  bool operator==(const AnnotatedRecord&) const = default;
};

// Identity of an event under the full-event matching criterion: every
// attribute must agree, multi-valued slots compare as sets, spans are
// ignored.
struct CanonicalEventKey {
  std::string core_name;
  std::string tendency;  // empty when absent
  std::vector<std::string> characteristics;  // sorted, deduplicated
  std::vector<std::string> anatomies;        // sorted, deduplicated
  auto operator<=>(const CanonicalEventKey&) const = default;
  bool operator==(const CanonicalEventKey&) const = default;
};

// The token literals no attribute value may contain.
const std::vector<std::string>& reserved_tokens();

// Throws InvalidEvent unless the event satisfies its invariants: non-empty
// core name, no empty values in multi-valued slots, no reserved token
// literal inside any value.
void validate_event(const ClinicalEvent& event);

// Throws InvalidEvent unless core_span (when present) lies inside the
// source text and its substring equals core_name.
void validate_span(const ClinicalEvent& event, const MedicalRecord& source);

// Whitespace hygiene: strips every string field, drops empty values from
// multi-valued slots, removes duplicates keeping the first occurrence, and
// turns a blank tendency into an absent one. core_span is left untouched.
// Idempotent. Throws InvalidEvent when the core name ends up empty or a
// value contains a reserved token.
ClinicalEvent normalize_event(const ClinicalEvent& event);

// Matching key of a normalized event. Invariant under permutation of the
// multi-valued slots; core_span does not participate.
CanonicalEventKey event_key(const ClinicalEvent& event);

// Equality ignoring core_span: what linearization preserves.
bool same_surface(const ClinicalEvent& a, const ClinicalEvent& b);

}  // namespace clinev
