#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "clinev/event_model.hpp"

namespace clinev {

// The two target-string layouts a generative extractor can be trained on.
// SpecialToken marks each slot with its own token; Baseline joins all
// attributes with one generic separator.
enum class OutputFormat { Baseline, SpecialToken };

// The reserved literal alphabet. Configurable so an alternative spelling
// (e.g. "<tency>") is a config change; the defaults are the canonical wire
// format.
struct TokenSet {
  std::string ent = "<ent>";
  std::string tendency = "<tendency>";
  std::string character = "<character>";
  std::string anatomy = "<anatomy>";
  std::string separator = "<unk>";
  std::string null_tag = "<null>";
  std::string baseline_sep = "<p>";

  std::vector<std::string> literals() const;
  // Throws InvalidEvent when literals are empty, collide, or one is a
  // substring of another (which would make scanning ambiguous).
  void validate() const;
};

enum class DiagnosticKind {
  MissingSlot,      // a slot token never appeared in an event
  UnexpectedToken,  // a literal appeared where the grammar forbids it
  EmptyAttribute,   // a slot or list element decoded to the empty string
  TrailingGarbage,  // text before the first event marker
};

std::string to_string(DiagnosticKind kind);

// One recovery note from lenient decoding. position is a code-point offset
// into the linearized string, clamped to [0, length].
struct ParseDiagnostic {
  std::size_t position = 0;
  DiagnosticKind kind = DiagnosticKind::UnexpectedToken;
  std::string message;
};

struct DecodeResult {
  std::vector<ClinicalEvent> events;
  std::vector<ParseDiagnostic> diagnostics;
};

// Serializes events into one target string.
//
// SpecialToken, per event: <ent>CORE<tendency>T<character>C1<unk>C2...
// <anatomy>A1<unk>A2... with <null> filling an absent tendency or an empty
// list; events concatenate with no extra delimiter. Baseline joins the same
// attribute sequence with <p> inside an event and puts <p> between events.
// Values are emitted verbatim; events must already be normalized and valid
// (throws InvalidEvent otherwise).
std::string encode_events(const std::vector<ClinicalEvent>& events,
                          OutputFormat format, const TokenSet& tokens = {});

// Total inverse of encode_events. Well-formed input decodes exactly with no
// diagnostics; anything else is recovered greedily: a new event starts at
// each <ent>, skipped slots are reported as MissingSlot and left absent,
// text before the first <ent> becomes TrailingGarbage, stray literals
// become UnexpectedToken, and events whose core decodes empty are dropped
// with EmptyAttribute. Never throws.
//
// Baseline decoding is not uniquely invertible once a slot holds several
// values (every boundary is <p>); fields are consumed in groups of four
// (core, tendency, characteristic, anatomy), which inverts exactly the
// encodings where each multi-valued slot has at most one value. A short
// tail group yields MissingSlot diagnostics.
DecodeResult decode_events(std::string_view s, OutputFormat format,
                           const TokenSet& tokens = {});

// True when decode(encode(events)) returns the same events (ignoring
// core_span, which linearization does not carry) with zero diagnostics.
bool roundtrip_check(const std::vector<ClinicalEvent>& events,
                     OutputFormat format, const TokenSet& tokens = {});

}  // namespace clinev
