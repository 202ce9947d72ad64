#include "clinev/linearizer.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include "clinev/errors.hpp"
#include "clinev/unicode.hpp"

namespace clinev {

std::vector<std::string> TokenSet::literals() const {
  return {ent, tendency, character, anatomy, separator, null_tag,
          baseline_sep};
}

void TokenSet::validate() const {
  const auto lits = literals();
  for (const auto& lit : lits) {
    if (lit.empty()) throw InvalidEvent("token set contains an empty literal");
  }
  for (std::size_t i = 0; i < lits.size(); ++i) {
    for (std::size_t j = 0; j < lits.size(); ++j) {
      if (i == j) continue;
      if (utf8::contains(lits[i], lits[j])) {
        throw InvalidEvent("token literal '" + lits[j] +
                           "' is contained in '" + lits[i] + "'");
      }
    }
  }
}

std::string to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::MissingSlot: return "missing_slot";
    case DiagnosticKind::UnexpectedToken: return "unexpected_token";
    case DiagnosticKind::EmptyAttribute: return "empty_attribute";
    case DiagnosticKind::TrailingGarbage: return "trailing_garbage";
  }
  return "unknown";
}

namespace {

enum class Lit { Ent, Tendency, Character, Anatomy, Sep, Null, BaselineSep };

constexpr std::array<const char*, 4> kSlotNames = {"core", "tendency",
                                                   "characteristic",
                                                   "anatomy"};

// One scanned run: either a reserved literal or a maximal run of plain text.
struct Piece {
  bool is_literal = false;
  Lit lit = Lit::Ent;
  std::u32string text;
  std::size_t pos = 0;
};

struct Scanner {
  std::vector<std::pair<std::u32string, Lit>> literals;

  explicit Scanner(const TokenSet& tokens) {
    literals.emplace_back(utf8::decode(tokens.ent), Lit::Ent);
    literals.emplace_back(utf8::decode(tokens.tendency), Lit::Tendency);
    literals.emplace_back(utf8::decode(tokens.character), Lit::Character);
    literals.emplace_back(utf8::decode(tokens.anatomy), Lit::Anatomy);
    literals.emplace_back(utf8::decode(tokens.separator), Lit::Sep);
    literals.emplace_back(utf8::decode(tokens.null_tag), Lit::Null);
    literals.emplace_back(utf8::decode(tokens.baseline_sep), Lit::BaselineSep);
    std::sort(literals.begin(), literals.end(),
              [](const auto& a, const auto& b) {
                return a.first.size() > b.first.size();
              });
  }

  std::vector<Piece> scan(const std::u32string& input) const {
    std::vector<Piece> pieces;
    std::u32string pending;
    std::size_t pending_pos = 0;
    const auto flush = [&](std::size_t) {
      if (!pending.empty()) {
        pieces.push_back({false, Lit::Ent, pending, pending_pos});
        pending.clear();
      }
    };
    std::size_t i = 0;
    while (i < input.size()) {
      bool matched = false;
      for (const auto& [lit_text, lit] : literals) {
        if (input.compare(i, lit_text.size(), lit_text) == 0) {
          flush(i);
          pieces.push_back({true, lit, {}, i});
          i += lit_text.size();
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (pending.empty()) pending_pos = i;
        pending.push_back(input[i]);
        ++i;
      }
    }
    flush(i);
    return pieces;
  }
};

int slot_of(Lit lit) {
  switch (lit) {
    case Lit::Tendency: return 1;
    case Lit::Character: return 2;
    case Lit::Anatomy: return 3;
    default: return -1;
  }
}

// Accumulates the value(s) of the slot currently being read.
struct SlotAccumulator {
  std::u32string current;
  std::vector<std::string> elements;
  bool null_seen = false;
  bool null_conflict_reported = false;
  bool pending_separator = false;

  void reset() { *this = SlotAccumulator{}; }
};

struct SpecialParser {
  DecodeResult result;

  void diag(std::size_t pos, DiagnosticKind kind, std::string message) {
    result.diagnostics.push_back({pos, kind, std::move(message)});
  }

  void on_text(SlotAccumulator& acc, const Piece& piece) {
    if (acc.null_seen && acc.current.empty() && acc.elements.empty() &&
        !acc.null_conflict_reported) {
      diag(piece.pos, DiagnosticKind::UnexpectedToken,
           "value follows a null tag; using the value");
      acc.null_conflict_reported = true;
    }
    acc.current += piece.text;
    acc.pending_separator = false;
  }

  void on_null(SlotAccumulator& acc, const Piece& piece) {
    if (acc.current.empty() && acc.elements.empty() && !acc.null_seen &&
        !acc.pending_separator) {
      acc.null_seen = true;
    } else {
      diag(piece.pos, DiagnosticKind::UnexpectedToken, "stray null tag");
    }
  }

  void on_separator(SlotAccumulator& acc, int slot, const Piece& piece) {
    if (slot < 2) {
      diag(piece.pos, DiagnosticKind::UnexpectedToken,
           "separator inside a single-valued slot");
      return;
    }
    if (!acc.current.empty()) {
      acc.elements.push_back(utf8::encode(acc.current));
      acc.current.clear();
    } else {
      diag(piece.pos, DiagnosticKind::EmptyAttribute,
           "empty value before separator");
    }
    acc.pending_separator = true;
  }

  // Closes a scalar slot; returns the decoded value or nullopt for
  // absent/null.
  std::optional<std::string> close_scalar(SlotAccumulator& acc, int slot,
                                          std::size_t pos) {
    std::string value = utf8::encode(acc.current);
    if (!value.empty()) return value;
    if (!acc.null_seen) {
      diag(pos, DiagnosticKind::EmptyAttribute,
           std::string(kSlotNames[slot]) + " slot is empty");
    }
    return std::nullopt;
  }

  std::vector<std::string> close_multi(SlotAccumulator& acc, int slot,
                                       std::size_t pos) {
    if (!acc.current.empty()) {
      acc.elements.push_back(utf8::encode(acc.current));
    } else if (acc.pending_separator) {
      diag(pos, DiagnosticKind::EmptyAttribute, "empty value after separator");
    }
    if (acc.elements.empty() && !acc.null_seen) {
      diag(pos, DiagnosticKind::EmptyAttribute,
           std::string(kSlotNames[slot]) + " slot is empty");
    }
    return std::move(acc.elements);
  }

  // Parses one event from pieces[i..), which starts just past an <ent>.
  // Stops at the next <ent> or the end; end_pos is the offset used for
  // diagnostics anchored at the event boundary.
  void parse_event(const std::vector<Piece>& pieces, std::size_t& i,
                   std::size_t end_pos) {
    int slot = 0;
    SlotAccumulator acc;
    std::optional<std::string> core, tendency;
    std::vector<std::string> characteristics, anatomies;

    const auto close_current = [&](std::size_t pos) {
      switch (slot) {
        case 0: core = close_scalar(acc, 0, pos); break;
        case 1: tendency = close_scalar(acc, 1, pos); break;
        case 2: characteristics = close_multi(acc, 2, pos); break;
        case 3: anatomies = close_multi(acc, 3, pos); break;
      }
      acc.reset();
    };

    for (; i < pieces.size(); ++i) {
      const Piece& piece = pieces[i];
      if (!piece.is_literal) {
        on_text(acc, piece);
        continue;
      }
      if (piece.lit == Lit::Ent) break;  // next event
      if (piece.lit == Lit::Null) {
        on_null(acc, piece);
        continue;
      }
      if (piece.lit == Lit::Sep) {
        on_separator(acc, slot, piece);
        continue;
      }
      if (piece.lit == Lit::BaselineSep) {
        diag(piece.pos, DiagnosticKind::UnexpectedToken,
             "baseline separator in special-token output");
        continue;
      }
      const int target = slot_of(piece.lit);
      if (target > slot) {
        close_current(piece.pos);
        for (int s = slot + 1; s < target; ++s) {
          diag(piece.pos, DiagnosticKind::MissingSlot,
               std::string(kSlotNames[s]) + " slot missing");
        }
        slot = target;
      } else {
        diag(piece.pos, DiagnosticKind::UnexpectedToken,
             "out-of-order slot token");
      }
    }

    const std::size_t here = (i < pieces.size()) ? pieces[i].pos : end_pos;
    close_current(here);
    for (int s = slot + 1; s < 4; ++s) {
      diag(here, DiagnosticKind::MissingSlot,
           std::string(kSlotNames[s]) + " slot missing");
    }

    if (!core) return;  // EmptyAttribute already reported; event dropped
    ClinicalEvent event;
    event.core_name = std::move(*core);
    event.tendency = std::move(tendency);
    event.characteristics = std::move(characteristics);
    event.anatomies = std::move(anatomies);
    result.events.push_back(std::move(event));
  }

  DecodeResult run(const std::vector<Piece>& pieces, std::size_t end_pos) {
    std::size_t i = 0;
    bool garbage_reported = false;
    while (i < pieces.size() &&
           !(pieces[i].is_literal && pieces[i].lit == Lit::Ent)) {
      if (!garbage_reported) {
        diag(pieces[i].pos, DiagnosticKind::TrailingGarbage,
             "content before the first event marker");
        garbage_reported = true;
      }
      ++i;
    }
    while (i < pieces.size()) {
      ++i;  // consume <ent>
      parse_event(pieces, i, end_pos);
    }
    return std::move(result);
  }
};

// Baseline decoding: the string is a flat field list split on <p>.
struct BaselineField {
  std::u32string text;
  bool null_seen = false;
  bool conflict_reported = false;
  std::size_t pos = 0;
};

struct BaselineParser {
  DecodeResult result;

  void diag(std::size_t pos, DiagnosticKind kind, std::string message) {
    result.diagnostics.push_back({pos, kind, std::move(message)});
  }

  std::vector<BaselineField> split_fields(const std::vector<Piece>& pieces) {
    std::vector<BaselineField> fields;
    if (pieces.empty()) return fields;
    BaselineField cur;
    cur.pos = pieces.front().pos;
    for (const Piece& piece : pieces) {
      if (piece.is_literal && piece.lit == Lit::BaselineSep) {
        fields.push_back(std::move(cur));
        cur = BaselineField{};
        cur.pos = piece.pos;
        continue;
      }
      if (piece.is_literal && piece.lit == Lit::Null) {
        if (cur.text.empty() && !cur.null_seen) {
          cur.null_seen = true;
        } else {
          diag(piece.pos, DiagnosticKind::UnexpectedToken, "stray null tag");
        }
        continue;
      }
      if (piece.is_literal) {
        diag(piece.pos, DiagnosticKind::UnexpectedToken,
             "special token in baseline output");
        continue;
      }
      if (cur.null_seen && cur.text.empty() && !cur.conflict_reported) {
        diag(piece.pos, DiagnosticKind::UnexpectedToken,
             "value follows a null tag; using the value");
        cur.conflict_reported = true;
      }
      cur.text += piece.text;
    }
    fields.push_back(std::move(cur));
    return fields;
  }

  // Field -> value; nullopt for a null or empty field.
  std::optional<std::string> field_value(const BaselineField& field, int slot,
                                         bool report_empty) {
    std::string value = utf8::encode(field.text);
    if (!value.empty()) return value;
    if (!field.null_seen && report_empty) {
      diag(field.pos, DiagnosticKind::EmptyAttribute,
           std::string(kSlotNames[slot]) + " field is empty");
    }
    return std::nullopt;
  }

  DecodeResult run(const std::vector<Piece>& pieces, std::size_t end_pos) {
    const auto fields = split_fields(pieces);
    for (std::size_t g = 0; g < fields.size(); g += 4) {
      const std::size_t have = std::min<std::size_t>(4, fields.size() - g);
      ClinicalEvent event;
      auto core = field_value(fields[g], 0, true);
      if (have > 1) {
        event.tendency = field_value(fields[g + 1], 1, true);
      }
      if (have > 2) {
        if (auto v = field_value(fields[g + 2], 2, true)) {
          event.characteristics.push_back(std::move(*v));
        }
      }
      if (have > 3) {
        if (auto v = field_value(fields[g + 3], 3, true)) {
          event.anatomies.push_back(std::move(*v));
        }
      }
      for (std::size_t s = have; s < 4; ++s) {
        diag(end_pos, DiagnosticKind::MissingSlot,
             std::string(kSlotNames[s]) + " slot missing");
      }
      if (!core) continue;  // dropped; EmptyAttribute already reported
      event.core_name = std::move(*core);
      result.events.push_back(std::move(event));
    }
    return std::move(result);
  }
};

void check_event_against_tokens(const ClinicalEvent& event,
                                const TokenSet& tokens) {
  const auto lits = tokens.literals();
  const auto check = [&](const std::string& value, const char* slot) {
    for (const auto& lit : lits) {
      if (utf8::contains(value, lit)) {
        throw InvalidEvent(std::string(slot) + " value '" + value +
                           "' contains token literal " + lit);
      }
    }
  };
  check(event.core_name, "core_name");
  if (event.tendency) check(*event.tendency, "tendency");
  for (const auto& v : event.characteristics) check(v, "characteristic");
  for (const auto& v : event.anatomies) check(v, "anatomy");
}

std::string join_or_null(const std::vector<std::string>& values,
                         const TokenSet& tokens) {
  if (values.empty()) return tokens.null_tag;
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += tokens.separator;
    out += values[i];
  }
  return out;
}

}  // namespace

std::string encode_events(const std::vector<ClinicalEvent>& events,
                          OutputFormat format, const TokenSet& tokens) {
  tokens.validate();
  std::string out;
  for (const ClinicalEvent& event : events) {
    validate_event(event);
    check_event_against_tokens(event, tokens);
    if (format == OutputFormat::SpecialToken) {
      out += tokens.ent;
      out += event.core_name;
      out += tokens.tendency;
      out += event.tendency ? *event.tendency : tokens.null_tag;
      out += tokens.character;
      out += join_or_null(event.characteristics, tokens);
      out += tokens.anatomy;
      out += join_or_null(event.anatomies, tokens);
    } else {
      if (!out.empty()) out += tokens.baseline_sep;
      out += event.core_name;
      out += tokens.baseline_sep;
      out += event.tendency ? *event.tendency : tokens.null_tag;
      out += tokens.baseline_sep;
      if (event.characteristics.empty()) {
        out += tokens.null_tag;
      } else {
        for (std::size_t i = 0; i < event.characteristics.size(); ++i) {
          if (i > 0) out += tokens.baseline_sep;
          out += event.characteristics[i];
        }
      }
      out += tokens.baseline_sep;
      if (event.anatomies.empty()) {
        out += tokens.null_tag;
      } else {
        for (std::size_t i = 0; i < event.anatomies.size(); ++i) {
          if (i > 0) out += tokens.baseline_sep;
          out += event.anatomies[i];
        }
      }
    }
  }
  return out;
}

DecodeResult decode_events(std::string_view s, OutputFormat format,
                           const TokenSet& tokens) {
  tokens.validate();
  const std::u32string input = utf8::decode(s);
  const Scanner scanner(tokens);
  const auto pieces = scanner.scan(input);
  DecodeResult result;
  if (format == OutputFormat::SpecialToken) {
    SpecialParser parser;
    result = parser.run(pieces, input.size());
  } else {
    if (pieces.empty()) return result;
    BaselineParser parser;
    result = parser.run(pieces, input.size());
  }
  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(),
                   [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
                     return a.position < b.position;
                   });
  return result;
}

bool roundtrip_check(const std::vector<ClinicalEvent>& events,
                     OutputFormat format, const TokenSet& tokens) {
  const DecodeResult decoded =
      decode_events(encode_events(events, format, tokens), format, tokens);
  if (!decoded.diagnostics.empty()) return false;
  if (decoded.events.size() != events.size()) return false;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!same_surface(decoded.events[i], events[i])) return false;
  }
  return true;
}

}  // namespace clinev
