#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clinev {

// Base class for every error raised by the toolkit.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An event violates its invariants (empty core name, reserved token inside
// an attribute value, bad span).
struct InvalidEvent : Error {
  using Error::Error;
};

// Malformed JSON in a corpus file. line is 1-based.
struct ParseError : Error {
  std::size_t line;
  ParseError(const std::string& msg, std::size_t line_no)
      : Error(msg), line(line_no) {}
};

// A well-formed JSON line missing or mistyping a required field.
struct SchemaError : Error {
  std::size_t line;
  std::string field;
  SchemaError(const std::string& msg, std::size_t line_no,
              std::string field_name)
      : Error(msg), line(line_no), field(std::move(field_name)) {}
};

// Two records in one corpus share an id.
struct DuplicateId : Error {
  using Error::Error;
};

// split_corpus asked to take more records than the corpus holds.
struct SizeError : Error {
  using Error::Error;
};

// Strict-position matching requested without a source record.
struct MissingSource : Error {
  using Error::Error;
};

// Prediction carries a record id the gold corpus does not contain.
struct UnknownRecordId : Error {
  using Error::Error;
};

// classify_errors called with gold/pred records whose ids differ.
struct MisalignedRecords : Error {
  using Error::Error;
};

// rule_extract invoked with no core terms.
struct EmptyLexicon : Error {
  using Error::Error;
};

// A string cannot be segmented into vocabulary tokens.
struct TokenizationError : Error {
  using Error::Error;
};

// Beam search ran out of hypotheses. Unreachable with the full output
// grammar (the empty output is always a finished hypothesis); kept as an
// invariant check.
struct NoHypothesis : Error {
  using Error::Error;
};

}  // namespace clinev
