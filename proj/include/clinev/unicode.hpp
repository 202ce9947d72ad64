#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Small UTF-8 helpers. All offsets used across the library are Unicode
// code-point offsets, never byte offsets: the corpora are Chinese clinical
// text and record spans are character positions.
namespace clinev::utf8 {

// Decodes UTF-8 into code points. Invalid bytes are mapped to U+DC00+byte
// (surrogate-escape) so that encode(decode(s)) == s for arbitrary input.
std::u32string decode(std::string_view s);

// Inverse of decode.
std::string encode(std::u32string_view s);

// Length in code points.
std::size_t length(std::string_view s);

// Substring by code-point offsets [start, end). Offsets are clamped to the
// string length.
std::string substr(std::string_view s, std::size_t start, std::size_t end);

// All start offsets of needle in hay, including overlapping matches.
// Empty needle yields no matches.
std::vector<std::size_t> occurrences(std::u32string_view hay,
                                     std::u32string_view needle);

// Byte-level substring test. Correct code-point containment for valid UTF-8.
bool contains(std::string_view hay, std::string_view needle);

// Strips leading/trailing ASCII whitespace.
std::string trim(std::string_view s);

// Clause spans [start, end) in code points, split on sentence-ending
// punctuation (. ! ? ; newline and their full-width forms). Commas do not
// end a clause. Delimiters belong to the clause they terminate.
std::vector<std::pair<std::size_t, std::size_t>> clause_spans(
    std::u32string_view text);

}  // namespace clinev::utf8
