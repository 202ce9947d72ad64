#include "clinev/unicode.hpp"

namespace clinev::utf8 {

namespace {

constexpr char32_t kEscapeBase = 0xDC00;

bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

// Decodes one scalar at s[i]; returns the code point and advances i, or
// returns the escaped byte when the sequence is malformed (truncated,
// overlong, surrogate, or out of range).
char32_t decode_one(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return kEscapeBase + b0;
  }
  if (i + len > s.size()) {
    ++i;
    return kEscapeBase + b0;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto bk = static_cast<unsigned char>(s[i + k]);
    if (!is_continuation(bk)) {
      ++i;
      return kEscapeBase + b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                        (len == 4 && cp < 0x10000);
  if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return kEscapeBase + b0;
  }
  i += len;
  return cp;
}

void encode_one(char32_t cp, std::string& out) {
  if (cp >= kEscapeBase + 0x80 && cp <= kEscapeBase + 0xFF) {
    out.push_back(static_cast<char>(cp - kEscapeBase));
  } else if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_clause_delimiter(char32_t cp) {
  switch (cp) {
    case U'.':
    case U'!':
    case U'?':
    case U';':
    case U'\n':
    case U'。':  // 。
    case U'！':  // ！
    case U'？':  // ？
    case U'；':  // ；
    case U'．':  // ．
      return true;
    default:
      return false;
  }
}

}  // namespace

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) out.push_back(decode_one(s, i));
  return out;
}

std::string encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) encode_one(cp, out);
  return out;
}

std::size_t length(std::string_view s) {
  std::size_t i = 0, n = 0;
  while (i < s.size()) {
    decode_one(s, i);
    ++n;
  }
  return n;
}

std::string substr(std::string_view s, std::size_t start, std::size_t end) {
  const std::u32string cps = decode(s);
  if (start > cps.size()) start = cps.size();
  if (end > cps.size()) end = cps.size();
  if (start >= end) return {};
  return encode(std::u32string_view(cps).substr(start, end - start));
}

std::vector<std::size_t> occurrences(std::u32string_view hay,
                                     std::u32string_view needle) {
  std::vector<std::size_t> out;
  if (needle.empty() || needle.size() > hay.size()) return out;
  for (std::size_t pos = hay.find(needle, 0); pos != std::u32string_view::npos;
       pos = hay.find(needle, pos + 1)) {
    out.push_back(pos);
  }
  return out;
}

bool contains(std::string_view hay, std::string_view needle) {
  return hay.find(needle) != std::string_view::npos;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::pair<std::size_t, std::size_t>> clause_spans(
    std::u32string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_clause_delimiter(text[i])) {
      spans.emplace_back(start, i + 1);
      start = i + 1;
    }
  }
  if (start < text.size()) spans.emplace_back(start, text.size());
  return spans;
}

}  // namespace clinev::utf8
