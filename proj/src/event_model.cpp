#include "clinev/event_model.hpp"

#include <algorithm>
#include <set>

#include "clinev/errors.hpp"
#include "clinev/unicode.hpp"

namespace clinev {

const std::vector<std::string>& reserved_tokens() {
  static const std::vector<std::string> tokens = {
      "<ent>", "<tendency>", "<character>", "<anatomy>",
      "<unk>", "<null>",     "<p>"};
  return tokens;
}

namespace {

void check_no_reserved(const std::string& value, const char* slot) {
  for (const auto& tok : reserved_tokens()) {
    if (utf8::contains(value, tok)) {
      throw InvalidEvent(std::string(slot) + " value '" + value +
                         "' contains reserved token " + tok);
    }
  }
}

std::vector<std::string> clean_values(const std::vector<std::string>& values,
                                      const char* slot) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& v : values) {
    std::string t = utf8::trim(v);
    if (t.empty()) continue;
    check_no_reserved(t, slot);
    if (seen.insert(t).second) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> sorted_unique(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

}  // namespace

void validate_event(const ClinicalEvent& event) {
  if (event.core_name.empty()) throw InvalidEvent("empty core name");
  check_no_reserved(event.core_name, "core_name");
  if (event.tendency) check_no_reserved(*event.tendency, "tendency");
  for (const auto& v : event.characteristics) {
    if (v.empty()) throw InvalidEvent("empty characteristic value");
    check_no_reserved(v, "characteristic");
  }
  for (const auto& v : event.anatomies) {
    if (v.empty()) throw InvalidEvent("empty anatomy value");
    check_no_reserved(v, "anatomy");
  }
}

void validate_span(const ClinicalEvent& event, const MedicalRecord& source) {
  if (!event.core_span) return;
  const auto [start, end] = *event.core_span;
  const std::size_t text_len = utf8::length(source.text);
  if (start >= end || end > text_len) {
    throw InvalidEvent("core_span [" + std::to_string(start) + ", " +
                       std::to_string(end) + ") out of bounds for record '" +
                       source.id + "'");
  }
  if (utf8::substr(source.text, start, end) != event.core_name) {
    throw InvalidEvent("core_span substring does not equal core name '" +
                       event.core_name + "' in record '" + source.id + "'");
  }
}

ClinicalEvent normalize_event(const ClinicalEvent& event) {
  ClinicalEvent out;
  out.core_name = utf8::trim(event.core_name);
  if (out.core_name.empty()) {
    throw InvalidEvent("core name empty after normalization");
  }
  check_no_reserved(out.core_name, "core_name");
  if (event.tendency) {
    std::string t = utf8::trim(*event.tendency);
    if (!t.empty()) {
      check_no_reserved(t, "tendency");
      out.tendency = std::move(t);
    }
  }
  out.characteristics = clean_values(event.characteristics, "characteristic");
  out.anatomies = clean_values(event.anatomies, "anatomy");
  out.core_span = event.core_span;
  return out;
}

CanonicalEventKey event_key(const ClinicalEvent& event) {
  CanonicalEventKey key;
  key.core_name = event.core_name;
  key.tendency = event.tendency.value_or("");
  key.characteristics = sorted_unique(event.characteristics);
  key.anatomies = sorted_unique(event.anatomies);
  return key;
}

bool same_surface(const ClinicalEvent& a, const ClinicalEvent& b) {
  return a.core_name == b.core_name && a.tendency == b.tendency &&
         a.characteristics == b.characteristics && a.anatomies == b.anatomies;
}

}  // namespace clinev
