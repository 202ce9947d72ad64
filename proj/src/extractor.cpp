#include "clinev/extractor.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "clinev/errors.hpp"
#include "clinev/unicode.hpp"

namespace clinev {

namespace {

struct TermMatch {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
};

// Leftmost-longest, non-overlapping occurrences of any term.
std::vector<TermMatch> scan_terms(const std::u32string& text,
                                  const std::set<std::string>& terms) {
  std::vector<std::pair<std::u32string, std::string>> decoded;
  for (const auto& term : terms) {
    if (!term.empty()) decoded.emplace_back(utf8::decode(term), term);
  }
  std::vector<TermMatch> matches;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::pair<std::u32string, std::string>* best = nullptr;
    for (const auto& entry : decoded) {
      const auto& needle = entry.first;
      if (needle.size() > text.size() - i) continue;
      if (text.compare(i, needle.size(), needle) != 0) continue;
      if (best == nullptr || needle.size() > best->first.size()) {
        best = &entry;
      }
    }
    if (best != nullptr) {
      matches.push_back({i, i + best->first.size(), best->second});
      i += best->first.size();
    } else {
      ++i;
    }
  }
  return matches;
}

std::size_t clause_of(
    const std::vector<std::pair<std::size_t, std::size_t>>& clauses,
    std::size_t position) {
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    if (position >= clauses[c].first && position < clauses[c].second) return c;
  }
  return clauses.empty() ? 0 : clauses.size() - 1;
}

// Gap in code points between two non-overlapping spans; 0 when they touch
// or overlap.
std::size_t span_gap(const TermMatch& a, const TermMatch& b) {
  if (a.end <= b.start) return b.start - a.end;
  if (b.end <= a.start) return a.start - b.end;
  return 0;
}

std::set<std::string> read_term_array(const nlohmann::json& obj,
                                      const char* name,
                                      const std::string& path) {
  std::set<std::string> out;
  const auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) {
    throw Error("lexicon field '" + std::string(name) +
                "' must be an array in " + path);
  }
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw Error("lexicon field '" + std::string(name) +
                  "' must hold strings in " + path);
    }
    const std::string term = v.get<std::string>();
    for (const auto& reserved : reserved_tokens()) {
      if (utf8::contains(term, reserved)) {
        throw Error("lexicon term '" + term + "' contains reserved token " +
                    reserved);
      }
    }
    if (!term.empty()) out.insert(term);
  }
  return out;
}

}  // namespace

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file " + path.string());
  nlohmann::json obj = nlohmann::json::parse(in, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw Error("lexicon file " + path.string() +
                " is not a JSON object");
  }
  Lexicon lex;
  lex.core_terms = read_term_array(obj, "core_terms", path.string());
  lex.anatomy_terms = read_term_array(obj, "anatomy_terms", path.string());
  lex.negation_cues = read_term_array(obj, "negation_cues", path.string());
  lex.characteristic_terms =
      read_term_array(obj, "characteristic_terms", path.string());
  return lex;
}

std::vector<ClinicalEvent> rule_extract(const MedicalRecord& record,
                                        const Lexicon& lexicon,
                                        const ExtractorOptions& options) {
  if (lexicon.core_terms.empty()) {
    throw EmptyLexicon("lexicon has no core terms");
  }
  const std::u32string text = utf8::decode(record.text);
  const auto cores = scan_terms(text, lexicon.core_terms);
  if (cores.empty()) return {};
  const auto cues = scan_terms(text, lexicon.negation_cues);
  const auto characteristics = scan_terms(text, lexicon.characteristic_terms);
  const auto anatomies = scan_terms(text, lexicon.anatomy_terms);
  const auto clauses = utf8::clause_spans(text);

  std::vector<ClinicalEvent> events(cores.size());
  std::vector<std::size_t> core_clause(cores.size());
  for (std::size_t i = 0; i < cores.size(); ++i) {
    events[i].core_name = cores[i].surface;
    events[i].core_span = Span{cores[i].start, cores[i].end};
    core_clause[i] = clause_of(clauses, cores[i].start);
    bool negated = false;
    for (const auto& cue : cues) {
      if (cue.end <= cores[i].start &&
          cores[i].start - cue.end <= options.negation_window) {
        negated = true;
        break;
      }
    }
    events[i].tendency = negated ? "negative" : "yes";
  }

  // Attach each attribute match to the nearest core in its clause.
  const auto attach = [&](const std::vector<TermMatch>& matches,
                          bool is_anatomy) {
    for (const auto& match : matches) {
      const std::size_t clause = clause_of(clauses, match.start);
      std::size_t best = cores.size();
      std::size_t best_gap = std::numeric_limits<std::size_t>::max();
      for (std::size_t i = 0; i < cores.size(); ++i) {
        if (core_clause[i] != clause) continue;
        const std::size_t gap = span_gap(cores[i], match);
        if (gap < best_gap) {
          best_gap = gap;
          best = i;
        }
      }
      if (best == cores.size()) continue;  // no core in this clause
      auto& slot = is_anatomy ? events[best].anatomies
                              : events[best].characteristics;
      slot.push_back(match.surface);
    }
  };
  attach(characteristics, false);
  attach(anatomies, true);

  for (auto& event : events) event = normalize_event(event);
  return events;
}

}  // namespace clinev
