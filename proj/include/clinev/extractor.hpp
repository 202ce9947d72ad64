#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "clinev/event_model.hpp"

namespace clinev {

// Term lists driving the rule extractor. Terms may not contain reserved
// token literals. core_terms must be non-empty when the extractor runs.
struct Lexicon {
  std::set<std::string> core_terms;
  std::set<std::string> anatomy_terms;
  std::set<std::string> negation_cues;
  std::set<std::string> characteristic_terms;
};

// JSON object {"core_terms": [...], "anatomy_terms": [...],
// "negation_cues": [...], "characteristic_terms": [...]}.
Lexicon load_lexicon(const std::filesystem::path& path);

struct ExtractorOptions {
  // A negation cue ending within this many code points before a core term
  // flips its tendency to "negative".
  std::size_t negation_window = 6;
};

// Deterministic lexicon extractor: one event per core-term occurrence
// (leftmost-longest, non-overlapping) with core_span set; tendency is
// "negative" when a negation cue sits within the window before the core,
// else "yes"; characteristic and anatomy terms found in the same clause
// attach to the nearest core term. Returns normalized events in text
// order. Throws EmptyLexicon when core_terms is empty.
std::vector<ClinicalEvent> rule_extract(const MedicalRecord& record,
                                        const Lexicon& lexicon,
                                        const ExtractorOptions& options = {});

}  // namespace clinev
