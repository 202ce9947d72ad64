#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "clinev/event_model.hpp"

namespace clinev {

// What counts as a hit:
//   FullEvent              — every attribute exactly correct (set semantics
//                            on the multi-valued slots).
//   CoreWord               — core names only.
//   OtherAttributes        — each non-core attribute instance (tendency,
//                            every characteristic, every anatomy) scored as
//                            a (slot, value) pair across the whole record.
//   CoreWordStrictPosition — core names that also agree on which occurrence
//                            of the string in the source they refer to.
enum class MatchMode { FullEvent, CoreWord, OtherAttributes,
                       CoreWordStrictPosition };

std::string to_string(MatchMode mode);
// Accepts the CLI spellings: full, core, attrs, strict-pos.
MatchMode match_mode_from_string(const std::string& name);

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  MatchCounts& operator+=(const MatchCounts& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }
  bool operator==(const MatchCounts&) const = default;
};

struct Scores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Precision = TP/(TP+FP), Recall = TP/(TP+FN), F1 = 2PR/(P+R), each 0 when
// its denominator is 0.
Scores f1_from_counts(const MatchCounts& counts);

struct ScoreReport {
  MatchMode mode = MatchMode::FullEvent;
  MatchCounts counts;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// JSON object {mode, tp, fp, fn, precision, recall, f1} with the rates
// rounded to 4 decimals, plus an "unrounded" object carrying full
// precision.
std::string report_to_json(const ScoreReport& report);

// Counts over one record. Events must be normalized. source is required
// for CoreWordStrictPosition (throws MissingSource otherwise); ignored by
// the other modes.
//
// Strict-position occurrence assignment: gold events claim the occurrence
// named by core_span when present, otherwise the leftmost occurrence no
// earlier gold event claimed; predicted events (which carry no trusted
// spans) claim the leftmost occurrence unclaimed on the prediction side,
// in list order. A pair matches when both claim the same occurrence.
MatchCounts match_record(const std::vector<ClinicalEvent>& gold,
                         const std::vector<ClinicalEvent>& pred,
                         MatchMode mode,
                         const MedicalRecord* source = nullptr);

// Micro-average over records aligned by id. pred may omit records (scored
// as empty); a pred id absent from gold throws UnknownRecordId.
ScoreReport score_corpus(std::span<const AnnotatedRecord> gold,
                         std::span<const AnnotatedRecord> pred,
                         MatchMode mode);

}  // namespace clinev
