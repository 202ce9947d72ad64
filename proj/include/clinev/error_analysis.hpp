#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clinev/corpus.hpp"
#include "clinev/event_model.hpp"

namespace clinev {

enum class ErrorCategory {
  RareCoreWordMissed,  // core word seen too rarely in training, not predicted
  MergedEvents,        // one prediction absorbed attributes of several golds
  VocabularyDrift,     // predicted core extends/truncates the gold core
  SpuriousEvent,       // prediction touching no gold event
  Other,
};

std::string to_string(ErrorCategory category);

struct ErrorReport {
  std::string record_id;
  ErrorCategory category = ErrorCategory::Other;
  std::optional<ClinicalEvent> gold_event;
  std::optional<ClinicalEvent> pred_event;
  std::string evidence;
};

// JSONL line {record_id, category, gold, pred, evidence}.
std::string report_to_jsonl(const ErrorReport& report);

struct NotInSourceStats {
  std::size_t total_attribute_instances = 0;
  std::size_t not_in_source = 0;
  double rate = 0;  // 0 when total is 0
};

// Fraction of extractive attribute instances (core name, every
// characteristic, every anatomy — tendency excluded: its values are label
// vocabulary, not source spans) that are not substrings of the source
// text. A hallucination proxy.
NotInSourceStats not_in_source_rate(std::span<const AnnotatedRecord> pred);

struct AnalysisOptions {
  std::size_t rarity_threshold = 2;  // max training count for "rare"
};

// Classifies every event left unmatched by full-event matching into
// exactly one report. Unmatched gold events are checked in order for:
// RareCoreWordMissed (training frequency <= threshold and no prediction
// shares the core), MergedEvents (>= 2 unmatched golds with cores in one
// clause whose characteristic/anatomy values were absorbed by exactly one
// prediction), VocabularyDrift (one core a proper substring of the other),
// then Other. Unmatched predictions not already cited as evidence become
// SpuriousEvent when they share a core with no gold event, else Other.
// Throws MisalignedRecords when the record ids differ.
std::vector<ErrorReport> classify_errors(
    const AnnotatedRecord& gold, const AnnotatedRecord& pred,
    const std::map<std::string, std::size_t>& train_core_freq,
    const AnalysisOptions& options = {});

// Record-by-record classify_errors over corpora aligned by id; predictions
// may omit records. Throws UnknownRecordId for a pred id absent from gold.
std::vector<ErrorReport> classify_corpus(
    const Corpus& gold, const Corpus& pred,
    const std::map<std::string, std::size_t>& train_core_freq,
    const AnalysisOptions& options = {});

struct ErrorSummary {
  std::map<ErrorCategory, std::size_t> counts;
  std::size_t total = 0;
};

ErrorSummary error_summary(std::span<const ErrorReport> reports);

}  // namespace clinev
