#include "clinev/error_analysis.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "clinev/metrics.hpp"
#include "clinev/errors.hpp"
#include "clinev/unicode.hpp"

namespace clinev {

std::string to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::RareCoreWordMissed: return "rare_core_word_missed";
    case ErrorCategory::MergedEvents: return "merged_events";
    case ErrorCategory::VocabularyDrift: return "vocabulary_drift";
    case ErrorCategory::SpuriousEvent: return "spurious_event";
    case ErrorCategory::Other: return "other";
  }
  return "unknown";
}

namespace {

using nlohmann::ordered_json;

ordered_json event_to_json(const ClinicalEvent& event) {
  ordered_json e;
  e["core_name"] = event.core_name;
  e["tendency"] = event.tendency ? ordered_json(*event.tendency)
                                 : ordered_json(nullptr);
  e["characteristics"] = event.characteristics;
  e["anatomies"] = event.anatomies;
  e["core_span"] =
      event.core_span
          ? ordered_json::array({event.core_span->start, event.core_span->end})
          : ordered_json(nullptr);
  return e;
}

// Marks which events survive full-event matching; min(gold, pred) events
// per key count as matched on each side.
std::vector<bool> matched_flags(const std::vector<ClinicalEvent>& events,
                                const std::vector<ClinicalEvent>& other) {
  std::map<CanonicalEventKey, std::size_t> budget;
  for (const auto& e : other) ++budget[event_key(e)];
  std::vector<bool> matched(events.size(), false);
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto it = budget.find(event_key(events[i]));
    if (it != budget.end() && it->second > 0) {
      matched[i] = true;
      --it->second;
    }
  }
  return matched;
}

// Multiset of extractive (slot, value) attribute instances.
std::map<std::pair<char, std::string>, std::size_t> extractive_attributes(
    const ClinicalEvent& event) {
  std::map<std::pair<char, std::string>, std::size_t> out;
  for (const auto& v : event.characteristics) ++out[{'c', v}];
  for (const auto& v : event.anatomies) ++out[{'a', v}];
  return out;
}

bool attribute_overlap(const ClinicalEvent& a, const ClinicalEvent& b) {
  const auto ma = extractive_attributes(a);
  const auto mb = extractive_attributes(b);
  for (const auto& [key, n] : ma) {
    if (mb.count(key)) return true;
  }
  return false;
}

bool proper_substring(const std::string& inner, const std::string& outer) {
  return inner.size() < outer.size() && utf8::contains(outer, inner);
}

std::string join_values(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += values[i];
  }
  return out;
}

}  // namespace

std::string report_to_jsonl(const ErrorReport& report) {
  ordered_json j;
  j["record_id"] = report.record_id;
  j["category"] = to_string(report.category);
  j["gold"] = report.gold_event ? event_to_json(*report.gold_event)
                                : ordered_json(nullptr);
  j["pred"] = report.pred_event ? event_to_json(*report.pred_event)
                                : ordered_json(nullptr);
  j["evidence"] = report.evidence;
  return j.dump();
}

NotInSourceStats not_in_source_rate(std::span<const AnnotatedRecord> pred) {
  NotInSourceStats stats;
  for (const auto& rec : pred) {
    const auto count = [&](const std::string& value) {
      ++stats.total_attribute_instances;
      if (!utf8::contains(rec.record.text, value)) ++stats.not_in_source;
    };
    for (const auto& event : rec.events) {
      count(event.core_name);
      for (const auto& v : event.characteristics) count(v);
      for (const auto& v : event.anatomies) count(v);
    }
  }
  if (stats.total_attribute_instances > 0) {
    stats.rate = static_cast<double>(stats.not_in_source) /
                 static_cast<double>(stats.total_attribute_instances);
  }
  return stats;
}

std::vector<ErrorReport> classify_errors(
    const AnnotatedRecord& gold, const AnnotatedRecord& pred,
    const std::map<std::string, std::size_t>& train_core_freq,
    const AnalysisOptions& options) {
  if (gold.record.id != pred.record.id) {
    throw MisalignedRecords("gold record '" + gold.record.id +
                            "' paired with pred record '" + pred.record.id +
                            "'");
  }

  const auto gold_matched = matched_flags(gold.events, pred.events);
  const auto pred_matched = matched_flags(pred.events, gold.events);

  std::vector<std::size_t> unmatched_gold, unmatched_pred;
  for (std::size_t i = 0; i < gold.events.size(); ++i) {
    if (!gold_matched[i]) unmatched_gold.push_back(i);
  }
  for (std::size_t i = 0; i < pred.events.size(); ++i) {
    if (!pred_matched[i]) unmatched_pred.push_back(i);
  }

  // Locate each unmatched gold core in the text to group cores by clause.
  const std::u32string text = utf8::decode(gold.record.text);
  const auto clauses = utf8::clause_spans(text);
  const auto clause_of = [&](std::size_t position) -> std::size_t {
    for (std::size_t c = 0; c < clauses.size(); ++c) {
      if (position >= clauses[c].first && position < clauses[c].second) {
        return c;
      }
    }
    return clauses.size();
  };
  std::map<std::size_t, std::vector<std::size_t>> clause_groups;
  for (const std::size_t g : unmatched_gold) {
    const auto& event = gold.events[g];
    std::size_t position;
    if (event.core_span) {
      position = event.core_span->start;
    } else {
      const auto occs =
          utf8::occurrences(text, utf8::decode(event.core_name));
      if (occs.empty()) continue;  // core not in text; cannot co-locate
      position = occs.front();
    }
    clause_groups[clause_of(position)].push_back(g);
  }

  // MergedEvents: a clause with >= 2 unmatched golds whose extractive
  // attributes were absorbed by exactly one unmatched prediction.
  std::map<std::size_t, std::pair<std::size_t, bool>> merged;  // gold -> (pred, cites_pred)
  for (const auto& [clause, members] : clause_groups) {
    if (members.size() < 2) continue;
    std::vector<std::size_t> absorbers;
    for (const std::size_t p : unmatched_pred) {
      std::size_t touched = 0;
      for (const std::size_t g : members) {
        if (attribute_overlap(pred.events[p], gold.events[g])) ++touched;
      }
      if (touched >= 2) absorbers.push_back(p);
    }
    if (absorbers.size() != 1) continue;
    const std::size_t absorber = absorbers.front();
    bool first = true;
    for (const std::size_t g : members) {
      if (!attribute_overlap(pred.events[absorber], gold.events[g])) continue;
      merged[g] = {absorber, first};
      first = false;
    }
  }

  std::vector<ErrorReport> reports;
  std::set<std::size_t> cited_preds;

  for (const std::size_t g : unmatched_gold) {
    const ClinicalEvent& event = gold.events[g];
    ErrorReport report;
    report.record_id = gold.record.id;
    report.gold_event = event;

    const auto freq_it = train_core_freq.find(event.core_name);
    const std::size_t freq =
        (freq_it == train_core_freq.end()) ? 0 : freq_it->second;
    const bool core_predicted =
        std::any_of(pred.events.begin(), pred.events.end(),
                    [&](const ClinicalEvent& p) {
                      return p.core_name == event.core_name;
                    });

    if (freq <= options.rarity_threshold && !core_predicted) {
      report.category = ErrorCategory::RareCoreWordMissed;
      report.evidence = "core '" + event.core_name +
                        "' appears " + std::to_string(freq) +
                        " time(s) in training and no prediction shares it";
    } else if (const auto it = merged.find(g); it != merged.end()) {
      const auto [absorber, cites_pred] = it->second;
      report.category = ErrorCategory::MergedEvents;
      report.evidence = "attributes [" +
                        join_values(gold.events[g].characteristics) +
                        "] absorbed by prediction '" +
                        pred.events[absorber].core_name + "'";
      if (cites_pred) {
        report.pred_event = pred.events[absorber];
        cited_preds.insert(absorber);
      }
    } else {
      std::size_t drift_pred = pred.events.size();
      for (const std::size_t p : unmatched_pred) {
        if (proper_substring(event.core_name, pred.events[p].core_name) ||
            proper_substring(pred.events[p].core_name, event.core_name)) {
          if (drift_pred == pred.events.size() || !cited_preds.count(p)) {
            drift_pred = p;
            if (!cited_preds.count(p)) break;
          }
        }
      }
      if (drift_pred != pred.events.size()) {
        report.category = ErrorCategory::VocabularyDrift;
        report.evidence = "gold core '" + event.core_name +
                          "' vs predicted core '" +
                          pred.events[drift_pred].core_name + "'";
        // Each prediction appears in at most one report.
        if (!cited_preds.count(drift_pred)) {
          report.pred_event = pred.events[drift_pred];
          cited_preds.insert(drift_pred);
        }
      } else {
        report.category = ErrorCategory::Other;
        report.evidence = "gold event not matched by any prediction";
      }
    }
    reports.push_back(std::move(report));
  }

  for (const std::size_t p : unmatched_pred) {
    if (cited_preds.count(p)) continue;
    const ClinicalEvent& event = pred.events[p];
    ErrorReport report;
    report.record_id = gold.record.id;
    report.pred_event = event;
    const bool touches_gold =
        std::any_of(gold.events.begin(), gold.events.end(),
                    [&](const ClinicalEvent& g) {
                      return g.core_name == event.core_name;
                    });
    if (!touches_gold) {
      report.category = ErrorCategory::SpuriousEvent;
      report.evidence = "predicted core '" + event.core_name +
                        "' matches no gold event";
    } else {
      report.category = ErrorCategory::Other;
      report.evidence = "prediction shares core '" + event.core_name +
                        "' with a gold event but attributes differ";
    }
    reports.push_back(std::move(report));
  }

  return reports;
}

std::vector<ErrorReport> classify_corpus(
    const Corpus& gold, const Corpus& pred,
    const std::map<std::string, std::size_t>& train_core_freq,
    const AnalysisOptions& options) {
  std::map<std::string, const AnnotatedRecord*> pred_by_id;
  std::set<std::string> gold_ids;
  for (const auto& rec : gold.records) gold_ids.insert(rec.record.id);
  for (const auto& rec : pred.records) {
    if (!gold_ids.count(rec.record.id)) {
      throw UnknownRecordId("prediction for unknown record id '" +
                            rec.record.id + "'");
    }
    pred_by_id[rec.record.id] = &rec;
  }
  std::vector<ErrorReport> reports;
  for (const auto& rec : gold.records) {
    const auto it = pred_by_id.find(rec.record.id);
    AnnotatedRecord empty{rec.record, {}};
    const AnnotatedRecord& pred_rec =
        (it != pred_by_id.end()) ? *it->second : empty;
    auto rec_reports =
        classify_errors(rec, pred_rec, train_core_freq, options);
    reports.insert(reports.end(),
                   std::make_move_iterator(rec_reports.begin()),
                   std::make_move_iterator(rec_reports.end()));
  }
  return reports;
}

ErrorSummary error_summary(std::span<const ErrorReport> reports) {
  ErrorSummary summary;
  for (const auto& report : reports) {
    ++summary.counts[report.category];
    ++summary.total;
  }
  return summary;
}

}  // namespace clinev
