#include "clinev/metrics.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "clinev/errors.hpp"
#include "clinev/unicode.hpp"

namespace clinev {

std::string to_string(MatchMode mode) {
  switch (mode) {
    case MatchMode::FullEvent: return "full";
    case MatchMode::CoreWord: return "core";
    case MatchMode::OtherAttributes: return "attrs";
    case MatchMode::CoreWordStrictPosition: return "strict-pos";
  }
  return "unknown";
}

MatchMode match_mode_from_string(const std::string& name) {
  if (name == "full") return MatchMode::FullEvent;
  if (name == "core") return MatchMode::CoreWord;
  if (name == "attrs") return MatchMode::OtherAttributes;
  if (name == "strict-pos") return MatchMode::CoreWordStrictPosition;
  throw Error("unknown match mode '" + name +
              "' (expected full|core|attrs|strict-pos)");
}

namespace {

// tp = multiset intersection size; leftovers are fp / fn.
template <typename Key>
MatchCounts multiset_counts(const std::map<Key, std::size_t>& gold,
                            const std::map<Key, std::size_t>& pred) {
  std::size_t tp = 0, gold_total = 0, pred_total = 0;
  for (const auto& [key, n] : gold) gold_total += n;
  for (const auto& [key, n] : pred) pred_total += n;
  for (const auto& [key, n] : gold) {
    auto it = pred.find(key);
    if (it != pred.end()) tp += std::min(n, it->second);
  }
  return {tp, pred_total - tp, gold_total - tp};
}

std::map<CanonicalEventKey, std::size_t> key_multiset(
    const std::vector<ClinicalEvent>& events) {
  std::map<CanonicalEventKey, std::size_t> out;
  for (const auto& e : events) ++out[event_key(e)];
  return out;
}

std::map<std::string, std::size_t> core_multiset(
    const std::vector<ClinicalEvent>& events) {
  std::map<std::string, std::size_t> out;
  for (const auto& e : events) ++out[e.core_name];
  return out;
}

// (slot, value) instances of every non-core attribute in the record.
std::map<std::pair<std::string, std::string>, std::size_t> attribute_multiset(
    const std::vector<ClinicalEvent>& events) {
  std::map<std::pair<std::string, std::string>, std::size_t> out;
  for (const auto& e : events) {
    if (e.tendency) ++out[{"tendency", *e.tendency}];
    for (const auto& v : e.characteristics) ++out[{"characteristic", v}];
    for (const auto& v : e.anatomies) ++out[{"anatomy", v}];
  }
  return out;
}

// Occurrence claimed by each event, or nullopt when none is available.
// Span-bearing events claim the occurrence their span starts at; the rest
// greedily claim the leftmost unclaimed occurrence, in list order.
std::vector<std::optional<std::size_t>> assign_occurrences(
    const std::vector<ClinicalEvent>& events, const std::u32string& text,
    bool use_spans) {
  std::unordered_map<std::string, std::vector<std::size_t>> occ_cache;
  const auto occs = [&](const std::string& core)
      -> const std::vector<std::size_t>& {
    auto it = occ_cache.find(core);
    if (it == occ_cache.end()) {
      it = occ_cache.emplace(core, utf8::occurrences(text, utf8::decode(core)))
               .first;
    }
    return it->second;
  };

  std::vector<std::optional<std::size_t>> assigned(events.size());
  std::map<std::string, std::set<std::size_t>> claimed;

  if (use_spans) {
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      if (!e.core_span) continue;
      const auto& positions = occs(e.core_name);
      for (std::size_t k = 0; k < positions.size(); ++k) {
        if (positions[k] == e.core_span->start) {
          assigned[i] = k;
          claimed[e.core_name].insert(k);
          break;
        }
      }
    }
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (assigned[i]) continue;
    if (use_spans && events[i].core_span) continue;  // span missed the text
    const auto& positions = occs(events[i].core_name);
    auto& taken = claimed[events[i].core_name];
    for (std::size_t k = 0; k < positions.size(); ++k) {
      if (!taken.count(k)) {
        assigned[i] = k;
        taken.insert(k);
        break;
      }
    }
  }
  return assigned;
}

std::map<std::pair<std::string, std::size_t>, std::size_t> occurrence_multiset(
    const std::vector<ClinicalEvent>& events, const std::u32string& text,
    bool use_spans) {
  const auto assigned = assign_occurrences(events, text, use_spans);
  std::map<std::pair<std::string, std::size_t>, std::size_t> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (assigned[i]) ++out[{events[i].core_name, *assigned[i]}];
  }
  return out;
}

double round4(double x) { return std::round(x * 10000.0) / 10000.0; }

}  // namespace

Scores f1_from_counts(const MatchCounts& counts) {
  Scores s;
  const double tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) s.precision = tp / (counts.tp + counts.fp);
  if (counts.tp + counts.fn > 0) s.recall = tp / (counts.tp + counts.fn);
  if (s.precision + s.recall > 0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

MatchCounts match_record(const std::vector<ClinicalEvent>& gold,
                         const std::vector<ClinicalEvent>& pred,
                         MatchMode mode, const MedicalRecord* source) {
  switch (mode) {
    case MatchMode::FullEvent:
      return multiset_counts(key_multiset(gold), key_multiset(pred));
    case MatchMode::CoreWord:
      return multiset_counts(core_multiset(gold), core_multiset(pred));
    case MatchMode::OtherAttributes: {
      MatchCounts counts = multiset_counts(attribute_multiset(gold),
                                           attribute_multiset(pred));
      return counts;
    }
    case MatchMode::CoreWordStrictPosition: {
      if (source == nullptr) {
        throw MissingSource(
            "strict-position matching requires the source record");
      }
      const std::u32string text = utf8::decode(source->text);
      // Unassignable events (core not in text, or occurrences exhausted)
      // become unconditional fp / fn via the totals.
      MatchCounts counts =
          multiset_counts(occurrence_multiset(gold, text, true),
                          occurrence_multiset(pred, text, false));
      counts.fp = pred.size() - counts.tp;
      counts.fn = gold.size() - counts.tp;
      return counts;
    }
  }
  return {};
}

ScoreReport score_corpus(std::span<const AnnotatedRecord> gold,
                         std::span<const AnnotatedRecord> pred,
                         MatchMode mode) {
  std::map<std::string, const AnnotatedRecord*> gold_by_id;
  for (const auto& rec : gold) gold_by_id[rec.record.id] = &rec;
  std::map<std::string, const AnnotatedRecord*> pred_by_id;
  for (const auto& rec : pred) {
    if (!gold_by_id.count(rec.record.id)) {
      throw UnknownRecordId("prediction for unknown record id '" +
                            rec.record.id + "'");
    }
    pred_by_id[rec.record.id] = &rec;
  }

  static const std::vector<ClinicalEvent> kNoEvents;
  MatchCounts total;
  for (const auto& rec : gold) {
    const auto it = pred_by_id.find(rec.record.id);
    const auto& pred_events =
        (it != pred_by_id.end()) ? it->second->events : kNoEvents;
    total += match_record(rec.events, pred_events, mode, &rec.record);
  }

  ScoreReport report;
  report.mode = mode;
  report.counts = total;
  const Scores s = f1_from_counts(total);
  report.precision = s.precision;
  report.recall = s.recall;
  report.f1 = s.f1;
  return report;
}

std::string report_to_json(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(report.mode);
  j["tp"] = report.counts.tp;
  j["fp"] = report.counts.fp;
  j["fn"] = report.counts.fn;
  j["precision"] = round4(report.precision);
  j["recall"] = round4(report.recall);
  j["f1"] = round4(report.f1);
  j["unrounded"] = {{"precision", report.precision},
                    {"recall", report.recall},
                    {"f1", report.f1}};
  return j.dump();
}

}  // namespace clinev
