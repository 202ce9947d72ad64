#include "clinev/corpus.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "clinev/errors.hpp"
#include "clinev/unicode.hpp"

namespace clinev {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string type_name(const json& j) { return j.type_name(); }

const json& require_field(const json& obj, const char* name,
                          std::size_t line) {
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw SchemaError(std::string("missing field '") + name + "'", line,
                      name);
  }
  return *it;
}

std::string require_string(const json& obj, const char* name,
                           std::size_t line) {
  const json& v = require_field(obj, name, line);
  if (!v.is_string()) {
    throw SchemaError(std::string("field '") + name + "' must be a string, " +
                          "got " + type_name(v),
                      line, name);
  }
  return v.get<std::string>();
}

std::vector<std::string> optional_string_array(const json& obj,
                                               const char* name,
                                               std::size_t line) {
  auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) {
    throw SchemaError(std::string("field '") + name + "' must be an array",
                      line, name);
  }
  std::vector<std::string> out;
  for (const json& v : *it) {
    if (!v.is_string()) {
      throw SchemaError(std::string("field '") + name +
                            "' must hold only strings",
                        line, name);
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

ClinicalEvent parse_event(const json& obj, std::size_t line) {
  if (!obj.is_object()) {
    throw SchemaError("event entries must be objects", line, "events");
  }
  ClinicalEvent event;
  event.core_name = require_string(obj, "core_name", line);
  if (auto it = obj.find("tendency"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw SchemaError("field 'tendency' must be a string or null", line,
                        "tendency");
    }
    event.tendency = it->get<std::string>();
  }
  event.characteristics = optional_string_array(obj, "characteristics", line);
  event.anatomies = optional_string_array(obj, "anatomies", line);
  if (auto it = obj.find("core_span"); it != obj.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 2 ||
        !(*it)[0].is_number_unsigned() || !(*it)[1].is_number_unsigned()) {
      throw SchemaError(
          "field 'core_span' must be [start, end] with non-negative ints",
          line, "core_span");
    }
    event.core_span = Span{(*it)[0].get<std::size_t>(),
                           (*it)[1].get<std::size_t>()};
  }
  return event;
}

AnnotatedRecord parse_record(const json& obj, std::size_t line) {
  if (!obj.is_object()) {
    throw SchemaError("each line must be a JSON object", line, "");
  }
  AnnotatedRecord rec;
  rec.record.id = require_string(obj, "id", line);
  if (rec.record.id.empty()) {
    throw SchemaError("field 'id' must be non-empty", line, "id");
  }
  rec.record.text = require_string(obj, "text", line);
  if (utf8::trim(rec.record.text).empty()) {
    throw SchemaError("field 'text' must be non-empty", line, "text");
  }
  const json& events = require_field(obj, "events", line);
  if (!events.is_array()) {
    throw SchemaError("field 'events' must be an array", line, "events");
  }
  for (const json& e : events) {
    ClinicalEvent event = parse_event(e, line);
    try {
      event = normalize_event(event);
      validate_span(event, rec.record);
    } catch (const InvalidEvent& err) {
      throw SchemaError(std::string("invalid event: ") + err.what(), line,
                        "events");
    }
    rec.events.push_back(std::move(event));
  }
  return rec;
}

json parse_line(const std::string& text, std::size_t line) {
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) {
    throw ParseError("malformed JSON", line);
  }
  return parsed;
}

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

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source_name) {
  Corpus corpus;
  std::set<std::string> ids;
  std::string line_text;
  std::size_t line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (utf8::trim(line_text).empty()) continue;
    AnnotatedRecord rec = parse_record(parse_line(line_text, line), line);
    if (!ids.insert(rec.record.id).second) {
      throw DuplicateId("duplicate record id '" + rec.record.id + "' in " +
                        source_name + " line " + std::to_string(line));
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  try {
    return parse_corpus(in, path.string());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ":" + std::to_string(e.line) + ": " +
                         e.what(),
                     e.line);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ":" + std::to_string(e.line) + ": " +
                          e.what(),
                      e.line, e.field);
  }
}

std::string record_to_jsonl(const AnnotatedRecord& record) {
  ordered_json j;
  j["id"] = record.record.id;
  j["text"] = record.record.text;
  j["events"] = ordered_json::array();
  for (const auto& e : record.events) j["events"].push_back(event_to_json(e));
  return j.dump();
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file " + path.string());
  for (const auto& rec : corpus.records) out << record_to_jsonl(rec) << '\n';
}

namespace {

Corpus load_predictions_impl(const std::filesystem::path& path,
                             OutputFormat format, const Corpus& reference,
                             PredictionLoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open prediction file " + path.string());

  std::map<std::string, const AnnotatedRecord*> ref_by_id;
  for (const auto& rec : reference.records) ref_by_id[rec.record.id] = &rec;

  PredictionLoadStats local;
  Corpus corpus;
  std::set<std::string> ids;
  std::string line_text;
  std::size_t line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (utf8::trim(line_text).empty()) continue;
    const json obj = parse_line(line_text, line);
    if (!obj.is_object()) {
      throw SchemaError("each line must be a JSON object", line, "");
    }

    AnnotatedRecord rec;
    if (obj.contains("events")) {
      rec = parse_record(obj, line);
    } else if (obj.contains("output")) {
      rec.record.id = require_string(obj, "id", line);
      const std::string output = require_string(obj, "output", line);
      auto ref = ref_by_id.find(rec.record.id);
      if (obj.contains("text") && obj["text"].is_string()) {
        rec.record.text = obj["text"].get<std::string>();
      } else if (ref != ref_by_id.end()) {
        rec.record.text = ref->second->record.text;
      } else {
        throw UnknownRecordId("prediction line " + std::to_string(line) +
                              " has no text and id '" + rec.record.id +
                              "' is not in the reference corpus");
      }
      DecodeResult decoded = decode_events(output, format);
      ++local.decoded_lines;
      local.diagnostics += decoded.diagnostics.size();
      for (auto& event : decoded.events) {
        try {
          rec.events.push_back(normalize_event(event));
        } catch (const InvalidEvent&) {
          ++local.dropped_events;
        }
      }
    } else {
      throw SchemaError("line carries neither 'events' nor 'output'", line,
                        "events");
    }

    if (!ref_by_id.count(rec.record.id)) {
      throw UnknownRecordId("prediction for unknown record id '" +
                            rec.record.id + "' (line " +
                            std::to_string(line) + ")");
    }
    if (!ids.insert(rec.record.id).second) {
      throw DuplicateId("duplicate record id '" + rec.record.id +
                        "' in predictions line " + std::to_string(line));
    }
    corpus.records.push_back(std::move(rec));
  }
  if (stats) *stats = local;
  return corpus;
}

}  // namespace

Corpus load_predictions(const std::filesystem::path& path,
                        OutputFormat format, const Corpus& reference,
                        PredictionLoadStats* stats) {
  try {
    return load_predictions_impl(path, format, reference, stats);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ":" + std::to_string(e.line) + ": " +
                         e.what(),
                     e.line);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ":" + std::to_string(e.line) + ": " +
                          e.what(),
                      e.line, e.field);
  }
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus,
                                       std::size_t train_size,
                                       std::uint64_t seed) {
  if (train_size > corpus.records.size()) {
    throw SizeError("train size " + std::to_string(train_size) +
                    " exceeds corpus size " +
                    std::to_string(corpus.records.size()));
  }
  std::vector<std::size_t> order(corpus.records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Hand-rolled Fisher-Yates: std::shuffle is not reproducible across
  // standard libraries, and split membership must be.
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }
  std::pair<Corpus, Corpus> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& side = (i < train_size) ? out.first : out.second;
    side.records.push_back(corpus.records[order[i]]);
  }
  return out;
}

LengthHistogram length_histogram(const Corpus& corpus,
                                 std::size_t bucket_width,
                                 const std::vector<std::size_t>& thresholds) {
  if (bucket_width == 0) throw Error("bucket width must be >= 1");
  LengthHistogram hist;
  hist.bucket_width = bucket_width;
  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.records.size());
  for (const auto& rec : corpus.records) {
    const std::size_t len = utf8::length(rec.record.text);
    lengths.push_back(len);
    ++hist.buckets[len / bucket_width];
    ++hist.total;
  }
  hist.fractions_defined = hist.total > 0;
  for (const std::size_t threshold : thresholds) {
    double fraction = 0;
    if (hist.total > 0) {
      std::size_t within = 0;
      for (const std::size_t len : lengths) {
        if (len <= threshold) ++within;
      }
      fraction = static_cast<double>(within) / hist.total;
    }
    hist.threshold_fractions.emplace_back(threshold, fraction);
  }
  return hist;
}

std::string histogram_to_csv(const LengthHistogram& histogram) {
  std::ostringstream out;
  out << "bucket_start,bucket_end,count\n";
  if (!histogram.buckets.empty()) {
    const std::size_t last = histogram.buckets.rbegin()->first;
    for (std::size_t k = 0; k <= last; ++k) {
      const auto it = histogram.buckets.find(k);
      const std::size_t count = (it == histogram.buckets.end()) ? 0
                                                                : it->second;
      out << k * histogram.bucket_width << ','
          << (k + 1) * histogram.bucket_width << ',' << count << '\n';
    }
  }
  return out.str();
}

std::size_t count_events(const Corpus& corpus) {
  std::size_t total = 0;
  for (const auto& rec : corpus.records) total += rec.events.size();
  return total;
}

std::map<std::string, std::size_t> core_frequencies(const Corpus& corpus) {
  std::map<std::string, std::size_t> out;
  for (const auto& rec : corpus.records) {
    for (const auto& e : rec.events) ++out[e.core_name];
  }
  return out;
}

}  // namespace clinev
