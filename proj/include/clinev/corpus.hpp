#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clinev/event_model.hpp"
#include "clinev/linearizer.hpp"

namespace clinev {

struct Corpus {
  std::vector<AnnotatedRecord> records;
};

// JSON Lines, one record per line:
//   {"id": str, "text": str, "events": [{"core_name": str,
//    "tendency": str|null, "characteristics": [str], "anatomies": [str],
//    "core_span": [int,int]|null}]}
// Events are normalized on load and spans checked against the text.
// Throws ParseError (bad JSON), SchemaError (missing/mistyped field,
// invariant violation) with 1-based line numbers, or DuplicateId.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in, const std::string& source_name);

// Inverse of load_corpus with byte-stable field ordering.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string record_to_jsonl(const AnnotatedRecord& record);

// Prediction files carry either full records or {"id": str, "output": str}
// lines holding a raw linearized string, decoded with the given format.
// Texts are joined from the reference corpus by id (UnknownRecordId when
// absent). Decoded events that normalize to nothing are dropped.
struct PredictionLoadStats {
  std::size_t decoded_lines = 0;
  std::size_t diagnostics = 0;
  std::size_t dropped_events = 0;
};
Corpus load_predictions(const std::filesystem::path& path,
                        OutputFormat format, const Corpus& reference,
                        PredictionLoadStats* stats = nullptr);

// Deterministic shuffle under seed (Fisher-Yates over a fixed generator,
// stable across platforms), then the first train_size records form the
// train split. Throws SizeError when train_size exceeds the corpus.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus,
                                       std::size_t train_size,
                                       std::uint64_t seed);

struct LengthHistogram {
  std::size_t bucket_width = 1;
  std::map<std::size_t, std::size_t> buckets;  // bucket index -> count
  std::size_t total = 0;
  // (threshold, fraction of records with length <= threshold)
  std::vector<std::pair<std::size_t, double>> threshold_fractions;
  bool fractions_defined = false;  // false on an empty corpus
};

// Buckets record text lengths (code points) into [k*w, (k+1)*w).
LengthHistogram length_histogram(const Corpus& corpus,
                                 std::size_t bucket_width,
                                 const std::vector<std::size_t>& thresholds = {});

// CSV with header bucket_start,bucket_end,count covering bucket 0 through
// the last non-empty bucket.
std::string histogram_to_csv(const LengthHistogram& histogram);

std::size_t count_events(const Corpus& corpus);

// core_name -> number of events with that core across the corpus.
std::map<std::string, std::size_t> core_frequencies(const Corpus& corpus);

}  // namespace clinev
