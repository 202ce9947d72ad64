#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <utility>

#include "clinev/cli.hpp"
#include "clinev/corpus.hpp"
#include "clinev/decoder.hpp"
#include "clinev/error_analysis.hpp"
#include "clinev/errors.hpp"
#include "clinev/event_model.hpp"
#include "clinev/extractor.hpp"
#include "clinev/linearizer.hpp"
#include "clinev/metrics.hpp"

namespace py = pybind11;
using namespace clinev;

namespace {

using SpanPair = std::optional<std::pair<std::size_t, std::size_t>>;

SpanPair get_span(const ClinicalEvent& e) {
  if (!e.core_span) return std::nullopt;
  return std::make_pair(e.core_span->start, e.core_span->end);
}

void set_span(ClinicalEvent& e, const SpanPair& span) {
  if (span) {
    e.core_span = Span{span->first, span->second};
  } else {
    e.core_span = std::nullopt;
  }
}

// Lets Python classes implement the scorer interface.
class PyNextTokenScorer : public NextTokenScorer {
 public:
  using NextTokenScorer::NextTokenScorer;
  std::vector<double> score(std::span<const int> prefix,
                            const MedicalRecord& source) const override {
    const std::vector<int> prefix_vec(prefix.begin(), prefix.end());
    PYBIND11_OVERRIDE_PURE(std::vector<double>, NextTokenScorer, score,
                           prefix_vec, source);
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "clinical finding event toolkit";

  py::register_exception<Error>(m, "ToolkitError", PyExc_RuntimeError);

  // ---- event model ----
  py::class_<MedicalRecord>(m, "MedicalRecord")
      .def(py::init<>())
      .def(py::init([](std::string id, std::string text) {
             return MedicalRecord{std::move(id), std::move(text)};
           }),
           py::arg("id"), py::arg("text"))
      .def_readwrite("id", &MedicalRecord::id)
      .def_readwrite("text", &MedicalRecord::text)
      .def("__eq__", [](const MedicalRecord& a, const MedicalRecord& b) {
        return a == b;
      })
      .def("__repr__", [](const MedicalRecord& r) {
        return "MedicalRecord(id='" + r.id + "')";
      });

  py::class_<ClinicalEvent>(m, "ClinicalEvent")
      .def(py::init<>())
      .def(py::init([](std::string core_name,
                       std::optional<std::string> tendency,
                       std::vector<std::string> characteristics,
                       std::vector<std::string> anatomies,
                       const SpanPair& core_span) {
             ClinicalEvent e;
             e.core_name = std::move(core_name);
             e.tendency = std::move(tendency);
             e.characteristics = std::move(characteristics);
             e.anatomies = std::move(anatomies);
             set_span(e, core_span);
             return e;
           }),
           py::arg("core_name"), py::arg("tendency") = std::nullopt,
           py::arg("characteristics") = std::vector<std::string>{},
           py::arg("anatomies") = std::vector<std::string>{},
           py::arg("core_span") = std::nullopt)
      .def_readwrite("core_name", &ClinicalEvent::core_name)
      .def_readwrite("tendency", &ClinicalEvent::tendency)
      .def_readwrite("characteristics", &ClinicalEvent::characteristics)
      .def_readwrite("anatomies", &ClinicalEvent::anatomies)
      .def_property("core_span", &get_span, &set_span)
      .def("__eq__", [](const ClinicalEvent& a, const ClinicalEvent& b) {
        return a == b;
      })
      .def("__repr__", [](const ClinicalEvent& e) {
        return "ClinicalEvent(core_name='" + e.core_name + "')";
      });

  py::class_<AnnotatedRecord>(m, "AnnotatedRecord")
      .def(py::init<>())
      .def(py::init([](MedicalRecord record, std::vector<ClinicalEvent> events) {
             return AnnotatedRecord{std::move(record), std::move(events)};
           }),
           py::arg("record"), py::arg("events") = std::vector<ClinicalEvent>{})
      .def_readwrite("record", &AnnotatedRecord::record)
      .def_readwrite("events", &AnnotatedRecord::events);

  py::class_<CanonicalEventKey>(m, "CanonicalEventKey")
      .def_readonly("core_name", &CanonicalEventKey::core_name)
      .def_readonly("tendency", &CanonicalEventKey::tendency)
      .def_readonly("characteristics", &CanonicalEventKey::characteristics)
      .def_readonly("anatomies", &CanonicalEventKey::anatomies)
      .def("__eq__",
           [](const CanonicalEventKey& a, const CanonicalEventKey& b) {
             return a == b;
           })
      .def("__lt__",
           [](const CanonicalEventKey& a, const CanonicalEventKey& b) {
             return a < b;
           });

  m.def("normalize_event", &normalize_event, py::arg("event"));
  m.def("event_key", &event_key, py::arg("event"));

  // ---- linearizer ----
  py::enum_<OutputFormat>(m, "OutputFormat")
      .value("Baseline", OutputFormat::Baseline)
      .value("SpecialToken", OutputFormat::SpecialToken);

  py::class_<TokenSet>(m, "TokenSet")
      .def(py::init<>())
      .def_readwrite("ent", &TokenSet::ent)
      .def_readwrite("tendency", &TokenSet::tendency)
      .def_readwrite("character", &TokenSet::character)
      .def_readwrite("anatomy", &TokenSet::anatomy)
      .def_readwrite("separator", &TokenSet::separator)
      .def_readwrite("null_tag", &TokenSet::null_tag)
      .def_readwrite("baseline_sep", &TokenSet::baseline_sep)
      .def("literals", &TokenSet::literals)
      .def("validate", &TokenSet::validate);

  py::enum_<DiagnosticKind>(m, "DiagnosticKind")
      .value("MissingSlot", DiagnosticKind::MissingSlot)
      .value("UnexpectedToken", DiagnosticKind::UnexpectedToken)
      .value("EmptyAttribute", DiagnosticKind::EmptyAttribute)
      .value("TrailingGarbage", DiagnosticKind::TrailingGarbage);

  py::class_<ParseDiagnostic>(m, "ParseDiagnostic")
      .def_readonly("position", &ParseDiagnostic::position)
      .def_readonly("kind", &ParseDiagnostic::kind)
      .def_readonly("message", &ParseDiagnostic::message)
      .def("__repr__", [](const ParseDiagnostic& d) {
        return "ParseDiagnostic(" + to_string(d.kind) + " at " +
               std::to_string(d.position) + ": " + d.message + ")";
      });

  py::class_<DecodeResult>(m, "DecodeResult")
      .def_readonly("events", &DecodeResult::events)
      .def_readonly("diagnostics", &DecodeResult::diagnostics);

  m.def("encode_events", &encode_events, py::arg("events"), py::arg("format"),
        py::arg("tokens") = TokenSet{});
  m.def(
      "decode_events",
      [](const std::string& s, OutputFormat format, const TokenSet& tokens) {
        return decode_events(s, format, tokens);
      },
      py::arg("s"), py::arg("format"), py::arg("tokens") = TokenSet{});
  m.def("roundtrip_check", &roundtrip_check, py::arg("events"),
        py::arg("format"), py::arg("tokens") = TokenSet{});

  // ---- metrics ----
  py::enum_<MatchMode>(m, "MatchMode")
      .value("FullEvent", MatchMode::FullEvent)
      .value("CoreWord", MatchMode::CoreWord)
      .value("OtherAttributes", MatchMode::OtherAttributes)
      .value("CoreWordStrictPosition", MatchMode::CoreWordStrictPosition);

  py::class_<MatchCounts>(m, "MatchCounts")
      .def(py::init<>())
      .def(py::init([](std::size_t tp, std::size_t fp, std::size_t fn) {
             return MatchCounts{tp, fp, fn};
           }),
           py::arg("tp"), py::arg("fp"), py::arg("fn"))
      .def_readwrite("tp", &MatchCounts::tp)
      .def_readwrite("fp", &MatchCounts::fp)
      .def_readwrite("fn", &MatchCounts::fn)
      .def("__repr__", [](const MatchCounts& c) {
        return "MatchCounts(tp=" + std::to_string(c.tp) +
               ", fp=" + std::to_string(c.fp) +
               ", fn=" + std::to_string(c.fn) + ")";
      });

  py::class_<Scores>(m, "Scores")
      .def_readonly("precision", &Scores::precision)
      .def_readonly("recall", &Scores::recall)
      .def_readonly("f1", &Scores::f1);

  py::class_<ScoreReport>(m, "ScoreReport")
      .def_readonly("mode", &ScoreReport::mode)
      .def_readonly("counts", &ScoreReport::counts)
      .def_readonly("precision", &ScoreReport::precision)
      .def_readonly("recall", &ScoreReport::recall)
      .def_readonly("f1", &ScoreReport::f1);

  m.def("f1_from_counts", &f1_from_counts, py::arg("counts"));
  m.def(
      "match_record",
      [](const std::vector<ClinicalEvent>& gold,
         const std::vector<ClinicalEvent>& pred, MatchMode mode,
         const std::optional<MedicalRecord>& source) {
        return match_record(gold, pred, mode,
                            source ? &*source : nullptr);
      },
      py::arg("gold"), py::arg("pred"), py::arg("mode"),
      py::arg("source") = std::nullopt);
  m.def(
      "score_corpus",
      [](const std::vector<AnnotatedRecord>& gold,
         const std::vector<AnnotatedRecord>& pred, MatchMode mode) {
        return score_corpus(gold, pred, mode);
      },
      py::arg("gold"), py::arg("pred"), py::arg("mode"));
  m.def("report_to_json", &report_to_json, py::arg("report"));

  // ---- corpus tools ----
  py::class_<Corpus>(m, "Corpus")
      .def(py::init<>())
      .def(py::init([](std::vector<AnnotatedRecord> records) {
             return Corpus{std::move(records)};
           }),
           py::arg("records"))
      .def_readwrite("records", &Corpus::records)
      .def("__len__", [](const Corpus& c) { return c.records.size(); });

  py::class_<PredictionLoadStats>(m, "PredictionLoadStats")
      .def_readonly("decoded_lines", &PredictionLoadStats::decoded_lines)
      .def_readonly("diagnostics", &PredictionLoadStats::diagnostics)
      .def_readonly("dropped_events", &PredictionLoadStats::dropped_events);

  py::class_<LengthHistogram>(m, "LengthHistogram")
      .def_readonly("bucket_width", &LengthHistogram::bucket_width)
      .def_readonly("buckets", &LengthHistogram::buckets)
      .def_readonly("total", &LengthHistogram::total)
      .def_readonly("threshold_fractions",
                    &LengthHistogram::threshold_fractions)
      .def_readonly("fractions_defined", &LengthHistogram::fractions_defined);

  m.def("load_corpus", &load_corpus, py::arg("path"));
  m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("path"));
  m.def(
      "load_predictions",
      [](const std::filesystem::path& path, OutputFormat format,
         const Corpus& reference) {
        PredictionLoadStats stats;
        Corpus corpus = load_predictions(path, format, reference, &stats);
        return std::make_pair(std::move(corpus), stats);
      },
      py::arg("path"), py::arg("format"), py::arg("reference"));
  m.def("split_corpus", &split_corpus, py::arg("corpus"),
        py::arg("train_size"), py::arg("seed"));
  m.def("length_histogram", &length_histogram, py::arg("corpus"),
        py::arg("bucket_width"),
        py::arg("thresholds") = std::vector<std::size_t>{});
  m.def("histogram_to_csv", &histogram_to_csv, py::arg("histogram"));
  m.def("count_events", &count_events, py::arg("corpus"));
  m.def("core_frequencies", &core_frequencies, py::arg("corpus"));

  // ---- decoder ----
  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<const TokenSet&, const std::vector<std::string>&>(),
           py::arg("tokens"), py::arg("content_tokens"))
      .def_static(
          "for_texts",
          [](const std::vector<std::string>& texts, const TokenSet& tokens) {
            return Vocabulary::for_texts(texts, tokens);
          },
          py::arg("texts"), py::arg("tokens") = TokenSet{})
      .def("__len__", &Vocabulary::size)
      .def("size", &Vocabulary::size)
      .def("surface", &Vocabulary::surface, py::arg("id"))
      .def("eos_id", &Vocabulary::eos_id)
      .def("id_of", &Vocabulary::id_of, py::arg("surface"))
      .def("special_ids", &Vocabulary::special_ids)
      .def(
          "tokenize",
          [](const Vocabulary& v, const std::string& text) {
            return v.tokenize(text);
          },
          py::arg("text"))
      .def(
          "detokenize",
          [](const Vocabulary& v, const std::vector<int>& ids) {
            return v.detokenize(ids);
          },
          py::arg("ids"));

  py::class_<DecodeConfig>(m, "DecodeConfig")
      .def(py::init<>())
      .def(py::init([](int beam_width, int max_output_len,
                       bool copy_constraint, bool length_normalization) {
             return DecodeConfig{beam_width, max_output_len, copy_constraint,
                                 length_normalization};
           }),
           py::arg("beam_width") = 3, py::arg("max_output_len") = 128,
           py::arg("copy_constraint") = false,
           py::arg("length_normalization") = false)
      .def_readwrite("beam_width", &DecodeConfig::beam_width)
      .def_readwrite("max_output_len", &DecodeConfig::max_output_len)
      .def_readwrite("copy_constraint", &DecodeConfig::copy_constraint)
      .def_readwrite("length_normalization",
                     &DecodeConfig::length_normalization);

  py::class_<NextTokenScorer, PyNextTokenScorer>(m, "NextTokenScorer")
      .def(py::init<>())
      .def("score",
           [](const NextTokenScorer& scorer, const std::vector<int>& prefix,
              const MedicalRecord& source) {
             return scorer.score(prefix, source);
           });

  py::class_<EchoScorer, NextTokenScorer>(m, "EchoScorer")
      .def(py::init<const std::string&, const Vocabulary&>(),
           py::arg("target"), py::arg("vocab"));

  py::class_<SeededRandomScorer, NextTokenScorer>(m, "SeededRandomScorer")
      .def(py::init<std::uint64_t, std::size_t>(), py::arg("seed"),
           py::arg("vocab_size"));

  py::class_<BeamResult>(m, "BeamResult")
      .def_readonly("text", &BeamResult::text)
      .def_readonly("score", &BeamResult::score)
      .def_readonly("truncated", &BeamResult::truncated);

  m.def(
      "allowed_tokens",
      [](const Vocabulary& vocab, const MedicalRecord& source,
         const DecodeConfig& config) {
        // Mask for the grammar start state; step-by-step masks are driven
        // internally by beam_search.
        GrammarState state;
        const auto mask = allowed_tokens(state, vocab, source, config);
        return std::vector<bool>(mask.begin(), mask.end());
      },
      py::arg("vocab"), py::arg("source"), py::arg("config") = DecodeConfig{});
  m.def("beam_search", &beam_search, py::arg("scorer"), py::arg("source"),
        py::arg("vocab"), py::arg("config") = DecodeConfig{});

  // ---- extractor ----
  py::class_<Lexicon>(m, "Lexicon")
      .def(py::init<>())
      .def(py::init([](std::set<std::string> core_terms,
                       std::set<std::string> anatomy_terms,
                       std::set<std::string> negation_cues,
                       std::set<std::string> characteristic_terms) {
             return Lexicon{std::move(core_terms), std::move(anatomy_terms),
                            std::move(negation_cues),
                            std::move(characteristic_terms)};
           }),
           py::arg("core_terms") = std::set<std::string>{},
           py::arg("anatomy_terms") = std::set<std::string>{},
           py::arg("negation_cues") = std::set<std::string>{},
           py::arg("characteristic_terms") = std::set<std::string>{})
      .def_readwrite("core_terms", &Lexicon::core_terms)
      .def_readwrite("anatomy_terms", &Lexicon::anatomy_terms)
      .def_readwrite("negation_cues", &Lexicon::negation_cues)
      .def_readwrite("characteristic_terms", &Lexicon::characteristic_terms);

  py::class_<ExtractorOptions>(m, "ExtractorOptions")
      .def(py::init<>())
      .def_readwrite("negation_window", &ExtractorOptions::negation_window);

  m.def("load_lexicon", &load_lexicon, py::arg("path"));
  m.def("rule_extract", &rule_extract, py::arg("record"), py::arg("lexicon"),
        py::arg("options") = ExtractorOptions{});

  // ---- error analysis ----
  py::enum_<ErrorCategory>(m, "ErrorCategory")
      .value("RareCoreWordMissed", ErrorCategory::RareCoreWordMissed)
      .value("MergedEvents", ErrorCategory::MergedEvents)
      .value("VocabularyDrift", ErrorCategory::VocabularyDrift)
      .value("SpuriousEvent", ErrorCategory::SpuriousEvent)
      .value("Other", ErrorCategory::Other);

  py::class_<ErrorReport>(m, "ErrorReport")
      .def_readonly("record_id", &ErrorReport::record_id)
      .def_readonly("category", &ErrorReport::category)
      .def_readonly("gold_event", &ErrorReport::gold_event)
      .def_readonly("pred_event", &ErrorReport::pred_event)
      .def_readonly("evidence", &ErrorReport::evidence);

  py::class_<NotInSourceStats>(m, "NotInSourceStats")
      .def_readonly("total_attribute_instances",
                    &NotInSourceStats::total_attribute_instances)
      .def_readonly("not_in_source", &NotInSourceStats::not_in_source)
      .def_readonly("rate", &NotInSourceStats::rate);

  py::class_<AnalysisOptions>(m, "AnalysisOptions")
      .def(py::init<>())
      .def_readwrite("rarity_threshold", &AnalysisOptions::rarity_threshold);

  py::class_<ErrorSummary>(m, "ErrorSummary")
      .def_readonly("counts", &ErrorSummary::counts)
      .def_readonly("total", &ErrorSummary::total);

  m.def(
      "not_in_source_rate",
      [](const std::vector<AnnotatedRecord>& pred) {
        return not_in_source_rate(pred);
      },
      py::arg("pred"));
  m.def("classify_errors", &classify_errors, py::arg("gold"), py::arg("pred"),
        py::arg("train_core_freq"), py::arg("options") = AnalysisOptions{});
  m.def("classify_corpus", &classify_corpus, py::arg("gold"), py::arg("pred"),
        py::arg("train_core_freq"), py::arg("options") = AnalysisOptions{});
  m.def(
      "error_summary",
      [](const std::vector<ErrorReport>& reports) {
        return error_summary(reports);
      },
      py::arg("reports"));

  // ---- cli ----
  m.def("run_cli", &run_cli, py::arg("args"),
        "Run a CLI subcommand in-process; returns the exit code.");
}
