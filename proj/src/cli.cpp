#include "clinev/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "clinev/corpus.hpp"
#include "clinev/decoder.hpp"
#include "clinev/error_analysis.hpp"
#include "clinev/errors.hpp"
#include "clinev/extractor.hpp"
#include "clinev/linearizer.hpp"
#include "clinev/metrics.hpp"
#include "clinev/unicode.hpp"

namespace clinev {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

OutputFormat format_from_string(const std::string& name) {
  if (name == "special") return OutputFormat::SpecialToken;
  if (name == "baseline") return OutputFormat::Baseline;
  throw Error("unknown format '" + name + "' (expected special|baseline)");
}

// Returns the stream for path, or fallback for "" / "-".
std::ostream& open_out(const std::string& path, std::ofstream& file,
                       std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw Error("cannot open output file " + path);
  return file;
}

std::map<std::string, std::string> load_target_strings(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open targets file " + path);
  std::map<std::string, std::string> targets;
  std::string line_text;
  std::size_t line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (utf8::trim(line_text).empty()) continue;
    json obj = json::parse(line_text, nullptr, false);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("id") ||
        !obj.contains("output") || !obj["id"].is_string() ||
        !obj["output"].is_string()) {
      throw ParseError(path + ":" + std::to_string(line) +
                           ": expected {\"id\": str, \"output\": str}",
                       line);
    }
    targets[obj["id"].get<std::string>()] = obj["output"].get<std::string>();
  }
  return targets;
}

int cmd_encode(const std::string& input, const std::string& format_name,
               const std::string& out_path) {
  const OutputFormat format = format_from_string(format_name);
  const Corpus corpus = load_corpus(input);
  std::ofstream file;
  std::ostream& out = open_out(out_path, file, std::cout);
  for (const auto& rec : corpus.records) {
    ordered_json j;
    j["id"] = rec.record.id;
    j["text"] = rec.record.text;
    j["output"] = encode_events(rec.events, format);
    out << j.dump() << '\n';
  }
  return 0;
}

int cmd_decode(const std::string& input, const std::string& format_name,
               const std::string& source_path, const std::string& out_path,
               const std::string& diagnostics_path) {
  const OutputFormat format = format_from_string(format_name);
  std::ifstream in(input);
  if (!in) throw Error("cannot open input file " + input);

  std::map<std::string, std::string> source_texts;
  if (!source_path.empty()) {
    for (const auto& rec : load_corpus(source_path).records) {
      source_texts[rec.record.id] = rec.record.text;
    }
  }

  std::ofstream out_file, diag_file;
  std::ostream& out = open_out(out_path, out_file, std::cout);
  std::ostream* diag_out = nullptr;
  if (!diagnostics_path.empty()) {
    diag_out = &open_out(diagnostics_path, diag_file, std::cerr);
  }

  std::size_t total_diagnostics = 0, dropped_events = 0;
  std::string line_text;
  std::size_t line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (utf8::trim(line_text).empty()) continue;
    json obj = json::parse(line_text, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw ParseError(input + ":" + std::to_string(line) +
                           ": malformed JSON",
                       line);
    }
    if (!obj.contains("id") || !obj["id"].is_string() ||
        !obj.contains("output") || !obj["output"].is_string()) {
      throw SchemaError(input + ":" + std::to_string(line) +
                            ": expected {\"id\": str, \"output\": str}",
                        line, "output");
    }
    AnnotatedRecord rec;
    rec.record.id = obj["id"].get<std::string>();
    if (obj.contains("text") && obj["text"].is_string()) {
      rec.record.text = obj["text"].get<std::string>();
    } else if (auto it = source_texts.find(rec.record.id);
               it != source_texts.end()) {
      rec.record.text = it->second;
    } else {
      throw SchemaError(input + ":" + std::to_string(line) +
                            ": no text for record '" + rec.record.id +
                            "' (add a \"text\" field or pass --source)",
                        line, "text");
    }

    const DecodeResult decoded =
        decode_events(obj["output"].get<std::string>(), format);
    total_diagnostics += decoded.diagnostics.size();
    for (const auto& event : decoded.events) {
      try {
        rec.events.push_back(normalize_event(event));
      } catch (const InvalidEvent&) {
        ++dropped_events;
      }
    }
    if (diag_out != nullptr) {
      for (const auto& d : decoded.diagnostics) {
        ordered_json j;
        j["id"] = rec.record.id;
        j["position"] = d.position;
        j["kind"] = to_string(d.kind);
        j["message"] = d.message;
        *diag_out << j.dump() << '\n';
      }
    }
    out << record_to_jsonl(rec) << '\n';
  }
  std::cerr << "decode: " << total_diagnostics << " diagnostic(s), "
            << dropped_events << " event(s) dropped\n";
  return 0;
}

int cmd_score(const std::string& gold_path, const std::string& pred_path,
              const std::string& mode_name, const std::string& format_name,
              const std::string& out_path) {
  const MatchMode mode = match_mode_from_string(mode_name);
  const Corpus gold = load_corpus(gold_path);
  const Corpus pred =
      load_predictions(pred_path, format_from_string(format_name), gold);
  const ScoreReport report = score_corpus(gold.records, pred.records, mode);
  std::ofstream file;
  std::ostream& out = open_out(out_path, file, std::cout);
  out << report_to_json(report) << '\n';
  std::cerr << std::setprecision(17) << "score[" << to_string(mode)
            << "]: tp=" << report.counts.tp << " fp=" << report.counts.fp
            << " fn=" << report.counts.fn << " P=" << report.precision
            << " R=" << report.recall << " F1=" << report.f1 << '\n';
  return 0;
}

int cmd_stats(const std::string& input, std::size_t bucket_width,
              std::vector<std::size_t> thresholds,
              const std::string& csv_path) {
  if (thresholds.empty()) thresholds.push_back(200);
  const Corpus corpus = load_corpus(input);
  const LengthHistogram hist =
      length_histogram(corpus, bucket_width, thresholds);
  ordered_json j;
  j["records"] = corpus.records.size();
  j["events"] = count_events(corpus);
  j["bucket_width"] = hist.bucket_width;
  j["fractions_defined"] = hist.fractions_defined;
  j["thresholds"] = ordered_json::array();
  for (const auto& [threshold, fraction] : hist.threshold_fractions) {
    j["thresholds"].push_back(
        {{"max_length", threshold}, {"fraction", fraction}});
  }
  std::cout << j.dump() << '\n';
  if (!csv_path.empty()) {
    std::ofstream file;
    std::ostream& out = open_out(csv_path, file, std::cout);
    out << histogram_to_csv(hist);
  }
  return 0;
}

int cmd_split(const std::string& input, std::size_t train_size,
              std::uint64_t seed, const std::string& train_out,
              const std::string& valid_out) {
  const Corpus corpus = load_corpus(input);
  const auto [train, valid] = split_corpus(corpus, train_size, seed);
  save_corpus(train, train_out);
  save_corpus(valid, valid_out);
  std::cerr << "split: " << train.records.size() << " train / "
            << valid.records.size() << " valid\n";
  return 0;
}

int cmd_extract(const std::string& input, const std::string& lexicon_path,
                std::size_t negation_window, const std::string& out_path) {
  const Corpus corpus = load_corpus(input);
  const Lexicon lexicon = load_lexicon(lexicon_path);
  ExtractorOptions options;
  options.negation_window = negation_window;
  std::ofstream file;
  std::ostream& out = open_out(out_path, file, std::cout);
  for (const auto& rec : corpus.records) {
    AnnotatedRecord pred{rec.record, rule_extract(rec.record, lexicon, options)};
    out << record_to_jsonl(pred) << '\n';
  }
  return 0;
}

int cmd_beam_decode(const std::string& input, const std::string& scorer_name,
                    const std::string& targets_path, std::uint64_t seed,
                    int beam_width, int max_len, bool copy_constraint,
                    bool length_normalization, const std::string& out_path) {
  const Corpus corpus = load_corpus(input);

  std::vector<std::string> texts;
  for (const auto& rec : corpus.records) texts.push_back(rec.record.text);
  std::map<std::string, std::string> targets;
  if (scorer_name == "echo") {
    if (targets_path.empty()) {
      throw Error("--scorer echo requires --targets");
    }
    targets = load_target_strings(targets_path);
    for (const auto& [id, target] : targets) texts.push_back(target);
  } else if (scorer_name != "random") {
    throw Error("unknown scorer '" + scorer_name + "' (expected echo|random)");
  }
  const Vocabulary vocab = Vocabulary::for_texts(texts);

  DecodeConfig config;
  config.beam_width = beam_width;
  config.max_output_len = max_len;
  config.copy_constraint = copy_constraint;
  config.length_normalization = length_normalization;

  std::ofstream file;
  std::ostream& out = open_out(out_path, file, std::cout);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& rec = corpus.records[i];
    BeamResult result;
    if (scorer_name == "echo") {
      const auto it = targets.find(rec.record.id);
      if (it == targets.end()) {
        throw Error("no target string for record '" + rec.record.id + "'");
      }
      const EchoScorer scorer(it->second, vocab);
      result = beam_search(scorer, rec.record, vocab, config);
    } else {
      const SeededRandomScorer scorer(seed + i, vocab.size());
      result = beam_search(scorer, rec.record, vocab, config);
    }
    ordered_json j;
    j["id"] = rec.record.id;
    j["text"] = rec.record.text;
    j["output"] = result.text;
    j["score"] = result.score;
    j["truncated"] = result.truncated;
    out << j.dump() << '\n';
  }
  return 0;
}

int cmd_analyze(const std::string& gold_path, const std::string& pred_path,
                const std::string& train_path, std::size_t rarity_threshold,
                const std::string& format_name,
                const std::string& reports_path) {
  const Corpus gold = load_corpus(gold_path);
  const Corpus pred =
      load_predictions(pred_path, format_from_string(format_name), gold);
  const Corpus train = load_corpus(train_path);
  AnalysisOptions options;
  options.rarity_threshold = rarity_threshold;

  const auto reports =
      classify_corpus(gold, pred, core_frequencies(train), options);
  if (!reports_path.empty()) {
    std::ofstream file;
    std::ostream& out = open_out(reports_path, file, std::cout);
    for (const auto& report : reports) out << report_to_jsonl(report) << '\n';
  }

  const ErrorSummary summary = error_summary(reports);
  const NotInSourceStats stats = not_in_source_rate(pred.records);
  std::ostringstream table;
  table << "error summary (" << summary.total << " report(s), rarity <= "
        << options.rarity_threshold << ")\n";
  for (const auto category :
       {ErrorCategory::RareCoreWordMissed, ErrorCategory::MergedEvents,
        ErrorCategory::VocabularyDrift, ErrorCategory::SpuriousEvent,
        ErrorCategory::Other}) {
    const auto it = summary.counts.find(category);
    const std::size_t count = (it == summary.counts.end()) ? 0 : it->second;
    const double pct =
        summary.total > 0 ? 100.0 * count / summary.total : 0.0;
    table << "  " << std::left << std::setw(24) << to_string(category)
          << std::right << std::setw(6) << count << "  (" << std::fixed
          << std::setprecision(1) << pct << "%)\n";
  }
  table << "not-in-source attribute instances (tendency excluded): "
        << stats.not_in_source << "/" << stats.total_attribute_instances
        << " = " << std::fixed << std::setprecision(4) << stats.rate << '\n';
  std::cout << table.str();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"clinical finding event toolkit: linearize, decode, score, "
               "and analyze event extraction corpora"};
  app.require_subcommand(1);

  // encode
  std::string enc_input, enc_format = "special", enc_out;
  auto* enc = app.add_subcommand(
      "encode", "corpus JSONL -> linearized strings JSONL");
  enc->add_option("input", enc_input, "corpus JSONL")->required();
  enc->add_option("--format", enc_format, "special|baseline")
      ->check(CLI::IsMember({"special", "baseline"}));
  enc->add_option("--out", enc_out, "output path (default stdout)");

  // decode
  std::string dec_input, dec_format = "special", dec_source, dec_out,
              dec_diag;
  auto* dec = app.add_subcommand(
      "decode", "strings JSONL -> corpus JSONL plus diagnostics");
  dec->add_option("input", dec_input, "strings JSONL")->required();
  dec->add_option("--format", dec_format, "special|baseline")
      ->check(CLI::IsMember({"special", "baseline"}));
  dec->add_option("--source", dec_source,
                  "corpus supplying source texts by id");
  dec->add_option("--out", dec_out, "output path (default stdout)");
  dec->add_option("--diagnostics", dec_diag, "diagnostics JSONL path");

  // score
  std::string score_gold, score_pred, score_mode = "full",
              score_format = "special", score_out;
  auto* score = app.add_subcommand("score", "gold + pred -> P/R/F1 report");
  score->add_option("gold", score_gold, "gold corpus JSONL")->required();
  score->add_option("pred", score_pred, "predictions JSONL")->required();
  score->add_option("--mode", score_mode, "full|core|attrs|strict-pos")
      ->check(CLI::IsMember({"full", "core", "attrs", "strict-pos"}));
  score->add_option("--format", score_format,
                    "format for raw prediction strings")
      ->check(CLI::IsMember({"special", "baseline"}));
  score->add_option("--out", score_out, "report path (default stdout)");

  // stats
  std::string stats_input, stats_csv;
  std::size_t stats_bucket = 20;
  std::vector<std::size_t> stats_thresholds;
  auto* stats = app.add_subcommand(
      "stats", "corpus -> length histogram CSV and event counts");
  stats->add_option("input", stats_input, "corpus JSONL")->required();
  stats->add_option("--bucket-width", stats_bucket, "histogram bucket width")
      ->check(CLI::PositiveNumber);
  stats->add_option("--threshold", stats_thresholds,
                    "report fraction of records with length <= N");
  stats->add_option("--csv", stats_csv, "histogram CSV path");

  // split
  std::string split_input, split_train_out = "train.jsonl",
              split_valid_out = "valid.jsonl";
  std::size_t split_train_size = 0;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand(
      "split", "corpus -> deterministic train/valid JSONL");
  split->add_option("input", split_input, "corpus JSONL")->required();
  split->add_option("--train-size", split_train_size, "records in train")
      ->required();
  split->add_option("--seed", split_seed, "shuffle seed")->required();
  split->add_option("--train-out", split_train_out, "train output path");
  split->add_option("--valid-out", split_valid_out, "valid output path");

  // extract
  std::string ext_input, ext_lexicon, ext_out;
  std::size_t ext_window = 6;
  auto* ext = app.add_subcommand(
      "extract", "corpus + lexicon -> rule-based predictions");
  ext->add_option("input", ext_input, "corpus JSONL")->required();
  ext->add_option("--lexicon", ext_lexicon, "lexicon JSON")->required();
  ext->add_option("--negation-window", ext_window,
                  "code points a negation cue may precede a core by");
  ext->add_option("--out", ext_out, "output path (default stdout)");

  // beam-decode
  std::string bd_input, bd_scorer = "random", bd_targets, bd_out;
  std::uint64_t bd_seed = 0;
  int bd_width = 3, bd_max_len = 128;
  bool bd_copy = false, bd_norm = false;
  auto* bd = app.add_subcommand(
      "beam-decode", "corpus + scorer fixture -> constrained decodes");
  bd->add_option("input", bd_input, "corpus JSONL")->required();
  bd->add_option("--scorer", bd_scorer, "echo|random")
      ->check(CLI::IsMember({"echo", "random"}));
  bd->add_option("--targets", bd_targets,
                 "targets JSONL for the echo scorer");
  bd->add_option("--seed", bd_seed, "seed for the random scorer");
  bd->add_option("--beam-width", bd_width, "beam width")
      ->check(CLI::PositiveNumber);
  bd->add_option("--max-len", bd_max_len, "maximum output tokens")
      ->check(CLI::PositiveNumber);
  bd->add_flag("--copy-constraint", bd_copy,
               "restrict content tokens to substrings of the source");
  bd->add_flag("--length-normalization", bd_norm,
               "rank hypotheses by score/length");
  bd->add_option("--out", bd_out, "output path (default stdout)");

  // analyze
  std::string an_gold, an_pred, an_train, an_format = "special", an_reports;
  std::size_t an_rarity = 2;
  auto* an = app.add_subcommand(
      "analyze", "gold + pred + train corpus -> error reports");
  an->add_option("gold", an_gold, "gold corpus JSONL")->required();
  an->add_option("pred", an_pred, "predictions JSONL")->required();
  an->add_option("--train", an_train, "training corpus for core frequencies")
      ->required();
  an->add_option("--rarity-threshold", an_rarity,
                 "max training count for a rare core word");
  an->add_option("--format", an_format,
                 "format for raw prediction strings")
      ->check(CLI::IsMember({"special", "baseline"}));
  an->add_option("--reports", an_reports, "error reports JSONL path");

  std::vector<const char*> argv;
  argv.push_back("clinev");
  for (const auto& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()),
              const_cast<char**>(argv.data()));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (enc->parsed()) return cmd_encode(enc_input, enc_format, enc_out);
    if (dec->parsed()) {
      return cmd_decode(dec_input, dec_format, dec_source, dec_out, dec_diag);
    }
    if (score->parsed()) {
      return cmd_score(score_gold, score_pred, score_mode, score_format,
                       score_out);
    }
    if (stats->parsed()) {
      return cmd_stats(stats_input, stats_bucket, stats_thresholds,
                       stats_csv);
    }
    if (split->parsed()) {
      return cmd_split(split_input, split_train_size, split_seed,
                       split_train_out, split_valid_out);
    }
    if (ext->parsed()) {
      return cmd_extract(ext_input, ext_lexicon, ext_window, ext_out);
    }
    if (bd->parsed()) {
      return cmd_beam_decode(bd_input, bd_scorer, bd_targets, bd_seed,
                             bd_width, bd_max_len, bd_copy, bd_norm, bd_out);
    }
    if (an->parsed()) {
      return cmd_analyze(an_gold, an_pred, an_train, an_rarity, an_format,
                         an_reports);
    }
  } catch (const NoHypothesis& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}

}  // namespace clinev
