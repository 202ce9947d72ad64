"""Clinical finding event toolkit.

Event linearization for generative extractors, grammar-constrained beam
search over a pluggable token scorer, entity-level evaluation, corpus
tooling, a rule-based reference extractor, and error analysis.
"""

from ._core import (  # noqa: F401
    AnalysisOptions,
    AnnotatedRecord,
    BeamResult,
    CanonicalEventKey,
    ClinicalEvent,
    Corpus,
    DecodeConfig,
    DecodeResult,
    EchoScorer,
    ErrorCategory,
    ErrorReport,
    ErrorSummary,
    ExtractorOptions,
    LengthHistogram,
    Lexicon,
    MatchCounts,
    MatchMode,
    MedicalRecord,
    NextTokenScorer,
    NotInSourceStats,
    OutputFormat,
    ParseDiagnostic,
    PredictionLoadStats,
    ScoreReport,
    Scores,
    SeededRandomScorer,
    TokenSet,
    Vocabulary,
    allowed_tokens,
    beam_search,
    classify_corpus,
    classify_errors,
    core_frequencies,
    count_events,
    decode_events,
    encode_events,
    error_summary,
    event_key,
    f1_from_counts,
    histogram_to_csv,
    length_histogram,
    load_corpus,
    load_lexicon,
    load_predictions,
    match_record,
    normalize_event,
    not_in_source_rate,
    report_to_json,
    roundtrip_check,
    rule_extract,
    run_cli,
    save_corpus,
    score_corpus,
    split_corpus,
)

__version__ = "0.1.0"
