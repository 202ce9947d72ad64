#include "clinev/decoder.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "clinev/errors.hpp"
#include "clinev/unicode.hpp"

namespace clinev {

namespace {

constexpr double kVeto = -1e9;
constexpr const char* kEosSurface = "</s>";

bool is_multi_slot(GrammarSlot slot) {
  return slot == GrammarSlot::Characteristic || slot == GrammarSlot::Anatomy;
}

// The token that opens the slot after this one, Eos meaning "event done".
TokenKind next_boundary(GrammarSlot slot) {
  switch (slot) {
    case GrammarSlot::Core: return TokenKind::Tendency;
    case GrammarSlot::Tendency: return TokenKind::Character;
    case GrammarSlot::Characteristic: return TokenKind::Anatomy;
    default: return TokenKind::Eos;
  }
}

GrammarSlot slot_opened_by(TokenKind kind) {
  switch (kind) {
    case TokenKind::Ent: return GrammarSlot::Core;
    case TokenKind::Tendency: return GrammarSlot::Tendency;
    case TokenKind::Character: return GrammarSlot::Characteristic;
    case TokenKind::Anatomy: return GrammarSlot::Anatomy;
    default: return GrammarSlot::Done;
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Vocabulary::Vocabulary(const TokenSet& tokens,
                       const std::vector<std::string>& content_tokens)
    : token_set_(tokens) {
  token_set_.validate();
  const auto add = [&](const std::string& surface, TokenKind kind) {
    if (index_.count(surface)) {
      throw Error("duplicate vocabulary surface '" + surface + "'");
    }
    const int id = static_cast<int>(surfaces_.size());
    surfaces_.push_back(surface);
    kinds_.push_back(kind);
    index_[surface] = id;
    max_token_cps_ = std::max(max_token_cps_, utf8::length(surface));
    return id;
  };
  eos_id_ = add(kEosSurface, TokenKind::Eos);
  special_ids_[tokens.ent] = add(tokens.ent, TokenKind::Ent);
  special_ids_[tokens.tendency] = add(tokens.tendency, TokenKind::Tendency);
  special_ids_[tokens.character] = add(tokens.character, TokenKind::Character);
  special_ids_[tokens.anatomy] = add(tokens.anatomy, TokenKind::Anatomy);
  special_ids_[tokens.separator] = add(tokens.separator, TokenKind::Separator);
  special_ids_[tokens.null_tag] = add(tokens.null_tag, TokenKind::Null);
  special_ids_[tokens.baseline_sep] =
      add(tokens.baseline_sep, TokenKind::BaselineSep);
  for (const auto& surface : content_tokens) {
    if (surface.empty()) throw Error("empty content token");
    if (!index_.count(surface)) add(surface, TokenKind::Content);
  }
}

Vocabulary Vocabulary::for_texts(std::span<const std::string> texts,
                                 const TokenSet& tokens) {
  std::set<char32_t> alphabet;
  for (const auto& text : texts) {
    for (const char32_t cp : utf8::decode(text)) alphabet.insert(cp);
  }
  std::vector<std::string> content;
  content.reserve(alphabet.size());
  for (const char32_t cp : alphabet) {
    content.push_back(utf8::encode(std::u32string(1, cp)));
  }
  return Vocabulary(tokens, content);
}

int Vocabulary::id_of(const std::string& surface) const {
  const auto it = index_.find(surface);
  return (it == index_.end()) ? -1 : it->second;
}

std::vector<int> Vocabulary::tokenize(std::string_view text) const {
  const std::u32string cps = utf8::decode(text);
  std::vector<int> out;
  std::size_t i = 0;
  while (i < cps.size()) {
    int matched = -1;
    const std::size_t longest =
        std::min(max_token_cps_, cps.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      const std::string candidate =
          utf8::encode(std::u32string_view(cps).substr(i, len));
      const auto it = index_.find(candidate);
      if (it != index_.end()) {
        matched = it->second;
        i += len;
        break;
      }
    }
    if (matched < 0) {
      throw TokenizationError(
          "no vocabulary token matches text at code point " +
          std::to_string(i) + " of '" + std::string(text) + "'");
    }
    out.push_back(matched);
  }
  return out;
}

std::string Vocabulary::detokenize(std::span<const int> ids) const {
  std::string out;
  for (const int id : ids) {
    if (id < 0 || id >= static_cast<int>(surfaces_.size())) {
      throw Error("token id " + std::to_string(id) + " out of range");
    }
    out += surfaces_[id];
  }
  return out;
}

OutputGrammar::OutputGrammar(TokenSet tokens) : tokens_(std::move(tokens)) {
  tokens_.validate();
}

bool OutputGrammar::admits(const GrammarState& state, TokenKind kind) const {
  if (kind == TokenKind::BaselineSep) return false;
  switch (state.slot) {
    case GrammarSlot::Start:
      return kind == TokenKind::Ent || kind == TokenKind::Eos;
    case GrammarSlot::Done:
      return false;
    case GrammarSlot::Core:
      // Core is a plain value: no null tag, no separators.
      if (kind == TokenKind::Content) return true;
      if (kind == TokenKind::Tendency) {
        return state.phase == GrammarPhase::HasContent;
      }
      return false;
    case GrammarSlot::Tendency:
      if (kind == TokenKind::Content) {
        return state.phase != GrammarPhase::AfterNull;
      }
      if (kind == TokenKind::Null) return state.phase == GrammarPhase::Empty;
      if (kind == TokenKind::Character) {
        return state.phase == GrammarPhase::HasContent ||
               state.phase == GrammarPhase::AfterNull;
      }
      return false;
    case GrammarSlot::Characteristic:
    case GrammarSlot::Anatomy: {
      const bool closed_ok = state.phase == GrammarPhase::HasContent ||
                             state.phase == GrammarPhase::AfterNull;
      if (kind == TokenKind::Content) {
        return state.phase != GrammarPhase::AfterNull;
      }
      if (kind == TokenKind::Null) return state.phase == GrammarPhase::Empty;
      if (kind == TokenKind::Separator) {
        return is_multi_slot(state.slot) &&
               state.phase == GrammarPhase::HasContent;
      }
      if (state.slot == GrammarSlot::Characteristic) {
        return kind == TokenKind::Anatomy && closed_ok;
      }
      // Anatomy closes the event: next event or end of sequence.
      return (kind == TokenKind::Ent || kind == TokenKind::Eos) && closed_ok;
    }
  }
  return false;
}

GrammarState OutputGrammar::advance(const GrammarState& state, TokenKind kind,
                                    std::u32string_view surface) const {
  assert(admits(state, kind));
  GrammarState next = state;
  switch (kind) {
    case TokenKind::Content:
      next.phase = GrammarPhase::HasContent;
      next.value_prefix += surface;
      return next;
    case TokenKind::Null:
      next.phase = GrammarPhase::AfterNull;
      next.value_prefix.clear();
      return next;
    case TokenKind::Separator:
      next.phase = GrammarPhase::AfterSeparator;
      next.value_prefix.clear();
      return next;
    case TokenKind::Eos:
      if (state.slot == GrammarSlot::Anatomy) ++next.events_completed;
      next.slot = GrammarSlot::Done;
      next.phase = GrammarPhase::Empty;
      next.value_prefix.clear();
      return next;
    case TokenKind::Ent:
      if (state.slot == GrammarSlot::Anatomy) ++next.events_completed;
      next.slot = GrammarSlot::Core;
      next.phase = GrammarPhase::Empty;
      next.value_prefix.clear();
      return next;
    default:
      next.slot = slot_opened_by(kind);
      next.phase = GrammarPhase::Empty;
      next.value_prefix.clear();
      return next;
  }
}

std::vector<char> allowed_tokens(const GrammarState& state,
                                 const Vocabulary& vocab,
                                 const MedicalRecord& source,
                                 const DecodeConfig& config) {
  const OutputGrammar grammar(vocab.token_set());
  const std::u32string source_text = utf8::decode(source.text);
  std::vector<char> mask(vocab.size(), 0);
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const TokenKind kind = vocab.kind(static_cast<int>(id));
    if (!grammar.admits(state, kind)) continue;
    if (kind == TokenKind::Content && config.copy_constraint) {
      const std::u32string extended =
          state.value_prefix + utf8::decode(vocab.surface(static_cast<int>(id)));
      if (source_text.find(extended) == std::u32string::npos) continue;
    }
    mask[id] = 1;
  }
  return mask;
}

namespace {

struct Hypothesis {
  std::vector<int> tokens;
  double score = 0;
  GrammarState state;
};

double ranking_score(double score, std::size_t len, bool length_norm) {
  if (!length_norm || len == 0) return score;
  return score / static_cast<double>(len);
}

// Higher ranking score wins; ties go to the lexicographically smaller token
// sequence for determinism.
bool better(double score_a, const std::vector<int>& tokens_a, double score_b,
            const std::vector<int>& tokens_b) {
  if (score_a != score_b) return score_a > score_b;
  return tokens_a < tokens_b;
}

}  // namespace

BeamResult beam_search(const NextTokenScorer& scorer,
                       const MedicalRecord& source, const Vocabulary& vocab,
                       const DecodeConfig& config) {
  if (config.beam_width < 1) throw Error("beam width must be >= 1");
  if (config.max_output_len < 1) throw Error("max output length must be >= 1");

  const OutputGrammar grammar(vocab.token_set());
  const std::u32string source_text = utf8::decode(source.text);
  std::vector<std::u32string> surfaces32(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    surfaces32[id] = utf8::decode(vocab.surface(static_cast<int>(id)));
  }

  std::vector<Hypothesis> active;
  active.push_back({});
  bool have_finished = false;
  Hypothesis best_finished;
  double best_finished_rank = 0;

  const auto offer_finished = [&](Hypothesis hyp) {
    const double rank =
        ranking_score(hyp.score, hyp.tokens.size(), config.length_normalization);
    if (!have_finished ||
        better(rank, hyp.tokens, best_finished_rank, best_finished.tokens)) {
      best_finished = std::move(hyp);
      best_finished_rank = rank;
      have_finished = true;
    }
  };

  for (int step = 0; step < config.max_output_len && !active.empty(); ++step) {
    struct Candidate {
      double score;
      std::size_t parent;
      int token;
    };
    std::vector<Candidate> expansions;
    for (std::size_t h = 0; h < active.size(); ++h) {
      const Hypothesis& hyp = active[h];
      const std::vector<double> scores = scorer.score(hyp.tokens, source);
      if (scores.size() != vocab.size()) {
        throw Error("scorer returned " + std::to_string(scores.size()) +
                    " scores for a vocabulary of " +
                    std::to_string(vocab.size()));
      }
      for (std::size_t id = 0; id < vocab.size(); ++id) {
        const TokenKind kind = vocab.kind(static_cast<int>(id));
        if (!grammar.admits(hyp.state, kind)) continue;
        if (kind == TokenKind::Content && config.copy_constraint) {
          const std::u32string extended = hyp.state.value_prefix + surfaces32[id];
          if (source_text.find(extended) == std::u32string::npos) continue;
        }
        expansions.push_back(
            {hyp.score + scores[id], h, static_cast<int>(id)});
      }
    }

    // Deterministic order: score desc, then parent and token id asc.
    std::sort(expansions.begin(), expansions.end(),
              [](const Candidate& a, const Candidate& b) {
                if (a.score != b.score) return a.score > b.score;
                if (a.parent != b.parent) return a.parent < b.parent;
                return a.token < b.token;
              });

    std::vector<Hypothesis> next_active;
    for (const Candidate& cand : expansions) {
      const Hypothesis& parent = active[cand.parent];
      const TokenKind kind = vocab.kind(cand.token);
      if (kind == TokenKind::Eos) {
        Hypothesis finished;
        finished.tokens = parent.tokens;
        finished.tokens.push_back(cand.token);
        finished.score = cand.score;
        finished.state = grammar.advance(parent.state, kind, {});
        offer_finished(std::move(finished));
        continue;
      }
      if (next_active.size() >= static_cast<std::size_t>(config.beam_width)) {
        continue;
      }
      Hypothesis child;
      child.tokens = parent.tokens;
      child.tokens.push_back(cand.token);
      child.score = cand.score;
      child.state = grammar.advance(parent.state, kind, surfaces32[cand.token]);
      next_active.push_back(std::move(child));
    }
    active = std::move(next_active);
  }

  if (have_finished) {
    BeamResult result;
    result.text = vocab.detokenize(std::span<const int>(
        best_finished.tokens.data(), best_finished.tokens.size() - 1));
    result.score = best_finished_rank;
    result.truncated = false;
    return result;
  }

  // Nothing reached EOS within the length budget: return the best partial
  // hypothesis, flagged.
  const Hypothesis* best = nullptr;
  double best_rank = 0;
  for (const Hypothesis& hyp : active) {
    const double rank =
        ranking_score(hyp.score, hyp.tokens.size(), config.length_normalization);
    if (best == nullptr ||
        better(rank, hyp.tokens, best_rank, best->tokens)) {
      best = &hyp;
      best_rank = rank;
    }
  }
  if (best == nullptr) {
    // Unreachable: EOS is admitted at Start, so the empty output always
    // reaches offer_finished on the first step.
    throw NoHypothesis("beam emptied without any finished hypothesis");
  }
  BeamResult result;
  result.text = vocab.detokenize(best->tokens);
  result.score = best_rank;
  result.truncated = true;
  return result;
}

EchoScorer::EchoScorer(const std::string& target, const Vocabulary& vocab)
    : target_(vocab.tokenize(target)),
      vocab_size_(vocab.size()),
      eos_id_(vocab.eos_id()) {}

std::vector<double> EchoScorer::score(std::span<const int> prefix,
                                      const MedicalRecord&) const {
  std::vector<double> scores(vocab_size_, kVeto);
  int desired = eos_id_;
  if (prefix.size() < target_.size() &&
      std::equal(prefix.begin(), prefix.end(), target_.begin())) {
    desired = target_[prefix.size()];
  }
  scores[desired] = 0;
  return scores;
}

SeededRandomScorer::SeededRandomScorer(std::uint64_t seed,
                                       std::size_t vocab_size)
    : seed_(seed), vocab_size_(vocab_size) {}

std::vector<double> SeededRandomScorer::score(std::span<const int> prefix,
                                              const MedicalRecord&) const {
  // Scores must be a fixed function of the prefix, so hash the prefix into
  // a fresh stream rather than advancing shared generator state.
  std::uint64_t h = splitmix64(seed_ ^ 0x5851F42D4C957F2DULL);
  for (const int id : prefix) {
    h = splitmix64(h ^ static_cast<std::uint64_t>(id));
  }
  std::vector<double> scores(vocab_size_);
  for (std::size_t id = 0; id < vocab_size_; ++id) {
    h = splitmix64(h);
    scores[id] = -5.0 * (static_cast<double>(h >> 11) / 9007199254740992.0);
  }
  return scores;
}

}  // namespace clinev
