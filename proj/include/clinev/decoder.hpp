#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clinev/event_model.hpp"
#include "clinev/linearizer.hpp"

namespace clinev {

enum class TokenKind {
  Content,
  Ent,
  Tendency,
  Character,
  Anatomy,
  Separator,
  Null,
  BaselineSep,
  Eos,
};

// Token inventory: a reserved end-of-sequence token, the TokenSet literals,
// and content tokens. Ids are dense 0..size()-1. The default content
// tokenization is one token per code point; multi-character content tokens
// are supported through longest-match segmentation.
class Vocabulary {
 public:
  Vocabulary(const TokenSet& tokens,
             const std::vector<std::string>& content_tokens);

  // Content alphabet = every code point occurring in texts.
  static Vocabulary for_texts(std::span<const std::string> texts,
                              const TokenSet& tokens = {});

  std::size_t size() const { return surfaces_.size(); }
  const std::string& surface(int id) const { return surfaces_[id]; }
  TokenKind kind(int id) const { return kinds_[id]; }
  int eos_id() const { return eos_id_; }
  // -1 when the surface is not a token.
  int id_of(const std::string& surface) const;
  const std::map<std::string, int>& special_ids() const {
    return special_ids_;
  }
  const TokenSet& token_set() const { return token_set_; }

  // Longest-match segmentation; special literals always win over content.
  // Throws TokenizationError when a position matches no token.
  std::vector<int> tokenize(std::string_view text) const;
  std::string detokenize(std::span<const int> ids) const;

 private:
  TokenSet token_set_;
  std::vector<std::string> surfaces_;
  std::vector<TokenKind> kinds_;
  std::map<std::string, int> index_;
  std::map<std::string, int> special_ids_;
  int eos_id_ = 0;
  std::size_t max_token_cps_ = 1;
};

// Automaton states for the special-token output grammar:
//   output := event* ; event := <ent> value <tendency> svalue
//             <character> mvalue <anatomy> mvalue ;
//   svalue := <null> | value ; mvalue := <null> | value (<unk> value)*
enum class GrammarSlot { Start, Core, Tendency, Characteristic, Anatomy,
                         Done };
enum class GrammarPhase { Empty, HasContent, AfterSeparator, AfterNull };

struct GrammarState {
  GrammarSlot slot = GrammarSlot::Start;
  GrammarPhase phase = GrammarPhase::Empty;
  std::size_t events_completed = 0;
  // Value built since the slot opened or the last separator; the copy
  // constraint extends it one token at a time.
  std::u32string value_prefix;
};

class OutputGrammar {
 public:
  explicit OutputGrammar(TokenSet tokens = {});

  GrammarState start() const { return {}; }

  // Whether the grammar admits a token of this kind in this state. Content
  // surface is ignored here; the copy constraint is applied by
  // allowed_tokens.
  bool admits(const GrammarState& state, TokenKind kind) const;
  GrammarState advance(const GrammarState& state, TokenKind kind,
                       std::u32string_view surface) const;

  const TokenSet& tokens() const { return tokens_; }

 private:
  TokenSet tokens_;
};

struct DecodeConfig {
  int beam_width = 3;
  int max_output_len = 128;
  bool copy_constraint = false;
  bool length_normalization = false;
};

// Scoring interface the constrained decoder consumes. score returns one
// finite log-score per vocabulary token. Implementations must be safe to
// call repeatedly with arbitrary prefixes from the decoding thread.
struct NextTokenScorer {
  virtual ~NextTokenScorer() = default;
  virtual std::vector<double> score(std::span<const int> prefix,
                                    const MedicalRecord& source) const = 0;
};

// Mask over vocabulary ids admissible in this state. With the copy
// constraint on, a content token is admitted only when value_prefix plus
// its surface still occurs in the source text.
std::vector<char> allowed_tokens(const GrammarState& state,
                                 const Vocabulary& vocab,
                                 const MedicalRecord& source,
                                 const DecodeConfig& config);

struct BeamResult {
  std::string text;
  double score = 0;
  bool truncated = false;  // hit max_output_len without a grammar-legal EOS
};

// Grammar-constrained beam search. Expands only tokens admitted by
// allowed_tokens, finishes hypotheses at EOS, keeps beam_width running
// hypotheses per step, and returns the best finished hypothesis (ties break
// toward the lexicographically smaller token sequence). When nothing
// finishes within max_output_len the best partial hypothesis is returned
// with truncated set.
BeamResult beam_search(const NextTokenScorer& scorer,
                       const MedicalRecord& source, const Vocabulary& vocab,
                       const DecodeConfig& config = {});

// Test double: walks a fixed target string. The next target token scores 0
// and everything else -1e9; once the target is exhausted (or the prefix
// diverges from it) EOS is preferred.
class EchoScorer : public NextTokenScorer {
 public:
  EchoScorer(const std::string& target, const Vocabulary& vocab);
  std::vector<double> score(std::span<const int> prefix,
                            const MedicalRecord& source) const override;

 private:
  std::vector<int> target_;
  std::size_t vocab_size_;
  int eos_id_;
};

// Test double: deterministic pseudo-random scores in [-5, 0]. Scores are a
// pure function of (seed, prefix), so repeated calls and different beam
// widths see one fixed scoring landscape.
class SeededRandomScorer : public NextTokenScorer {
 public:
  SeededRandomScorer(std::uint64_t seed, std::size_t vocab_size);
  std::vector<double> score(std::span<const int> prefix,
                            const MedicalRecord& source) const override;

 private:
  std::uint64_t seed_;
  std::size_t vocab_size_;
};

}  // namespace clinev
