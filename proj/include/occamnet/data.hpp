#pragma once

// Corpus formats, vocabulary, and synthetic task generators.
//
// bAbI layout: one line per entry, "<id> <sentence>" for facts and
// "<id> <question>\t<answer>\t<supporting ids>" for questions. The id restarts
// (decreases) at each new story. Supporting ids are line ids; they are
// remapped to fact indexes because question lines interleave with facts.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace occamnet {

using TokenId = std::size_t;
using TokenIds = std::vector<TokenId>;
using Tokens = std::vector<std::string>;

/// Parse failure carrying the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Whitespace split, lowercase, strip terminal punctuation.
Tokens tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr TokenId kUnk = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kPad = 2;
  static constexpr TokenId kFirstRegular = 3;
  static constexpr std::string_view kUnkToken = "<UNK>";
  static constexpr std::string_view kEosToken = "<EOS>";
  static constexpr std::string_view kPadToken = "<PAD>";

  Vocabulary();
  /// Rebuilds a vocabulary from its id-ordered token list (specials first).
  static Vocabulary from_tokens(const Tokens& id_to_token, std::size_t min_count = 1);

  std::size_t size() const { return tokens_.size(); }
  std::size_t min_count() const { return min_count_; }
  /// <UNK> for unknown tokens.
  TokenId id(const std::string& token) const;
  bool contains(const std::string& token) const { return ids_.contains(token); }
  const std::string& token(TokenId id) const;
  const Tokens& tokens() const { return tokens_; }
  TokenIds encode(const Tokens& tokens) const;
  Tokens decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  friend Vocabulary build_vocab(std::span<const Tokens> corpora, std::size_t min_count);
  void push(const std::string& token);

  std::map<std::string, TokenId> ids_;
  Tokens tokens_;
  std::size_t min_count_ = 1;
};

/// Keeps tokens seen at least min_count times. Ids ordered by descending
/// frequency, ties broken lexicographically.
Vocabulary build_vocab(std::span<const Tokens> corpora, std::size_t min_count);

// ---- bAbI ----

struct TextStory {
  std::vector<Tokens> facts;
  Tokens question;
  Tokens answer;
  std::set<std::size_t> supporting;

  bool operator==(const TextStory&) const = default;
};

struct Story {
  std::vector<TokenIds> facts;
  TokenIds question;
  TokenIds answer;
  std::set<std::size_t> supporting;
};

std::vector<TextStory> parse_babi(std::string_view text);
/// Each story becomes its own block; parse_babi(serialize_babi(s)) == s.
std::string serialize_babi(std::span<const TextStory> stories);
Story encode(const TextStory& story, const Vocabulary& vocab);
/// Every token of facts, question and answer, for vocabulary building.
Tokens story_tokens(const TextStory& story);

// ---- labeled sequences and paraphrase pairs (TSV) ----

inline constexpr std::size_t kSentimentClasses = 5;

struct LabeledText {
  Tokens tokens;
  std::size_t label = 0;
};

struct LabeledSequence {
  TokenIds tokens;
  std::size_t label = 0;
};

struct PairText {
  Tokens a;
  Tokens b;
  double target = 0.0;
};

struct ParaphrasePair {
  TokenIds a;
  TokenIds b;
  double target = 0.0;
};

/// "label<TAB>token token ..." with label in 0..4.
std::vector<LabeledText> parse_labeled_sequences(std::string_view text);
/// "score<TAB>sentence_a<TAB>sentence_b" with score in [1, 5]; target = (score - 1) / 4.
std::vector<PairText> parse_paraphrase_pairs(std::string_view text);
/// Extra pairs known to be paraphrases: "sentence_a<TAB>sentence_b", target 1.
std::vector<PairText> parse_paraphrase_augmentation(std::string_view text);
std::string serialize_labeled_sequences(std::span<const LabeledText> records);

LabeledSequence encode(const LabeledText& record, const Vocabulary& vocab);
ParaphrasePair encode(const PairText& record, const Vocabulary& vocab);

// ---- synthetic tasks ----

/// One needle token per class; every sequence holds exactly one needle at a
/// uniform position among uniformly drawn distractors, and its label is the
/// needle's class. Ids index needle_vocabulary(vocab_size, classes).
std::vector<LabeledSequence> gen_needle_task(std::uint64_t seed, std::size_t n_examples, std::size_t seq_len,
                                             std::size_t vocab_size, std::size_t classes = kSentimentClasses);
/// Specials, then "needle0".."needle{C-1}", then distractors "w{C}".."w{V-1}".
Vocabulary needle_vocabulary(std::size_t vocab_size, std::size_t classes = kSentimentClasses);
inline bool is_needle(TokenId id, std::size_t classes = kSentimentClasses) {
  return id >= Vocabulary::kFirstRegular && id < Vocabulary::kFirstRegular + classes;
}

/// Single-supporting-fact stories in bAbI layout: blocks of five
/// (fact, fact, "where is X?") triples; the answer is X's latest location and
/// the supporting line is the fact that put X there.
std::string gen_babi_single_fact(std::uint64_t seed, std::size_t n_blocks);

}  // namespace occamnet
