#include "occamnet/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "occamnet/rng.hpp"

namespace occamnet {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_terminal_punct(char c) { return c == '.' || c == '?' || c == '!' || c == ',' || c == ';' || c == ':'; }

std::string join(const Tokens& tokens, char sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string word(text.substr(i, j - i));
    while (!word.empty() && is_terminal_punct(word.back())) word.pop_back();
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!word.empty()) out.push_back(std::move(word));
    i = j;
  }
  return out;
}

// ---- Vocabulary ----

Vocabulary::Vocabulary() {
  push(std::string(kUnkToken));
  push(std::string(kEosToken));
  push(std::string(kPadToken));
}

void Vocabulary::push(const std::string& token) {
  ids_.emplace(token, tokens_.size());
  tokens_.push_back(token);
}

Vocabulary Vocabulary::from_tokens(const Tokens& id_to_token, std::size_t min_count) {
  if (id_to_token.size() < kFirstRegular || id_to_token[kUnk] != kUnkToken || id_to_token[kEos] != kEosToken ||
      id_to_token[kPad] != kPadToken) {
    throw std::invalid_argument("Vocabulary::from_tokens: special tokens missing or misplaced");
  }
  Vocabulary v;
  v.min_count_ = min_count;
  for (std::size_t i = kFirstRegular; i < id_to_token.size(); ++i) {
    if (v.ids_.contains(id_to_token[i])) throw std::invalid_argument("Vocabulary: duplicate token " + id_to_token[i]);
    v.push(id_to_token[i]);
  }
  return v;
}

TokenId Vocabulary::id(const std::string& token) const {
  const auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw std::out_of_range("Vocabulary: id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

TokenIds Vocabulary::encode(const Tokens& tokens) const {
  TokenIds ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

Tokens Vocabulary::decode(std::span<const TokenId> ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(token(id));
  return out;
}

Vocabulary build_vocab(std::span<const Tokens> corpora, std::size_t min_count) {
  if (min_count < 1) throw std::invalid_argument("build_vocab: min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& stream : corpora)
    for (const auto& t : stream) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, n] : counts) {
    const bool special = token == Vocabulary::kUnkToken || token == Vocabulary::kEosToken ||
                         token == Vocabulary::kPadToken;
    if (n >= min_count && !special) kept.emplace_back(token, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  v.min_count_ = min_count;
  for (const auto& entry : kept) v.push(entry.first);
  return v;
}

// ---- bAbI ----

std::vector<TextStory> parse_babi(std::string_view text) {
  std::vector<TextStory> stories;
  std::vector<Tokens> facts;
  std::map<long, std::size_t> fact_index;  // line id -> fact index in current block
  std::set<long> question_ids;
  long previous_id = 0;

  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    const std::string_view line = lines[n];
    if (is_blank(line)) continue;

    const std::size_t space = line.find(' ');
    long id = 0;
    if (space == std::string_view::npos || !parse_number(line.substr(0, space), id) || id < 1) {
      throw ParseError(line_no, "expected '<positive integer> <text>'");
    }
    if (id <= previous_id) {
      facts.clear();
      fact_index.clear();
      question_ids.clear();
    }
    previous_id = id;

    const auto fields = split_tabs(line.substr(space + 1));
    if (fields.size() == 1) {
      Tokens tokens = tokenize(fields[0]);
      if (tokens.empty()) throw ParseError(line_no, "empty fact");
      fact_index[id] = facts.size();
      facts.push_back(std::move(tokens));
      continue;
    }
    if (fields.size() != 3) throw ParseError(line_no, "question lines need question<TAB>answer<TAB>supporting ids");

    TextStory story;
    story.facts = facts;
    story.question = tokenize(fields[0]);
    if (story.question.empty()) throw ParseError(line_no, "empty question");
    std::string answer(fields[1]);
    std::replace(answer.begin(), answer.end(), ',', ' ');
    story.answer = tokenize(answer);
    if (story.answer.empty()) throw ParseError(line_no, "empty answer");
    std::istringstream ids{std::string(fields[2])};
    std::string word;
    while (ids >> word) {
      long ref = 0;
      if (!parse_number(word, ref)) throw ParseError(line_no, "bad supporting id '" + word + "'");
      if (question_ids.contains(ref)) {
        throw ParseError(line_no, "supporting id " + word + " refers to a question line");
      }
      const auto it = fact_index.find(ref);
      if (it == fact_index.end()) throw ParseError(line_no, "supporting id " + word + " out of range");
      story.supporting.insert(it->second);
    }
    question_ids.insert(id);
    stories.push_back(std::move(story));
  }
  return stories;
}

std::string serialize_babi(std::span<const TextStory> stories) {
  std::string out;
  for (const auto& story : stories) {
    std::size_t id = 1;
    for (const auto& fact : story.facts) out += std::to_string(id++) + " " + join(fact, ' ') + "\n";
    out += std::to_string(id) + " " + join(story.question, ' ') + "\t" + join(story.answer, ',') + "\t";
    bool first = true;
    for (std::size_t s : story.supporting) {
      if (!first) out += ' ';
      out += std::to_string(s + 1);
      first = false;
    }
    out += "\n";
  }
  return out;
}

Story encode(const TextStory& story, const Vocabulary& vocab) {
  Story s;
  for (const auto& fact : story.facts) s.facts.push_back(vocab.encode(fact));
  s.question = vocab.encode(story.question);
  s.answer = vocab.encode(story.answer);
  s.supporting = story.supporting;
  return s;
}

Tokens story_tokens(const TextStory& story) {
  Tokens all;
  for (const auto& f : story.facts) all.insert(all.end(), f.begin(), f.end());
  all.insert(all.end(), story.question.begin(), story.question.end());
  all.insert(all.end(), story.answer.begin(), story.answer.end());
  return all;
}

// ---- TSV ----

std::vector<LabeledText> parse_labeled_sequences(std::string_view text) {
  std::vector<LabeledText> out;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (is_blank(lines[n])) continue;
    const auto fields = split_tabs(lines[n]);
    if (fields.size() != 2) throw ParseError(n + 1, "expected label<TAB>tokens");
    std::size_t label = 0;
    if (!parse_number(fields[0], label) || label >= kSentimentClasses) {
      throw ParseError(n + 1, "label must be an integer in 0..4");
    }
    LabeledText rec{tokenize(fields[1]), label};
    if (rec.tokens.empty()) throw ParseError(n + 1, "empty token sequence");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<PairText> parse_paraphrase_pairs(std::string_view text) {
  std::vector<PairText> out;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (is_blank(lines[n])) continue;
    const auto fields = split_tabs(lines[n]);
    if (fields.size() != 3) throw ParseError(n + 1, "expected score<TAB>sentence_a<TAB>sentence_b");
    double score = 0.0;
    if (!parse_number(fields[0], score) || !(score >= 1.0 && score <= 5.0)) {
      throw ParseError(n + 1, "score must be a number in [1, 5]");
    }
    PairText rec{tokenize(fields[1]), tokenize(fields[2]), (score - 1.0) / 4.0};
    if (rec.a.empty() || rec.b.empty()) throw ParseError(n + 1, "empty sentence");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<PairText> parse_paraphrase_augmentation(std::string_view text) {
  std::vector<PairText> out;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (is_blank(lines[n])) continue;
    const auto fields = split_tabs(lines[n]);
    if (fields.size() != 2) throw ParseError(n + 1, "expected sentence_a<TAB>sentence_b");
    PairText rec{tokenize(fields[0]), tokenize(fields[1]), 1.0};
    if (rec.a.empty() || rec.b.empty()) throw ParseError(n + 1, "empty sentence");
    out.push_back(std::move(rec));
  }
  return out;
}

std::string serialize_labeled_sequences(std::span<const LabeledText> records) {
  std::string out;
  for (const auto& r : records) out += std::to_string(r.label) + "\t" + join(r.tokens, ' ') + "\n";
  return out;
}

LabeledSequence encode(const LabeledText& record, const Vocabulary& vocab) {
  return {vocab.encode(record.tokens), record.label};
}

ParaphrasePair encode(const PairText& record, const Vocabulary& vocab) {
  return {vocab.encode(record.a), vocab.encode(record.b), record.target};
}

// ---- synthetic ----

std::vector<LabeledSequence> gen_needle_task(std::uint64_t seed, std::size_t n_examples, std::size_t seq_len,
                                             std::size_t vocab_size, std::size_t classes) {
  if (seq_len < 1) throw std::invalid_argument("gen_needle_task: seq_len must be >= 1");
  if (classes < 1 || vocab_size <= classes) {
    throw std::invalid_argument("gen_needle_task: vocab_size must exceed the number of classes");
  }
  RngStream rng(seed);
  const std::size_t distractors = vocab_size - classes;
  std::vector<LabeledSequence> out;
  out.reserve(n_examples);
  for (std::size_t n = 0; n < n_examples; ++n) {
    LabeledSequence seq;
    seq.label = static_cast<std::size_t>(rng.below(classes));
    const std::size_t position = static_cast<std::size_t>(rng.below(seq_len));
    seq.tokens.resize(seq_len);
    for (std::size_t t = 0; t < seq_len; ++t) {
      seq.tokens[t] = t == position ? Vocabulary::kFirstRegular + seq.label
                                    : Vocabulary::kFirstRegular + classes + static_cast<std::size_t>(rng.below(distractors));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

Vocabulary needle_vocabulary(std::size_t vocab_size, std::size_t classes) {
  if (classes < 1 || vocab_size <= classes) {
    throw std::invalid_argument("needle_vocabulary: vocab_size must exceed the number of classes");
  }
  Tokens tokens{std::string(Vocabulary::kUnkToken), std::string(Vocabulary::kEosToken),
                std::string(Vocabulary::kPadToken)};
  for (std::size_t c = 0; c < classes; ++c) tokens.push_back("needle" + std::to_string(c));
  for (std::size_t w = classes; w < vocab_size; ++w) tokens.push_back("w" + std::to_string(w));
  return Vocabulary::from_tokens(tokens);
}

std::string gen_babi_single_fact(std::uint64_t seed, std::size_t n_blocks) {
  static const char* const kActors[] = {"Mary", "John", "Sandra", "Daniel"};
  static const char* const kPlaces[] = {"bathroom", "hallway", "garden", "office", "kitchen", "bedroom"};
  static const char* const kVerbs[] = {"moved to", "went to", "journeyed to", "travelled to", "went back to"};
  constexpr std::size_t kActorCount = std::size(kActors);
  constexpr std::size_t kPlaceCount = std::size(kPlaces);
  constexpr std::size_t kVerbCount = std::size(kVerbs);

  RngStream rng(seed);
  std::ostringstream out;
  for (std::size_t block = 0; block < n_blocks; ++block) {
    long where[kActorCount];
    long support[kActorCount];
    std::fill(std::begin(where), std::end(where), -1);
    std::fill(std::begin(support), std::end(support), -1);
    int line = 1;
    for (int q = 0; q < 5; ++q) {
      for (int f = 0; f < 2; ++f) {
        const auto actor = rng.below(kActorCount);
        const auto place = rng.below(kPlaceCount);
        const auto verb = rng.below(kVerbCount);
        where[actor] = static_cast<long>(place);
        support[actor] = line;
        out << line++ << ' ' << kActors[actor] << ' ' << kVerbs[verb] << " the " << kPlaces[place] << ".\n";
      }
      std::vector<std::size_t> known;
      for (std::size_t a = 0; a < kActorCount; ++a)
        if (where[a] >= 0) known.push_back(a);
      const std::size_t asked = known[rng.below(known.size())];
      out << line++ << " Where is " << kActors[asked] << "? \t" << kPlaces[where[asked]] << '\t' << support[asked]
          << '\n';
    }
  }
  return out.str();
}

}  // namespace occamnet
