#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morphpipe {

enum class SentStart : std::uint8_t { kUnset, kYes, kNo };

// Morphological features as a key-sorted set of key=value pairs.
class MorphFeats {
 public:
  MorphFeats() = default;

  // Parses "k1=v1|k2=v2"; "_" and "" give the empty set. Throws
  // ContractViolation on a pair without '=' or on a duplicated key.
  static MorphFeats parse(std::string_view text);

  void set(std::string key, std::string value);
  std::optional<std::string_view> get(std::string_view key) const;

  bool empty() const { return pairs_.empty(); }
  std::size_t size() const { return pairs_.size(); }
  const std::vector<std::pair<std::string, std::string>>& pairs() const {
    return pairs_;
  }

  // Canonical "k1=v1|k2=v2", or "_" for the empty set.
  std::string str() const;

  friend bool operator==(const MorphFeats&, const MorphFeats&) = default;

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;
};

// Syntactic head of a token: either the artificial root or another token of
// the same document (0-based document token index).
class Attachment {
 public:
  static Attachment root() { return Attachment(-1); }
  static Attachment to(std::size_t token) {
    return Attachment(static_cast<long>(token));
  }

  bool is_root() const { return value_ < 0; }
  std::size_t index() const { return static_cast<std::size_t>(value_); }

  friend bool operator==(const Attachment&, const Attachment&) = default;

 private:
  explicit Attachment(long value) : value_(value) {}
  long value_;
};

struct Token {
  std::size_t index = 0;
  std::string text;
  std::string trailing_ws;
  std::size_t char_start = 0;  // UTF-8 byte offsets into source_text
  std::size_t char_end = 0;
  SentStart sent_start = SentStart::kUnset;
  std::optional<std::string> upos;
  std::optional<MorphFeats> feats;
  std::optional<std::string> lemma;
  std::optional<Attachment> head;
  std::optional<std::string> deprel;
  std::optional<std::string> ent;  // BILOU tag, e.g. "U-PER"

  bool is_sent_start() const { return sent_start == SentStart::kYes; }
  // Canonical FEATS string. Unset counts as the empty bundle "_": CoNLL-U
  // writes both the same way.
  std::string feats_label() const { return feats ? feats->str() : "_"; }
};

struct AnnotatedDoc {
  std::string source_text;
  std::string leading_ws;
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }

  // leading_ws followed by every token's text and trailing whitespace.
  std::string detokenize() const;

  // Appends a token at the end of source_text, keeping offsets consistent.
  Token& append_token(std::string text, std::string trailing_ws);
};

// [start, end) over token indices.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

// [begin, end) token-index range of one sentence.
struct SentenceRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const SentenceRange&, const SentenceRange&) = default;
};

// Checks the Token and AnnotatedDoc invariants; returns an empty string when
// they hold, otherwise a description of the first violation.
std::string check_invariants(const AnnotatedDoc& doc);

// Same text, tokens and whitespace with every annotation cleared; the first
// token stays a sentence start.
AnnotatedDoc tokens_only(const AnnotatedDoc& doc);

// Builds a document from token texts joined by single spaces.
AnnotatedDoc doc_from_words(const std::vector<std::string>& words);

}  // namespace morphpipe
