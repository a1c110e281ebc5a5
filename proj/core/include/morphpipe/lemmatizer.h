#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "morphpipe/doc.h"

namespace morphpipe {

// Remove `strip_len` code points from the end, then append `append`.
struct LemmaTransform {
  std::size_t strip_len = 0;
  std::string append;

  // Throws ContractViolation when the form is shorter than strip_len.
  std::u32string apply(std::u32string_view form) const;

  friend auto operator<=>(const LemmaTransform&, const LemmaTransform&) = default;
};

// Transform turning `form` into `lemma` around their longest common prefix
// (in code points).
LemmaTransform transform_between(std::u32string_view form,
                                 std::u32string_view lemma);

struct MaskedForm {
  std::string masked;
  std::string digits;  // original leading digit run, empty if none
};

// Replaces the maximal leading ASCII digit run with as many '0's.
MaskedForm mask_digits(std::string_view form);

struct LemmaItem {
  std::string form;
  std::string upos;
  std::string lemma;
  std::uint64_t count = 1;
  std::string feats;  // canonical FEATS; only read when keying on FEATS
};

struct LemmatizerOptions {
  // Key tries on UPOS plus the FEATS bundle instead of UPOS alone.
  bool key_on_feats = false;
};

// Suffix-rule lemmatizer: one trie per tag key over reversed, digit-masked,
// lowercased forms. Every node on an item's path tallies its transform.
class Lemmatizer {
 public:
  explicit Lemmatizer(LemmatizerOptions options = {}) : options_(options) {}

  static Lemmatizer learn(const std::vector<LemmaItem>& items,
                          LemmatizerOptions options = {});
  // Tuples from gold tokens with UPOS and lemma; counts are token
  // frequencies.
  static std::vector<LemmaItem> collect_items(const std::vector<AnnotatedDoc>& docs);

  std::string lemmatize(std::string_view text, std::string_view upos,
                        bool sent_start, std::string_view feats = "_") const;
  // Fills lemma from text, upos, feats and sent_start of every token.
  void lemmatize(AnnotatedDoc& doc) const;

  // "key<TAB>reversed-suffix<TAB>strip<TAB>append<TAB>count" lines, sorted.
  // The word-boundary node is written as "\^"; '\\', TAB and newline are
  // escaped as "\\", "\t", "\n".
  std::string dump() const;
  // Throws ParseError on a malformed line.
  static Lemmatizer parse_dump(std::string_view text,
                               LemmatizerOptions options = {});

  const LemmatizerOptions& options() const { return options_; }
  std::size_t key_count() const { return tries_.size(); }
  std::size_t node_count() const;

 private:
  struct Node {
    std::map<char32_t, std::uint32_t> children;
    std::map<LemmaTransform, std::uint64_t> tallies;
  };
  using Trie = std::vector<Node>;

  std::string key_of(std::string_view upos, std::string_view feats) const;
  static void add_path(Trie& trie, std::u32string_view path,
                       const LemmaTransform& transform, std::uint64_t count);

  LemmatizerOptions options_;
  std::map<std::string, Trie, std::less<>> tries_;
};

}  // namespace morphpipe
