#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "morphpipe/doc.h"

namespace morphpipe {

// A prefix or suffix rule: either a literal string or a set of single
// characters.
struct AffixPattern {
  enum class Kind { kLiteral, kClass };

  Kind kind = Kind::kLiteral;
  std::string literal;
  std::u32string chars;

  static AffixPattern make_literal(std::string text);
  static AffixPattern make_class(std::u32string chars);

  // Byte length of the match at the start (or end) of `chunk`, 0 for none.
  std::size_t match_prefix(std::string_view chunk) const;
  std::size_t match_suffix(std::string_view chunk) const;

  friend bool operator==(const AffixPattern&, const AffixPattern&) = default;
};

class TokenizerRules {
 public:
  std::vector<AffixPattern> prefixes;
  std::vector<AffixPattern> suffixes;
  // Exact chunk -> fixed split; values concatenate back to their key.
  std::unordered_map<std::string, std::vector<std::string>> exceptions;

  // Parses a rule file with "[prefix]", "[suffix]", "[abbrev]" and
  // "[exception]" sections. Lines starting with '#' are comments. Affix
  // lines are literals, or "class <chars>" for a character set. Abbreviation
  // entries must end in '.', and may use "\d" for a run of ASCII digits.
  // Exception lines are "chunk<TAB>tok1 tok2 ...". Throws ParseError.
  static TokenizerRules parse(std::string_view text);

  // Rule-file serialization accepted by parse().
  std::string str() const;

  // Adds a period-terminated abbreviation; throws ContractViolation
  // otherwise.
  void add_abbreviation(std::string_view form);
  void add_exception(std::string chunk, std::vector<std::string> tokens);

  // Case-insensitive on the first letter only.
  bool is_abbreviation(std::string_view chunk) const;

  std::size_t abbreviation_count() const {
    return abbreviations_.size() + abbreviation_patterns_.size();
  }
  const std::vector<std::string>& abbreviation_entries() const {
    return abbreviation_order_;
  }

 private:
  std::unordered_set<std::string> abbreviations_;  // first letter lowered
  std::vector<std::string> abbreviation_patterns_;  // contain "\d"
  std::vector<std::string> abbreviation_order_;     // as listed
};

// Shipped Hungarian rules (compiled in from data/hu.rules).
const TokenizerRules& default_rules();
std::string_view default_rules_text();

// Whitespace split, then per chunk: exception or abbreviation match ends the
// chunk; otherwise the longest prefix is emitted, the longest suffix is held
// for emission in reverse order, and the loop repeats until no rule fires.
// Ties between equally long patterns go to the earlier rule.
AnnotatedDoc tokenize(std::string_view text, const TokenizerRules& rules);

}  // namespace morphpipe
