#include "morphpipe/tokenizer.h"

#include <algorithm>

#include "morphpipe/errors.h"
#include "morphpipe/utf8.h"

namespace morphpipe {

namespace {

bool contains(std::u32string_view set, char32_t cp) {
  return set.find(cp) != std::u32string_view::npos;
}

// Matches `text` against an abbreviation pattern where "\d" stands for one
// or more ASCII digits.
bool match_digit_pattern(std::string_view pattern, std::string_view text) {
  if (pattern.empty()) return text.empty();
  if (pattern.starts_with("\\d")) {
    std::size_t run = 0;
    while (run < text.size() && text[run] >= '0' && text[run] <= '9') ++run;
    for (std::size_t take = run; take >= 1; --take) {
      if (match_digit_pattern(pattern.substr(2), text.substr(take))) {
        return true;
      }
    }
    return false;
  }
  return !text.empty() && text.front() == pattern.front() &&
         match_digit_pattern(pattern.substr(1), text.substr(1));
}

std::vector<std::string> split_spaces(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] != ' ') ++pos;
    if (pos > start) out.emplace_back(text.substr(start, pos - start));
  }
  return out;
}

}  // namespace

AffixPattern AffixPattern::make_literal(std::string text) {
  AffixPattern p;
  p.kind = Kind::kLiteral;
  p.literal = std::move(text);
  return p;
}

AffixPattern AffixPattern::make_class(std::u32string chars) {
  AffixPattern p;
  p.kind = Kind::kClass;
  p.chars = std::move(chars);
  return p;
}

std::size_t AffixPattern::match_prefix(std::string_view chunk) const {
  if (chunk.empty()) return 0;
  if (kind == Kind::kLiteral) {
    return chunk.starts_with(literal) ? literal.size() : 0;
  }
  const utf8::CodePoint cp = utf8::decode_at(chunk, 0);
  return contains(chars, cp.value) ? cp.length : 0;
}

std::size_t AffixPattern::match_suffix(std::string_view chunk) const {
  if (chunk.empty()) return 0;
  if (kind == Kind::kLiteral) {
    return chunk.ends_with(literal) ? literal.size() : 0;
  }
  const std::size_t len = utf8::last_length(chunk, chunk.size());
  const utf8::CodePoint cp = utf8::decode_at(chunk, chunk.size() - len);
  return contains(chars, cp.value) && cp.length == len ? len : 0;
}

void TokenizerRules::add_abbreviation(std::string_view form) {
  if (form.size() < 2 || form.back() != '.') {
    throw ContractViolation("abbreviation '" + std::string(form) +
                            "' must end in '.'");
  }
  abbreviation_order_.emplace_back(form);
  if (form.find("\\d") != std::string_view::npos) {
    abbreviation_patterns_.emplace_back(form);
  } else {
    abbreviations_.insert(utf8::lower_first(form));
  }
}

void TokenizerRules::add_exception(std::string chunk,
                                   std::vector<std::string> tokens) {
  std::string joined;
  for (const std::string& t : tokens) {
    if (t.empty()) throw ContractViolation("empty token in exception");
    joined += t;
  }
  if (joined != chunk || tokens.empty()) {
    throw ContractViolation("exception tokens for '" + chunk +
                            "' do not concatenate to the chunk");
  }
  exceptions[std::move(chunk)] = std::move(tokens);
}

bool TokenizerRules::is_abbreviation(std::string_view chunk) const {
  if (chunk.size() < 2 || chunk.back() != '.') return false;
  if (abbreviations_.count(utf8::lower_first(chunk)) > 0) return true;
  return std::any_of(
      abbreviation_patterns_.begin(), abbreviation_patterns_.end(),
      [chunk](const std::string& p) { return match_digit_pattern(p, chunk); });
}

TokenizerRules TokenizerRules::parse(std::string_view text) {
  enum class Section { kNone, kPrefix, kSuffix, kAbbrev, kException };
  TokenizerRules rules;
  Section section = Section::kNone;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    if (line == "[prefix]") { section = Section::kPrefix; continue; }
    if (line == "[suffix]") { section = Section::kSuffix; continue; }
    if (line == "[abbrev]") { section = Section::kAbbrev; continue; }
    if (line == "[exception]") { section = Section::kException; continue; }

    try {
      switch (section) {
        case Section::kNone:
          throw ParseError("rule outside of a section", line_no);
        case Section::kPrefix:
        case Section::kSuffix: {
          AffixPattern p =
              line.starts_with("class ")
                  ? AffixPattern::make_class(utf8::decode(line.substr(6)))
                  : AffixPattern::make_literal(std::string(line));
          (section == Section::kPrefix ? rules.prefixes : rules.suffixes)
              .push_back(std::move(p));
          break;
        }
        case Section::kAbbrev:
          rules.add_abbreviation(line);
          break;
        case Section::kException: {
          const std::size_t tab = line.find('\t');
          if (tab == std::string_view::npos) {
            throw ParseError("exception needs 'chunk<TAB>tokens'", line_no);
          }
          rules.add_exception(std::string(line.substr(0, tab)),
                              split_spaces(line.substr(tab + 1)));
          break;
        }
      }
    } catch (const ContractViolation& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return rules;
}

std::string TokenizerRules::str() const {
  auto affixes = [](const std::vector<AffixPattern>& patterns) {
    std::string out;
    for (const AffixPattern& p : patterns) {
      out += p.kind == AffixPattern::Kind::kClass
                 ? "class " + utf8::encode(p.chars)
                 : p.literal;
      out += '\n';
    }
    return out;
  };
  std::string out = "[prefix]\n" + affixes(prefixes);
  out += "[suffix]\n" + affixes(suffixes);
  out += "[abbrev]\n";
  for (const std::string& a : abbreviation_order_) out += a + "\n";
  out += "[exception]\n";
  std::vector<std::string> keys;
  for (const auto& [key, value] : exceptions) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  for (const std::string& key : keys) {
    out += key + "\t";
    const auto& toks = exceptions.at(key);
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (i > 0) out += ' ';
      out += toks[i];
    }
    out += '\n';
  }
  return out;
}

const TokenizerRules& default_rules() {
  static const TokenizerRules rules = TokenizerRules::parse(default_rules_text());
  return rules;
}

namespace {

std::size_t longest(const std::vector<AffixPattern>& patterns,
                    std::string_view chunk, bool prefix) {
  std::size_t best = 0;
  for (const AffixPattern& p : patterns) {
    const std::size_t len = prefix ? p.match_prefix(chunk) : p.match_suffix(chunk);
    if (len > best) best = len;
  }
  return best;
}

void split_chunk(std::string_view chunk, const TokenizerRules& rules,
                 std::vector<std::string_view>& out) {
  std::vector<std::string_view> held;
  std::string_view rest = chunk;
  auto special = [&]() {
    if (auto it = rules.exceptions.find(std::string(rest));
        it != rules.exceptions.end()) {
      std::size_t pos = 0;
      for (const std::string& piece : it->second) {
        out.push_back(rest.substr(pos, piece.size()));
        pos += piece.size();
      }
      return true;
    }
    if (rules.is_abbreviation(rest)) {
      out.push_back(rest);
      return true;
    }
    return false;
  };

  while (!rest.empty()) {
    if (special()) {
      rest = std::string_view();
      break;
    }
    bool fired = false;
    if (const std::size_t p = longest(rules.prefixes, rest, true); p > 0) {
      out.push_back(rest.substr(0, p));
      rest.remove_prefix(p);
      fired = true;
      if (rest.empty()) break;
      if (special()) {
        rest = std::string_view();
        break;
      }
    }
    if (const std::size_t s = longest(rules.suffixes, rest, false); s > 0) {
      held.push_back(rest.substr(rest.size() - s));
      rest.remove_suffix(s);
      fired = true;
    }
    if (!fired) break;
  }
  if (!rest.empty()) out.push_back(rest);
  out.insert(out.end(), held.rbegin(), held.rend());
}

}  // namespace

AnnotatedDoc tokenize(std::string_view text, const TokenizerRules& rules) {
  AnnotatedDoc doc;
  doc.source_text = std::string(text);
  std::vector<std::string_view> pieces;
  std::size_t pos = 0;

  auto skip_space = [&](std::size_t from) {
    while (from < text.size()) {
      const utf8::CodePoint cp = utf8::decode_at(text, from);
      if (!utf8::is_space(cp.value)) break;
      from += cp.length;
    }
    return from;
  };

  pos = skip_space(0);
  doc.leading_ws = std::string(text.substr(0, pos));
  while (pos < text.size()) {
    std::size_t end = pos;
    while (end < text.size()) {
      const utf8::CodePoint cp = utf8::decode_at(text, end);
      if (utf8::is_space(cp.value)) break;
      end += cp.length;
    }
    const std::size_t next = skip_space(end);
    pieces.clear();
    split_chunk(text.substr(pos, end - pos), rules, pieces);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      Token token;
      token.index = doc.tokens.size();
      token.text = std::string(pieces[i]);
      token.char_start = static_cast<std::size_t>(pieces[i].data() - text.data());
      token.char_end = token.char_start + pieces[i].size();
      if (i + 1 == pieces.size()) {
        token.trailing_ws = std::string(text.substr(end, next - end));
      }
      token.sent_start = token.index == 0 ? SentStart::kYes : SentStart::kUnset;
      doc.tokens.push_back(std::move(token));
    }
    pos = next;
  }
  return doc;
}

}  // namespace morphpipe
