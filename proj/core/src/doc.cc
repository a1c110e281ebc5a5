#include "morphpipe/doc.h"

#include <algorithm>

#include "morphpipe/errors.h"

namespace morphpipe {

MorphFeats MorphFeats::parse(std::string_view text) {
  MorphFeats feats;
  if (text.empty() || text == "_") return feats;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t bar = text.find('|', start);
    if (bar == std::string_view::npos) bar = text.size();
    const std::string_view item = text.substr(start, bar - start);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ContractViolation("malformed feature '" + std::string(item) + "'");
    }
    const std::string key(item.substr(0, eq));
    if (feats.get(key)) {
      throw ContractViolation("duplicated feature key '" + key + "'");
    }
    feats.set(key, std::string(item.substr(eq + 1)));
    start = bar + 1;
  }
  return feats;
}

void MorphFeats::set(std::string key, std::string value) {
  auto it = std::lower_bound(
      pairs_.begin(), pairs_.end(), key,
      [](const auto& pair, const std::string& k) { return pair.first < k; });
  if (it != pairs_.end() && it->first == key) {
    it->second = std::move(value);
  } else {
    pairs_.insert(it, {std::move(key), std::move(value)});
  }
}

std::optional<std::string_view> MorphFeats::get(std::string_view key) const {
  auto it = std::lower_bound(
      pairs_.begin(), pairs_.end(), key,
      [](const auto& pair, std::string_view k) { return pair.first < k; });
  if (it == pairs_.end() || it->first != key) return std::nullopt;
  return it->second;
}

std::string MorphFeats::str() const {
  if (pairs_.empty()) return "_";
  std::string out;
  for (const auto& [key, value] : pairs_) {
    if (!out.empty()) out.push_back('|');
    out += key;
    out.push_back('=');
    out += value;
  }
  return out;
}

std::string AnnotatedDoc::detokenize() const {
  std::string out = leading_ws;
  for (const Token& token : tokens) {
    out += token.text;
    out += token.trailing_ws;
  }
  return out;
}

Token& AnnotatedDoc::append_token(std::string text, std::string trailing_ws) {
  Token token;
  token.index = tokens.size();
  token.char_start = leading_ws.size();
  if (!tokens.empty()) {
    token.char_start =
        tokens.back().char_end + tokens.back().trailing_ws.size();
  }
  token.char_end = token.char_start + text.size();
  source_text.resize(token.char_start);
  source_text += text;
  source_text += trailing_ws;
  token.text = std::move(text);
  token.trailing_ws = std::move(trailing_ws);
  if (tokens.empty()) token.sent_start = SentStart::kYes;
  tokens.push_back(std::move(token));
  return tokens.back();
}

std::string check_invariants(const AnnotatedDoc& doc) {
  std::size_t cursor = doc.leading_ws.size();
  if (doc.source_text.compare(0, cursor, doc.leading_ws) != 0) {
    return "leading whitespace does not prefix source_text";
  }
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    const std::string where = "token " + std::to_string(i) + ": ";
    if (t.index != i) return where + "index out of order";
    if (t.text.empty()) return where + "empty text";
    if (t.char_start != cursor || t.char_end != t.char_start + t.text.size()) {
      return where + "offsets disagree with the token sequence";
    }
    if (doc.source_text.compare(t.char_start, t.text.size(), t.text) != 0) {
      return where + "text differs from the source slice";
    }
    cursor = t.char_end;
    if (doc.source_text.compare(cursor, t.trailing_ws.size(), t.trailing_ws) !=
        0) {
      return where + "trailing whitespace differs from the source";
    }
    cursor += t.trailing_ws.size();
    if (t.head.has_value() != t.deprel.has_value()) {
      return where + "head and deprel must be set together";
    }
    if (t.head && !t.head->is_root()) {
      if (t.head->index() == i) return where + "token is its own head";
      if (t.head->index() >= doc.tokens.size()) return where + "head out of range";
    }
  }
  if (cursor != doc.source_text.size()) {
    return "tokens do not cover source_text";
  }
  if (!doc.tokens.empty() && !doc.tokens.front().is_sent_start()) {
    return "first token is not a sentence start";
  }
  return std::string();
}

AnnotatedDoc tokens_only(const AnnotatedDoc& doc) {
  AnnotatedDoc out;
  out.source_text = doc.source_text;
  out.leading_ws = doc.leading_ws;
  out.tokens.reserve(doc.size());
  for (const Token& src : doc.tokens) {
    Token& t = out.tokens.emplace_back();
    t.index = src.index;
    t.text = src.text;
    t.trailing_ws = src.trailing_ws;
    t.char_start = src.char_start;
    t.char_end = src.char_end;
  }
  if (!out.empty()) out.tokens[0].sent_start = SentStart::kYes;
  return out;
}

AnnotatedDoc doc_from_words(const std::vector<std::string>& words) {
  AnnotatedDoc doc;
  for (std::size_t i = 0; i < words.size(); ++i) {
    Token& t = doc.append_token(words[i], i + 1 < words.size() ? " " : "");
    t.sent_start = i == 0 ? SentStart::kYes : SentStart::kNo;
  }
  return doc;
}

}  // namespace morphpipe
