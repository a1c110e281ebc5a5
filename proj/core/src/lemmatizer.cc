#include "morphpipe/lemmatizer.h"

#include <algorithm>
#include <charconv>

#include "morphpipe/errors.h"
#include "morphpipe/utf8.h"

namespace morphpipe {

namespace {

// Terminates a path after the first character of the form.
constexpr char32_t kBoundary = 0;

std::u32string reversed_path(std::u32string_view form) {
  std::u32string path(form.rbegin(), form.rend());
  path.push_back(kBoundary);
  return path;
}

// Leading digit run of `lemma` masked when it equals the form's run.
std::string mask_lemma(std::string_view lemma, std::string_view digits) {
  if (digits.empty() || !lemma.starts_with(digits)) return std::string(lemma);
  return std::string(digits.size(), '0') + std::string(lemma.substr(digits.size()));
}

std::string escape(std::u32string_view path) {
  std::string out;
  for (char32_t c : path) {
    switch (c) {
      case kBoundary: out += "\\^"; break;
      case U'\\': out += "\\\\"; break;
      case U'\t': out += "\\t"; break;
      case U'\n': out += "\\n"; break;
      default: utf8::append(out, c);
    }
  }
  return out;
}

std::string escape(std::string_view text) { return escape(utf8::decode(text)); }

std::u32string unescape(std::string_view text, std::size_t line) {
  std::u32string out;
  const std::u32string in = utf8::decode(text);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] != U'\\') {
      out.push_back(in[i]);
      continue;
    }
    if (++i == in.size()) throw ParseError("dangling escape", line);
    switch (in[i]) {
      case U'^': out.push_back(kBoundary); break;
      case U'\\': out.push_back(U'\\'); break;
      case U't': out.push_back(U'\t'); break;
      case U'n': out.push_back(U'\n'); break;
      default: throw ParseError("unknown escape", line);
    }
  }
  return out;
}

std::uint64_t parse_number(std::string_view text, std::size_t line) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("bad number '" + std::string(text) + "'", line);
  }
  return value;
}

}  // namespace

std::u32string LemmaTransform::apply(std::u32string_view form) const {
  if (strip_len > form.size()) {
    throw ContractViolation("transform strips more than the form length");
  }
  std::u32string out(form.substr(0, form.size() - strip_len));
  out += utf8::decode(append);
  return out;
}

LemmaTransform transform_between(std::u32string_view form,
                                 std::u32string_view lemma) {
  std::size_t lcp = 0;
  while (lcp < form.size() && lcp < lemma.size() && form[lcp] == lemma[lcp]) ++lcp;
  return {form.size() - lcp, utf8::encode(lemma.substr(lcp))};
}

MaskedForm mask_digits(std::string_view form) {
  std::size_t run = 0;
  while (run < form.size() && form[run] >= '0' && form[run] <= '9') ++run;
  return {std::string(run, '0') + std::string(form.substr(run)),
          std::string(form.substr(0, run))};
}

std::string Lemmatizer::key_of(std::string_view upos, std::string_view feats) const {
  std::string key(upos);
  if (options_.key_on_feats) {
    key += '|';
    key += feats;
  }
  return key;
}

void Lemmatizer::add_path(Trie& trie, std::u32string_view path,
                          const LemmaTransform& transform, std::uint64_t count) {
  if (trie.empty()) trie.emplace_back();
  std::uint32_t node = 0;
  trie[node].tallies[transform] += count;
  for (char32_t c : path) {
    const auto it = trie[node].children.find(c);
    std::uint32_t next = 0;
    if (it == trie[node].children.end()) {
      next = static_cast<std::uint32_t>(trie.size());
      trie[node].children.emplace(c, next);
      trie.emplace_back();
    } else {
      next = it->second;
    }
    node = next;
    trie[node].tallies[transform] += count;
  }
}

Lemmatizer Lemmatizer::learn(const std::vector<LemmaItem>& items,
                             LemmatizerOptions options) {
  Lemmatizer out(options);
  for (const LemmaItem& item : items) {
    if (item.lemma.empty()) throw ContractViolation("empty lemma for '" + item.form + "'");
    if (item.count == 0) continue;
    const MaskedForm masked = mask_digits(item.form);
    const std::u32string form = utf8::to_lower(utf8::decode(masked.masked));
    const std::u32string lemma =
        utf8::to_lower(utf8::decode(mask_lemma(item.lemma, masked.digits)));
    Trie& trie = out.tries_[out.key_of(item.upos, item.feats)];
    add_path(trie, reversed_path(form), transform_between(form, lemma), item.count);
  }
  return out;
}

std::vector<LemmaItem> Lemmatizer::collect_items(const std::vector<AnnotatedDoc>& docs) {
  std::map<std::tuple<std::string, std::string, std::string, std::string>,
           std::uint64_t>
      counts;
  for (const AnnotatedDoc& doc : docs) {
    for (const Token& t : doc.tokens) {
      if (!t.upos || !t.lemma || t.lemma->empty()) continue;
      const std::string feats = t.feats_label();
      ++counts[{t.text, *t.upos, *t.lemma, feats}];
    }
  }
  std::vector<LemmaItem> out;
  out.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    const auto& [form, upos, lemma, feats] = key;
    out.push_back({form, upos, lemma, count, feats});
  }
  return out;
}

std::string Lemmatizer::lemmatize(std::string_view text, std::string_view upos,
                                  bool sent_start, std::string_view feats) const {
  const bool propn = upos == "PROPN";
  std::string input(text);
  if (sent_start && !propn) input = utf8::lower_first(input);
  const MaskedForm masked = mask_digits(input);
  const std::u32string original = utf8::decode(masked.masked);
  const std::u32string form = utf8::to_lower(original);

  const auto trie_it = tries_.find(key_of(upos, feats));
  const LemmaTransform* chosen = nullptr;
  if (trie_it != tries_.end() && !trie_it->second.empty()) {
    const Trie& trie = trie_it->second;
    std::vector<std::uint32_t> path{0};
    for (char32_t c : reversed_path(form)) {
      const auto it = trie[path.back()].children.find(c);
      if (it == trie[path.back()].children.end()) break;
      path.push_back(it->second);
    }
    // Deepest node first; shallower nodes only when no transform of a
    // deeper one fits the form.
    for (auto node = path.rbegin(); node != path.rend() && !chosen; ++node) {
      std::uint64_t best_count = 0;
      for (const auto& [transform, count] : trie[*node].tallies) {
        if (transform.strip_len > form.size()) continue;
        // Tallies iterate in (strip_len, append) order, so the first
        // transform with the highest count wins ties.
        if (count > best_count) {
          best_count = count;
          chosen = &transform;
        }
      }
    }
  }

  std::u32string lemma;
  if (chosen == nullptr) {
    lemma = form;
  } else {
    lemma = chosen->apply(form);
    if (propn && !original.empty() && utf8::is_upper(original.front())) {
      const std::size_t keep =
          std::min(form.size() - chosen->strip_len, lemma.size());
      std::copy_n(original.begin(), keep, lemma.begin());
    }
  }
  if (chosen == nullptr && propn && !original.empty() &&
      utf8::is_upper(original.front())) {
    lemma = original;
  }
  std::string out = utf8::encode(lemma);
  if (!masked.digits.empty()) {
    const std::string zeros(masked.digits.size(), '0');
    if (out.starts_with(zeros)) out = masked.digits + out.substr(zeros.size());
  }
  return out;
}

void Lemmatizer::lemmatize(AnnotatedDoc& doc) const {
  for (Token& t : doc.tokens) {
    const std::string feats = t.feats_label();
    t.lemma = lemmatize(t.text, t.upos ? *t.upos : "X", t.is_sent_start(), feats);
  }
}

std::string Lemmatizer::dump() const {
  std::vector<std::string> lines;
  for (const auto& [key, trie] : tries_) {
    if (trie.empty()) continue;
    // Depth-first walk carrying the reversed suffix of each node.
    std::vector<std::pair<std::uint32_t, std::u32string>> todo{{0, U""}};
    while (!todo.empty()) {
      auto [node, path] = std::move(todo.back());
      todo.pop_back();
      const std::string prefix = escape(key) + '\t' + escape(path) + '\t';
      for (const auto& [transform, count] : trie[node].tallies) {
        lines.push_back(prefix + std::to_string(transform.strip_len) + '\t' +
                        escape(transform.append) + '\t' + std::to_string(count));
      }
      for (const auto& [c, child] : trie[node].children) {
        todo.emplace_back(child, path + c);
      }
    }
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const std::string& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

Lemmatizer Lemmatizer::parse_dump(std::string_view text, LemmatizerOptions options) {
  Lemmatizer out(options);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos
                                              ? std::string_view::npos
                                              : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 5) throw ParseError("expected 5 fields", line_no);
    const std::string key = utf8::encode(unescape(fields[0], line_no));
    const std::u32string path = unescape(fields[1], line_no);
    LemmaTransform transform{
        static_cast<std::size_t>(parse_number(fields[2], line_no)),
        utf8::encode(unescape(fields[3], line_no))};
    const std::uint64_t count = parse_number(fields[4], line_no);
    if (count == 0) throw ParseError("count must be positive", line_no);
    Trie& trie = out.tries_[key];
    if (trie.empty()) trie.emplace_back();
    std::uint32_t node = 0;
    for (char32_t c : path) {
      const auto it = trie[node].children.find(c);
      if (it == trie[node].children.end()) {
        const auto next = static_cast<std::uint32_t>(trie.size());
        trie[node].children.emplace(c, next);
        trie.emplace_back();
        node = next;
      } else {
        node = it->second;
      }
    }
    if (!trie[node].tallies.emplace(transform, count).second) {
      throw ParseError("duplicate rule", line_no);
    }
  }
  return out;
}

std::size_t Lemmatizer::node_count() const {
  std::size_t n = 0;
  for (const auto& [key, trie] : tries_) n += trie.size();
  return n;
}

}  // namespace morphpipe
