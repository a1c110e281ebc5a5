#include "morphpipe/entity_tags.h"

#include "morphpipe/errors.h"

namespace morphpipe {

std::optional<EntityTag> EntityTag::parse(std::string_view text) {
  if (text == "O") return EntityTag::outside();
  if (text.size() < 3 || text[1] != '-') return std::nullopt;
  EntityTag tag;
  switch (text[0]) {
    case 'B': tag.prefix = TagPrefix::kBegin; break;
    case 'I': tag.prefix = TagPrefix::kInside; break;
    case 'L':
    case 'E': tag.prefix = TagPrefix::kLast; break;
    case 'U':
    case 'S': tag.prefix = TagPrefix::kUnit; break;
    default: return std::nullopt;
  }
  tag.label = std::string(text.substr(2));
  return tag;
}

std::string EntityTag::str() const {
  switch (prefix) {
    case TagPrefix::kOutside: return "O";
    case TagPrefix::kBegin: return "B-" + label;
    case TagPrefix::kInside: return "I-" + label;
    case TagPrefix::kLast: return "L-" + label;
    case TagPrefix::kUnit: return "U-" + label;
  }
  return "O";
}

std::vector<EntityTag> spans_to_bilou(const std::vector<EntitySpan>& spans,
                                      std::size_t n) {
  std::vector<EntityTag> tags(n);
  for (const EntitySpan& span : spans) {
    if (span.start >= span.end || span.end > n) {
      throw ContractViolation("entity span out of range");
    }
    if (span.end - span.start == 1) {
      tags[span.start] = {TagPrefix::kUnit, span.label};
      continue;
    }
    tags[span.start] = {TagPrefix::kBegin, span.label};
    for (std::size_t i = span.start + 1; i + 1 < span.end; ++i) {
      tags[i] = {TagPrefix::kInside, span.label};
    }
    tags[span.end - 1] = {TagPrefix::kLast, span.label};
  }
  return tags;
}

std::vector<EntitySpan> bilou_to_spans(const std::vector<EntityTag>& tags) {
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  auto close_before = [&](std::size_t i) {
    if (open) {
      open->end = i;
      spans.push_back(std::move(*open));
      open.reset();
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const EntityTag& tag = tags[i];
    const bool continues = open && open->label == tag.label;
    switch (tag.prefix) {
      case TagPrefix::kOutside:
        close_before(i);
        break;
      case TagPrefix::kBegin:
        close_before(i);
        open = EntitySpan{i, i, tag.label};
        break;
      case TagPrefix::kInside:
        if (!continues) {
          close_before(i);
          open = EntitySpan{i, i, tag.label};
        }
        break;
      case TagPrefix::kLast:
        if (!continues) {
          close_before(i);
          open = EntitySpan{i, i, tag.label};
        }
        close_before(i + 1);
        break;
      case TagPrefix::kUnit:
        close_before(i);
        spans.push_back({i, i + 1, tag.label});
        break;
    }
  }
  close_before(tags.size());
  return spans;
}

bool bilou_transition_allowed(const std::optional<EntityTag>& prev,
                              const EntityTag& next) {
  const bool inside = prev && (prev->prefix == TagPrefix::kBegin ||
                               prev->prefix == TagPrefix::kInside);
  if (inside) {
    return (next.prefix == TagPrefix::kInside ||
            next.prefix == TagPrefix::kLast) &&
           next.label == prev->label;
  }
  return next.prefix == TagPrefix::kOutside ||
         next.prefix == TagPrefix::kBegin || next.prefix == TagPrefix::kUnit;
}

bool is_valid_bilou(const std::vector<EntityTag>& tags) {
  std::optional<EntityTag> prev;
  for (const EntityTag& tag : tags) {
    if (!bilou_transition_allowed(prev, tag)) return false;
    prev = tag;
  }
  return !prev || prev->prefix == TagPrefix::kOutside ||
         prev->prefix == TagPrefix::kLast || prev->prefix == TagPrefix::kUnit;
}

std::vector<NerSentence> read_ner_tsv(std::string_view text) {
  std::vector<NerSentence> out;
  NerSentence current;
  std::vector<EntityTag> tags;
  auto flush = [&] {
    if (current.tokens.empty()) return;
    current.spans = bilou_to_spans(tags);
    out.push_back(std::move(current));
    current = NerSentence{};
    tags.clear();
  };
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw ParseError("expected 'token<TAB>tag'", line_no);
    }
    const auto tag = EntityTag::parse(line.substr(tab + 1));
    if (!tag) {
      throw ParseError(
          "unknown tag '" + std::string(line.substr(tab + 1)) + "'", line_no);
    }
    current.tokens.emplace_back(line.substr(0, tab));
    tags.push_back(*tag);
  }
  flush();
  return out;
}

std::string write_ner_tsv(const std::vector<NerSentence>& sentences) {
  std::string out;
  for (const NerSentence& s : sentences) {
    const auto tags = spans_to_bilou(s.spans, s.tokens.size());
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i];
      out += '\t';
      out += tags[i].str();
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

NerSentence ner_sentence_from_doc(const AnnotatedDoc& doc) {
  NerSentence s;
  std::vector<EntityTag> tags;
  for (const Token& t : doc.tokens) {
    s.tokens.push_back(t.text);
    std::optional<EntityTag> tag;
    if (t.ent) tag = EntityTag::parse(*t.ent);
    tags.push_back(tag.value_or(EntityTag::outside()));
  }
  s.spans = bilou_to_spans(tags);
  return s;
}

AnnotatedDoc doc_from_ner_sentence(const NerSentence& sentence) {
  AnnotatedDoc doc = doc_from_words(sentence.tokens);
  const auto tags = spans_to_bilou(sentence.spans, sentence.tokens.size());
  for (std::size_t i = 0; i < tags.size(); ++i) doc.tokens[i].ent = tags[i].str();
  return doc;
}

}  // namespace morphpipe
