#include "morphpipe/conllu.h"

#include <charconv>
#include <optional>

#include "morphpipe/errors.h"

namespace morphpipe {

namespace {

constexpr std::size_t kColumns = 10;

struct Row {
  std::size_t line = 0;
  std::vector<std::string_view> cols;
};

struct PendingSentence {
  std::optional<std::string> text;
  std::vector<Row> rows;
};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<std::size_t> parse_index(std::string_view text) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

std::string unescape_spaces(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      switch (text[++i]) {
        case 's': out.push_back(' '); break;
        case 't': out.push_back('\t'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 'p': out.push_back('|'); break;
        default: out.push_back(text[i]);
      }
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::string escape_spaces(std::string_view ws) {
  std::string out;
  for (char c : ws) {
    switch (c) {
      case ' ': out += "\\s"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '|': out += "\\p"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Misc {
  std::optional<std::string> spacing;
  std::optional<std::string> ner;
};

Misc parse_misc(std::string_view misc) {
  Misc out;
  if (misc == "_") return out;
  for (std::string_view item : split(misc, '|')) {
    if (item == "SpaceAfter=No") {
      out.spacing = std::string();
    } else if (item.starts_with("SpacesAfter=")) {
      out.spacing = unescape_spaces(item.substr(12));
    } else if (item.starts_with("NER=")) {
      out.ner = std::string(item.substr(4));
    }
  }
  return out;
}

std::optional<std::string> field(std::string_view col) {
  if (col == "_") return std::nullopt;
  return std::string(col);
}

// Whitespace between consecutive forms according to the "# text" comment;
// empty optional when the forms do not line up with the text.
std::optional<std::vector<std::string>> spacing_from_text(
    std::string_view text, const std::vector<Row>& rows) {
  std::vector<std::string> gaps;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string_view form = rows[i].cols[1];
    if (text.compare(pos, form.size(), form) != 0) return std::nullopt;
    pos += form.size();
    if (i + 1 == rows.size()) break;
    const std::size_t next = pos;
    std::size_t end = next;
    while (end < text.size() && (text[end] == ' ' || text[end] == '\t')) ++end;
    gaps.emplace_back(text.substr(next, end - next));
    pos = end;
  }
  return gaps;
}

void flush_sentence(PendingSentence& sentence, AnnotatedDoc& doc) {
  if (sentence.rows.empty()) {
    sentence = PendingSentence{};
    return;
  }
  const std::size_t offset = doc.tokens.size();
  const std::size_t n = sentence.rows.size();
  std::optional<std::vector<std::string>> gaps;
  if (sentence.text) gaps = spacing_from_text(*sentence.text, sentence.rows);

  for (std::size_t i = 0; i < n; ++i) {
    const Row& row = sentence.rows[i];
    const auto& c = row.cols;
    const Misc misc = parse_misc(c[9]);
    std::string ws = " ";
    if (misc.spacing) {
      ws = *misc.spacing;
    } else if (gaps && i + 1 < n) {
      ws = (*gaps)[i];
    }
    Token& token = doc.append_token(std::string(c[1]), ws);
    token.sent_start = i == 0 ? SentStart::kYes : SentStart::kNo;
    token.lemma = field(c[2]);
    token.upos = field(c[3]);
    if (c[5] != "_") {
      try {
        token.feats = MorphFeats::parse(c[5]);
      } catch (const ContractViolation& e) {
        throw ParseError(e.what(), row.line);
      }
    }
    const bool has_head = c[6] != "_";
    const bool has_rel = c[7] != "_";
    if (has_head != has_rel) {
      throw ParseError("HEAD and DEPREL must both be set or both be '_'",
                       row.line);
    }
    if (has_head) {
      const auto head = parse_index(c[6]);
      if (!head || *head > n) {
        throw ParseError("HEAD '" + std::string(c[6]) + "' out of range",
                         row.line);
      }
      if (*head == i + 1) throw ParseError("token is its own head", row.line);
      token.head = *head == 0 ? Attachment::root()
                              : Attachment::to(offset + *head - 1);
      token.deprel = std::string(c[7]);
    }
    token.ent = misc.ner;
  }
  sentence = PendingSentence{};
}

}  // namespace

std::vector<AnnotatedDoc> read_conllu(std::string_view text) {
  std::vector<AnnotatedDoc> docs;
  AnnotatedDoc doc;
  PendingSentence sentence;

  auto flush_doc = [&] {
    flush_sentence(sentence, doc);
    if (!doc.tokens.empty()) docs.push_back(std::move(doc));
    doc = AnnotatedDoc{};
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
      flush_sentence(sentence, doc);
      continue;
    }
    if (line.front() == '#') {
      if (line.starts_with("# newdoc")) {
        flush_doc();
      } else if (line.starts_with("# text = ")) {
        sentence.text = std::string(line.substr(9));
      }
      continue;
    }
    Row row{line_no, split(line, '\t')};
    if (row.cols.size() != kColumns) {
      throw ParseError("expected 10 tab-separated columns, found " +
                           std::to_string(row.cols.size()),
                       line_no);
    }
    const std::string_view id = row.cols[0];
    if (id.find('-') != std::string_view::npos) {
      throw UnsupportedConstruct(
          "multiword token range '" + std::string(id) + "' is not supported",
          line_no);
    }
    if (id.find('.') != std::string_view::npos) {
      throw UnsupportedConstruct(
          "empty node '" + std::string(id) + "' is not supported", line_no);
    }
    const auto index = parse_index(id);
    if (!index || *index != sentence.rows.size() + 1) {
      throw ParseError("unexpected token id '" + std::string(id) + "'",
                       line_no);
    }
    if (row.cols[1].empty()) throw ParseError("empty FORM", line_no);
    sentence.rows.push_back(std::move(row));
  }
  flush_doc();
  return docs;
}

std::vector<SentenceRange> sentence_ranges(const AnnotatedDoc& doc) {
  std::vector<SentenceRange> out;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (i == 0 || doc.tokens[i].is_sent_start()) {
      if (!out.empty()) out.back().end = i;
      out.push_back({i, doc.tokens.size()});
    }
  }
  return out;
}

std::string write_conllu(const std::vector<AnnotatedDoc>& docs) {
  std::string out;
  std::size_t sent_id = 0;
  for (const AnnotatedDoc& doc : docs) {
    if (docs.size() > 1) out += "# newdoc\n";
    for (const SentenceRange& s : sentence_ranges(doc)) {
      std::string text;
      for (std::size_t i = s.begin; i < s.end; ++i) {
        text += doc.tokens[i].text;
        if (i + 1 < s.end) text += doc.tokens[i].trailing_ws;
      }
      for (char& c : text) {
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
      }
      out += "# sent_id = " + std::to_string(++sent_id) + "\n";
      out += "# text = " + text + "\n";
      for (std::size_t i = s.begin; i < s.end; ++i) {
        const Token& t = doc.tokens[i];
        std::string head = "_";
        if (t.head) {
          if (t.head->is_root()) {
            head = "0";
          } else if (t.head->index() >= s.begin && t.head->index() < s.end) {
            head = std::to_string(t.head->index() - s.begin + 1);
          } else {
            throw ContractViolation("token " + std::to_string(i) +
                                    " has a head outside its sentence");
          }
        }
        std::string misc;
        auto add_misc = [&misc](const std::string& item) {
          if (!misc.empty()) misc.push_back('|');
          misc += item;
        };
        if (t.ent) add_misc("NER=" + *t.ent);
        if (t.trailing_ws.empty()) {
          add_misc("SpaceAfter=No");
        } else if (t.trailing_ws != " ") {
          add_misc("SpacesAfter=" + escape_spaces(t.trailing_ws));
        }
        if (misc.empty()) misc = "_";

        out += std::to_string(i - s.begin + 1);
        out += '\t' + t.text;
        out += '\t' + t.lemma.value_or("_");
        out += '\t' + t.upos.value_or("_");
        out += "\t_";
        out += '\t' + (t.feats ? t.feats->str() : std::string("_"));
        out += '\t' + head;
        out += '\t' + t.deprel.value_or("_");
        out += "\t_";
        out += '\t' + misc;
        out += '\n';
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace morphpipe
