#include "morphpipe/utf8.h"

namespace morphpipe::utf8 {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Offset from the uppercase form to the lowercase form, 0 when `cp` is not an
// uppercase letter covered by the table.
int lower_offset(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return 32;
  if (cp < 0xC0) return 0;
  if (cp <= 0xDE) return cp == 0xD7 ? 0 : 32;
  if (cp == 0x178) return 0xFF - 0x178;
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
    return cp % 2 == 0 ? 1 : 0;
  }
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
    return cp % 2 == 1 ? 1 : 0;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return 32;
  if (cp >= 0x400 && cp <= 0x40F) return 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return 32;
  if ((cp >= 0x460 && cp <= 0x481) || (cp >= 0x48A && cp <= 0x4BF)) {
    return cp % 2 == 0 ? 1 : 0;
  }
  if (cp >= 0x1E00 && cp <= 0x1EFF && !(cp >= 0x1E96 && cp <= 0x1E9F)) {
    return cp % 2 == 0 ? 1 : 0;
  }
  return 0;
}

int upper_offset(char32_t cp) {
  if (cp >= 'a' && cp <= 'z') return 32;
  if (cp < 0xE0) return 0;
  if (cp <= 0xFE) return cp == 0xF7 ? 0 : 32;
  if (cp == 0xFF) return 0xFF - 0x178;
  if (cp < 0x100) return 0;
  if (cp > 0x17F && cp < 0x3B1) return 0;
  if ((cp >= 0x101 && cp <= 0x137) || (cp >= 0x14B && cp <= 0x177)) {
    return cp % 2 == 1 ? 1 : 0;
  }
  if ((cp >= 0x13A && cp <= 0x148) || (cp >= 0x17A && cp <= 0x17E)) {
    return cp % 2 == 0 ? 1 : 0;
  }
  if (cp >= 0x3B1 && cp <= 0x3C9 && cp != 0x3C2) return 32;
  if (cp >= 0x450 && cp <= 0x45F) return 0x50;
  if (cp >= 0x430 && cp <= 0x44F) return 32;
  if ((cp >= 0x461 && cp <= 0x481) || (cp >= 0x48B && cp <= 0x4BF)) {
    return cp % 2 == 1 ? 1 : 0;
  }
  if (cp >= 0x1E01 && cp <= 0x1EFF && !(cp >= 0x1E96 && cp <= 0x1E9F)) {
    return cp % 2 == 1 ? 1 : 0;
  }
  return 0;
}

}  // namespace

CodePoint decode_at(std::string_view text, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  if (lead < 0x80) return {lead, 1};
  std::size_t need;
  char32_t value;
  char32_t min_value;
  if ((lead & 0xE0) == 0xC0) {
    need = 1;
    value = lead & 0x1F;
    min_value = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    need = 2;
    value = lead & 0x0F;
    min_value = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    need = 3;
    value = lead & 0x07;
    min_value = 0x10000;
  } else {
    return {kReplacement, 1};
  }
  if (pos + need >= text.size()) return {kReplacement, 1};
  for (std::size_t i = 1; i <= need; ++i) {
    const auto c = static_cast<unsigned char>(text[pos + i]);
    if (!is_continuation(c)) return {kReplacement, 1};
    value = (value << 6) | (c & 0x3F);
  }
  if (value < min_value || value > 0x10FFFF ||
      (value >= 0xD800 && value <= 0xDFFF)) {
    return {kReplacement, 1};
  }
  return {value, static_cast<std::uint8_t>(need + 1)};
}

std::size_t last_length(std::string_view text, std::size_t end) {
  // Walk back over at most three continuation bytes and confirm that the
  // candidate lead byte decodes to exactly the remaining span.
  for (std::size_t back = 1; back <= 4 && back <= end; ++back) {
    const auto c = static_cast<unsigned char>(text[end - back]);
    if (!is_continuation(c) || back == 4) {
      const CodePoint cp = decode_at(text, end - back);
      if (cp.length == back) return back;
      return 1;
    }
  }
  return 1;
}

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    const CodePoint cp = decode_at(text, pos);
    out.push_back(cp.value);
    pos += cp.length;
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append(out, cp);
  return out;
}

std::size_t length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < text.size(); ++n) {
    pos += decode_at(text, pos).length;
  }
  return n;
}

char32_t to_lower(char32_t cp) { return cp + lower_offset(cp); }
char32_t to_upper(char32_t cp) { return cp - upper_offset(cp); }
bool is_upper(char32_t cp) { return lower_offset(cp) != 0; }

bool is_lower(char32_t cp) {
  return upper_offset(cp) != 0 || cp == 0xDF || cp == 0x138 || cp == 0x149 ||
         cp == 0x17F;
}

bool is_digit(char32_t cp) { return cp >= '0' && cp <= '9'; }

bool is_space(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 ||
         cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    const CodePoint cp = decode_at(text, pos);
    if (cp.value == kReplacement && cp.length == 1 &&
        static_cast<unsigned char>(text[pos]) >= 0x80) {
      out.push_back(text[pos]);  // keep invalid bytes untouched
    } else {
      append(out, to_lower(cp.value));
    }
    pos += cp.length;
  }
  return out;
}

std::u32string to_lower(std::u32string_view text) {
  std::u32string out(text);
  for (char32_t& cp : out) cp = to_lower(cp);
  return out;
}

std::string lower_first(std::string_view text) {
  if (text.empty()) return std::string();
  const CodePoint cp = decode_at(text, 0);
  if (!is_upper(cp.value)) return std::string(text);
  std::string out;
  append(out, to_lower(cp.value));
  out.append(text.substr(cp.length));
  return out;
}

std::string prefix(std::string_view text, std::size_t count) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count && pos < text.size(); ++i) {
    pos += decode_at(text, pos).length;
  }
  return std::string(text.substr(0, pos));
}

std::string suffix(std::string_view text, std::size_t count) {
  std::size_t start = text.size();
  for (std::size_t i = 0; i < count && start > 0; ++i) {
    start -= last_length(text, start);
  }
  return std::string(text.substr(start));
}

}  // namespace morphpipe::utf8
