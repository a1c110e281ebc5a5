#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphpipe/doc.h"

namespace morphpipe {

enum class TagPrefix { kOutside, kBegin, kInside, kLast, kUnit };

struct EntityTag {
  TagPrefix prefix = TagPrefix::kOutside;
  std::string label;  // empty for O

  static EntityTag outside() { return {}; }

  // Accepts "O" and "X-LABEL" with X in {B, I, L, U, E, S}; E and S are
  // aliases of L and U. Returns nullopt for any other shape.
  static std::optional<EntityTag> parse(std::string_view text);

  std::string str() const;

  friend bool operator==(const EntityTag&, const EntityTag&) = default;
};

// Exact BILOU encoding of valid spans over `n` tokens.
std::vector<EntityTag> spans_to_bilou(const std::vector<EntitySpan>& spans,
                                      std::size_t n);

// Total decoder for BILOU and IOB2 sequences. Repairs: an I or L without an
// open span of the same label opens one; an open span is closed at the
// previous token by O, B, U, a label change, or the end of the sequence.
std::vector<EntitySpan> bilou_to_spans(const std::vector<EntityTag>& tags);

// Whether `next` may follow `prev` under the BILOU grammar. `prev` is nullopt
// at the sequence start. B-X and I-X must be followed by I-X or L-X; O, L and
// U may be followed by O, B or U.
bool bilou_transition_allowed(const std::optional<EntityTag>& prev,
                              const EntityTag& next);

// True when the sequence follows the grammar and ends outside any span.
bool is_valid_bilou(const std::vector<EntityTag>& tags);

struct NerSentence {
  std::vector<std::string> tokens;
  std::vector<EntitySpan> spans;

  friend bool operator==(const NerSentence&, const NerSentence&) = default;
};

// Two-column "token<TAB>tag" files with blank-line sentence separators.
// Throws ParseError on a malformed row or an unknown tag shape.
std::vector<NerSentence> read_ner_tsv(std::string_view text);

// Writes BILOU tags.
std::string write_ner_tsv(const std::vector<NerSentence>& sentences);

// Converts a document whose tokens carry `ent` tags into a sentence record,
// and back (tokens joined by single spaces).
NerSentence ner_sentence_from_doc(const AnnotatedDoc& doc);
AnnotatedDoc doc_from_ner_sentence(const NerSentence& sentence);

}  // namespace morphpipe
