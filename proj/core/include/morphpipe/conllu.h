#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "morphpipe/doc.h"

namespace morphpipe {

// Reads CoNLL-U. Documents are split at "# newdoc" comments (one document
// when none are present). Gold sentence boundaries become sent_start flags.
// Token spacing comes from MISC SpaceAfter/SpacesAfter when given, otherwise
// from the sentence's "# text =" comment, otherwise a single space.
// An entity tag stored as "NER=<tag>" in MISC is read into Token::ent.
//
// Throws ParseError (malformed rows) and UnsupportedConstruct (multiword
// token ranges and empty nodes), both carrying the 1-based line number.
std::vector<AnnotatedDoc> read_conllu(std::string_view text);

// Writes documents as CoNLL-U; "# newdoc" separates documents when more than
// one is written. Heads must stay inside their sentence.
std::string write_conllu(const std::vector<AnnotatedDoc>& docs);

// Maximal runs that start at each sentence-start flag; token 0 always starts
// a sentence. The ranges partition the document.
std::vector<SentenceRange> sentence_ranges(const AnnotatedDoc& doc);

}  // namespace morphpipe
