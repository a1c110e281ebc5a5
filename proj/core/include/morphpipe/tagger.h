#pragma once

#include <vector>

#include "morphpipe/doc.h"
#include "morphpipe/model.h"

namespace morphpipe {

// Fills upos, feats and sent_start from the argmax of each head. Token 0
// always starts a sentence. `encoded` is the tok2vec output for the whole
// document.
void tag_encoded(AnnotatedDoc& doc, const MultitaskModel& model,
                 const Matrix& encoded);
void tag(AnnotatedDoc& doc, const MultitaskModel& model);

// Maximal runs that begin at each sentence-initial token; they partition the
// document. Token 0 opens the first range whatever its flag.
std::vector<SentenceRange> sentences(const AnnotatedDoc& doc);

}  // namespace morphpipe
