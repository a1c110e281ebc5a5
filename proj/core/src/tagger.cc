#include "morphpipe/tagger.h"

#include "morphpipe/conllu.h"

namespace morphpipe {

void tag_encoded(AnnotatedDoc& doc, const MultitaskModel& model,
                 const Matrix& encoded) {
  if (doc.empty()) return;
  const TagInventories& inv = model.inventories();
  const Matrix upos = model.upos_head().forward(encoded);
  const Matrix feats = model.feats_head().forward(encoded);
  const Matrix sent = model.sent_head().forward(encoded);
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    Token& t = doc.tokens[i];
    t.upos = inv.upos[static_cast<std::size_t>(masked_argmax(upos.col(c), nullptr))];
    t.feats = MorphFeats::parse(
        inv.feats[static_cast<std::size_t>(masked_argmax(feats.col(c), nullptr))]);
    const bool start = i == 0 || masked_argmax(sent.col(c), nullptr) == kSentYes;
    t.sent_start = start ? SentStart::kYes : SentStart::kNo;
  }
}

void tag(AnnotatedDoc& doc, const MultitaskModel& model) {
  if (doc.empty()) return;
  const auto texts = token_texts(doc);
  tag_encoded(doc, model, model.tok2vec().forward(texts, nullptr));
}

std::vector<SentenceRange> sentences(const AnnotatedDoc& doc) {
  return sentence_ranges(doc);
}

}  // namespace morphpipe
