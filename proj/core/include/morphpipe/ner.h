#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "morphpipe/doc.h"
#include "morphpipe/entity_tags.h"
#include "morphpipe/model.h"
#include "morphpipe/nn.h"
#include "morphpipe/tok2vec.h"

namespace morphpipe {

// Greedy BILOU tagger. The decision for token i reads its encoder vector,
// an embedding of the previous tag and the mean encoder vector of the most
// recently completed entity in the sentence (a learned vector before the
// first one).
class NerModel {
 public:
  NerModel(const ModelDims& dims, LabelSet classes,
           std::shared_ptr<const StaticVectors> vectors);

  void init(Rng& rng);

  const ModelDims& dims() const { return dims_; }
  const LabelSet& classes() const { return classes_; }
  // O, then B, I, L, U for each class in inventory order.
  int tag_count() const { return 1 + 4 * static_cast<int>(classes_.size()); }
  EntityTag tag_at(int id) const;
  // -1 for tags of unknown classes.
  int tag_id(const EntityTag& tag) const;
  // Index of the "no previous tag" embedding column.
  int start_tag() const { return tag_count(); }

  Tok2Vec& tok2vec() { return tok2vec_; }
  const Tok2Vec& tok2vec() const { return tok2vec_; }
  Param& tag_embeddings() { return tag_embed_; }
  const Param& tag_embeddings() const { return tag_embed_; }
  Param& null_entity() { return null_entity_; }
  const Param& null_entity() const { return null_entity_; }
  SoftmaxHead& output() { return out_; }
  const SoftmaxHead& output() const { return out_; }

  ParamList params();

 private:
  ModelDims dims_;
  LabelSet classes_;
  Tok2Vec tok2vec_;
  Param tag_embed_;    // ner_tag_dim x (tags + 1)
  Param null_entity_;  // width x 1
  SoftmaxHead out_;
};

// Allowed-tag mask for the step after `prev` (-1 at a sentence start);
// B and I are excluded on the last token of a sentence.
void ner_tag_mask(const NerModel& model, int prev, bool last_in_sentence,
                  int* mask);

struct NerExample {
  std::vector<std::string> texts;
  std::vector<int> tags;
  std::vector<SentenceRange> sentences;  // relative to the example
  Eigen::MatrixXi masks;                 // tags x tokens, gold-forced
};

// Groups sentences (by sent_start) `per_example` at a time across the
// documents. Entity tags are read from Token::ent (BILOU or IOB2, repaired
// per sentence). Spans of classes outside the model inventory become O.
std::vector<NerExample> build_ner_examples(const std::vector<AnnotatedDoc>& docs,
                                           const NerModel& model,
                                           std::size_t per_example);

// Teacher-forced mean cross-entropy over the tokens of the example.
double ner_loss(NerModel& model, const NerExample& example, bool grads,
                double scale = 1.0, Rng* dropout_rng = nullptr,
                double dropout = 0.0);

// Sets Token::ent (BILOU) on every token and returns the entity spans.
// Spans stay inside sentence boundaries.
std::vector<EntitySpan> recognize(AnnotatedDoc& doc, const NerModel& model);

// Gold spans of a document, decoded per sentence.
std::vector<EntitySpan> doc_entity_spans(const AnnotatedDoc& doc);

struct NerEpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double dev_f1 = 0.0;
};

struct NerTraining {
  std::unique_ptr<NerModel> model;
  std::vector<NerEpochLog> epochs;
  std::size_t best_epoch = 0;
  std::vector<std::string> warnings;
};

// Entity classes come from `train`; dev classes missing there are reported
// in `warnings` and scored as O. The epoch with the best dev span F1 (the
// training set when dev is empty) is kept; ties go to the later epoch.
NerTraining train_ner(const std::vector<AnnotatedDoc>& train,
                      const std::vector<AnnotatedDoc>& dev,
                      const ModelDims& dims,
                      std::shared_ptr<const StaticVectors> vectors,
                      const TrainConfig& config, std::ostream* log = nullptr);

// Documents of one sentence each, with ent tags in BILOU.
std::vector<AnnotatedDoc> ner_docs(const std::vector<NerSentence>& sentences);

}  // namespace morphpipe
