#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphpipe/doc.h"
#include "morphpipe/encoder.h"
#include "morphpipe/parser_scorer.h"
#include "morphpipe/tok2vec.h"

namespace morphpipe {

// Sorted, deduplicated label inventory; frozen once built.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::string& operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  // -1 when absent.
  int index(std::string_view label) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> labels_;
};

// Sentence-start head classes.
inline constexpr int kSentNo = 0;
inline constexpr int kSentYes = 1;

struct TagInventories {
  LabelSet upos;
  LabelSet feats;    // canonical MorphFeats strings
  LabelSet deprels;  // empty when there is no parser

  // Collects every gold label of the documents. Throws ContractViolation
  // when a token lacks UPOS; unset FEATS is the empty bundle.
  static TagInventories collect(const std::vector<AnnotatedDoc>& docs,
                                bool with_deprels);
};

// Shared encoder with UPOS, FEATS and sentence-start heads, plus an optional
// arc-eager scorer reading the same encoder output.
class MultitaskModel {
 public:
  MultitaskModel(const ModelDims& dims, TagInventories inventories,
                 std::shared_ptr<const StaticVectors> vectors);

  void init(Rng& rng);
  // Adds a freshly initialized parser head over `deprels`.
  void add_parser(LabelSet deprels, Rng& rng);
  bool has_parser() const { return parser_ != nullptr; }

  const ModelDims& dims() const { return dims_; }
  const TagInventories& inventories() const { return inventories_; }
  // Index of the "root" deprel, -1 if absent.
  int root_label() const { return root_label_; }

  Tok2Vec& tok2vec() { return tok2vec_; }
  const Tok2Vec& tok2vec() const { return tok2vec_; }
  SoftmaxHead& upos_head() { return upos_; }
  const SoftmaxHead& upos_head() const { return upos_; }
  SoftmaxHead& feats_head() { return feats_; }
  const SoftmaxHead& feats_head() const { return feats_; }
  SoftmaxHead& sent_head() { return sent_; }
  const SoftmaxHead& sent_head() const { return sent_; }
  ArcEagerScorer& parser() { return *parser_; }
  const ArcEagerScorer& parser() const { return *parser_; }

  ParamList params();

 private:
  ModelDims dims_;
  TagInventories inventories_;
  int root_label_ = -1;
  Tok2Vec tok2vec_;
  SoftmaxHead upos_;
  SoftmaxHead feats_;
  SoftmaxHead sent_;
  std::unique_ptr<ArcEagerScorer> parser_;
};

// Gold tree of doc.tokens[range] with labels indexed in `deprels`. Throws
// OracleUnavailable when a head leaves the sentence, is missing, or a label
// is unknown.
GoldTree gold_tree(const AnnotatedDoc& doc, const SentenceRange& range,
                   const LabelSet& deprels);

}  // namespace morphpipe
