#include "morphpipe/model.h"

#include <algorithm>

#include "morphpipe/errors.h"

namespace morphpipe {

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

int LabelSet::index(std::string_view label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return -1;
  return static_cast<int>(it - labels_.begin());
}

TagInventories TagInventories::collect(const std::vector<AnnotatedDoc>& docs,
                                       bool with_deprels) {
  std::vector<std::string> upos;
  std::vector<std::string> feats;
  std::vector<std::string> deprels;
  for (const AnnotatedDoc& doc : docs) {
    for (const Token& t : doc.tokens) {
      if (!t.upos) {
        throw ContractViolation("token '" + t.text + "' lacks UPOS");
      }
      upos.push_back(*t.upos);
      feats.push_back(t.feats_label());
      if (with_deprels && t.deprel) deprels.push_back(*t.deprel);
    }
  }
  return {LabelSet(std::move(upos)), LabelSet(std::move(feats)),
          LabelSet(std::move(deprels))};
}

MultitaskModel::MultitaskModel(const ModelDims& dims,
                               TagInventories inventories,
                               std::shared_ptr<const StaticVectors> vectors)
    : dims_(dims),
      inventories_(std::move(inventories)),
      tok2vec_(dims, std::move(vectors), "tok2vec."),
      upos_(dims.width, inventories_.upos.size(), "tagger.upos"),
      feats_(dims.width, inventories_.feats.size(), "tagger.feats"),
      sent_(dims.width, 2, "tagger.sent") {
  if (!inventories_.deprels.empty()) {
    root_label_ = inventories_.deprels.index("root");
    parser_ = std::make_unique<ArcEagerScorer>(
        dims.width, dims.parser_hidden, dims.parser_pieces,
        inventories_.deprels.size(), "parser.");
  }
}

void MultitaskModel::init(Rng& rng) {
  tok2vec_.init(rng);
  if (parser_) parser_->init(rng);
}

void MultitaskModel::add_parser(LabelSet deprels, Rng& rng) {
  if (deprels.empty()) throw ContractViolation("parser needs deprel labels");
  inventories_.deprels = std::move(deprels);
  root_label_ = inventories_.deprels.index("root");
  parser_ = std::make_unique<ArcEagerScorer>(
      dims_.width, dims_.parser_hidden, dims_.parser_pieces,
      inventories_.deprels.size(), "parser.");
  parser_->init(rng);
}

ParamList MultitaskModel::params() {
  ParamList out = tok2vec_.params();
  for (SoftmaxHead* head : {&upos_, &feats_, &sent_}) {
    for (Param* p : head->params()) out.push_back(p);
  }
  if (parser_) {
    for (Param* p : parser_->params()) out.push_back(p);
  }
  return out;
}

GoldTree gold_tree(const AnnotatedDoc& doc, const SentenceRange& range,
                   const LabelSet& deprels) {
  GoldTree tree;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    const Token& t = doc.tokens[i];
    if (!t.head || !t.deprel) {
      throw OracleUnavailable("token " + std::to_string(i) + " has no head");
    }
    std::size_t head = 0;
    if (!t.head->is_root()) {
      const std::size_t h = t.head->index();
      if (h < range.begin || h >= range.end) {
        throw OracleUnavailable("token " + std::to_string(i) +
                                " attaches outside its sentence");
      }
      head = h - range.begin + 1;
    }
    const int label = deprels.index(*t.deprel);
    if (label < 0) {
      throw OracleUnavailable("unknown deprel '" + *t.deprel + "'");
    }
    tree.heads.push_back(head);
    tree.labels.push_back(label);
  }
  return tree;
}

}  // namespace morphpipe
