#include "morphpipe/parser.h"

#include "morphpipe/errors.h"
#include "morphpipe/tagger.h"

namespace morphpipe {

GreedyParse greedy_parse(const ArcEagerScorer& scorer,
                         const ArcEagerScorer::Precomputed& pre,
                         std::size_t column_offset, std::size_t n,
                         int root_label) {
  ParserState state(n);
  std::vector<int> mask(static_cast<std::size_t>(scorer.actions()));
  GreedyParse out;
  while (true) {
    action_mask(state, scorer.labels(), root_label, mask.data());
    const Vector logits = scorer.score(pre, state_slots(state, column_offset));
    const int best = masked_argmax(logits, mask.data());
    if (best < 0) break;
    apply(state, ParserAction::from_id(best));
    ++out.steps;
  }
  out.heads.resize(n);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.heads[i] = state.head_of(i + 1);
    out.labels[i] = state.label_of(i + 1);
  }
  return out;
}

TreeEdges repair_tree(const GreedyParse& parse, const LabelSet& deprels) {
  const std::size_t n = parse.heads.size();
  TreeEdges out;
  out.heads.resize(n);
  out.labels.resize(n);
  std::size_t root = kNoNode;
  for (std::size_t i = 0; i < n; ++i) {
    if (parse.heads[i] == 0) {
      root = i + 1;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (parse.heads[i] != kNoNode) {
      out.heads[i] = parse.heads[i];
      const int label = parse.labels[i];
      out.labels[i] = label >= 0 ? deprels[static_cast<std::size_t>(label)] : "dep";
    } else if (root == kNoNode) {
      root = i + 1;
      out.heads[i] = 0;
      out.labels[i] = "root";
    } else {
      out.heads[i] = root;
      out.labels[i] = "dep";
    }
  }
  return out;
}

void parse_encoded(AnnotatedDoc& doc, const MultitaskModel& model,
                   const Matrix& encoded) {
  if (!model.has_parser()) throw ContractViolation("model has no parser");
  if (doc.empty()) return;
  const ArcEagerScorer& scorer = model.parser();
  const ArcEagerScorer::Precomputed pre = scorer.precompute(encoded);
  for (const SentenceRange& range : sentences(doc)) {
    const GreedyParse raw =
        greedy_parse(scorer, pre, range.begin, range.size(), model.root_label());
    const TreeEdges tree = repair_tree(raw, model.inventories().deprels);
    for (std::size_t i = 0; i < range.size(); ++i) {
      Token& t = doc.tokens[range.begin + i];
      t.head = tree.heads[i] == 0 ? Attachment::root()
                                  : Attachment::to(range.begin + tree.heads[i] - 1);
      t.deprel = tree.labels[i];
    }
  }
}

void parse(AnnotatedDoc& doc, const MultitaskModel& model) {
  if (doc.empty()) return;
  const auto texts = token_texts(doc);
  parse_encoded(doc, model, model.tok2vec().forward(texts, nullptr));
}

}  // namespace morphpipe
