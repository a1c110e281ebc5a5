#pragma once

#include <string>
#include <vector>

#include "morphpipe/doc.h"
#include "morphpipe/model.h"

namespace morphpipe {

// Raw greedy result for one sentence: heads[i]/labels[i] describe node i+1,
// head 0 is ROOT, kNoNode marks a token left unattached.
struct GreedyParse {
  std::vector<std::size_t> heads;
  std::vector<int> labels;
  std::size_t steps = 0;
};

// Greedy decoding of an n-token sentence whose encoder columns start at
// `column_offset` of the precomputed matrix.
GreedyParse greedy_parse(const ArcEagerScorer& scorer,
                         const ArcEagerScorer::Precomputed& pre,
                         std::size_t column_offset, std::size_t n,
                         int root_label);

struct TreeEdges {
  std::vector<std::size_t> heads;  // 0 = ROOT
  std::vector<std::string> labels;
};

// Turns a greedy result into a tree: unattached tokens hang from the
// sentence root with "dep"; without a root, the first unattached token
// becomes the root with "root".
TreeEdges repair_tree(const GreedyParse& parse, const LabelSet& deprels);

// Parses each predicted sentence independently and fills head and deprel.
void parse_encoded(AnnotatedDoc& doc, const MultitaskModel& model,
                   const Matrix& encoded);
void parse(AnnotatedDoc& doc, const MultitaskModel& model);

}  // namespace morphpipe
