#include "morphpipe/parser_scorer.h"

namespace morphpipe {

namespace {

long node_slot(std::size_t node, std::size_t column_offset) {
  if (node == kNoNode) return kNullSlot;
  if (node == 0) return kRootSlot;
  return static_cast<long>(column_offset + node - 1);
}

}  // namespace

SlotIndices state_slots(const ParserState& state, std::size_t column_offset) {
  const std::size_t s0 = state.stack_at(0);
  const std::size_t b0 = state.buffer_at(0);
  auto child = [&](std::size_t node, bool leftmost) {
    if (node == kNoNode) return kNoNode;
    return leftmost ? state.leftmost_child(node) : state.rightmost_child(node);
  };
  const std::size_t head = s0 == kNoNode || s0 == 0 ? kNoNode : state.head_of(s0);
  return {node_slot(s0, column_offset),
          node_slot(state.stack_at(1), column_offset),
          node_slot(b0, column_offset),
          node_slot(state.buffer_at(1), column_offset),
          node_slot(child(s0, true), column_offset),
          node_slot(child(s0, false), column_offset),
          node_slot(child(b0, true), column_offset),
          node_slot(head, column_offset)};
}

void action_mask(const ParserState& state, std::size_t labels, int root_label,
                 int* mask) {
  const LegalMoves legal = legal_actions(state);
  mask[0] = legal.shift;
  mask[1] = legal.reduce;
  const bool from_root = state.stack_top() == 0;
  for (std::size_t l = 0; l < labels; ++l) {
    const int label = static_cast<int>(l);
    const bool is_root_label = label == root_label;
    mask[2 + 2 * l] = legal.left_arc && !is_root_label;
    bool right = legal.right_arc;
    if (from_root) {
      right = right && state.root_dependents() == 0 &&
              (root_label < 0 || is_root_label);
    } else {
      right = right && !is_root_label;
    }
    mask[3 + 2 * l] = right;
  }
}

ArcEagerScorer::ArcEagerScorer(std::size_t width, std::size_t hidden,
                               std::size_t pieces, std::size_t labels,
                               const std::string& name_prefix)
    : width_(width),
      hidden_(hidden),
      pieces_(pieces),
      labels_(labels),
      slot_vectors_(name_prefix + "slots", static_cast<Eigen::Index>(width),
                    static_cast<Eigen::Index>(kParserSlots + 1)),
      hidden_w_(name_prefix + "hidden.w",
                static_cast<Eigen::Index>(hidden * pieces),
                static_cast<Eigen::Index>(kParserSlots * width)),
      hidden_b_(name_prefix + "hidden.b",
                static_cast<Eigen::Index>(hidden * pieces), 1),
      out_(hidden, static_cast<std::size_t>(ParserAction::count(labels)),
           name_prefix + "out") {}

void ArcEagerScorer::init(Rng& rng) {
  slot_vectors_.init_uniform(rng, 0.1);
  hidden_w_.init_glorot(rng, hidden_w_.value.cols(),
                        static_cast<Eigen::Index>(hidden_));
}

Vector ArcEagerScorer::state_features(const Matrix& encoded,
                                      const SlotIndices& slots) const {
  const auto w = static_cast<Eigen::Index>(width_);
  Vector out(static_cast<Eigen::Index>(kParserSlots) * w);
  for (std::size_t s = 0; s < kParserSlots; ++s) {
    const long idx = slots[s];
    auto segment = out.segment(static_cast<Eigen::Index>(s) * w, w);
    if (idx >= 0) {
      segment = encoded.col(idx);
    } else if (idx == kRootSlot) {
      segment = slot_vectors_.value.col(kParserSlots);
    } else {
      segment = slot_vectors_.value.col(static_cast<Eigen::Index>(s));
    }
  }
  return out;
}

Matrix ArcEagerScorer::forward(const Matrix& encoded,
                               const std::vector<SlotIndices>& slots,
                               Cache* cache) const {
  const auto m = static_cast<Eigen::Index>(slots.size());
  Matrix features(static_cast<Eigen::Index>(kParserSlots * width_), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    features.col(i) = state_features(encoded, slots[static_cast<std::size_t>(i)]);
  }
  Matrix pre = hidden_w_.value * features;
  pre.colwise() += hidden_b_.value.col(0);
  Matrix hidden;
  Eigen::MatrixXi argmax;
  maxout_forward(pre, static_cast<int>(pieces_), hidden, argmax);
  Matrix logits = out_.forward(hidden);
  if (cache) {
    cache->slots = slots;
    cache->features = std::move(features);
    cache->hidden = std::move(hidden);
    cache->argmax = std::move(argmax);
  }
  return logits;
}

void ArcEagerScorer::backward(const Cache& cache, const Matrix& dlogits,
                              Matrix& dencoded) {
  const Matrix dhidden = out_.backward(cache.hidden, dlogits);
  Matrix dpre;
  maxout_backward(dhidden, cache.argmax, static_cast<int>(pieces_), dpre);
  hidden_w_.grad.noalias() += dpre * cache.features.transpose();
  hidden_b_.grad.col(0) += dpre.rowwise().sum();
  const Matrix dfeatures = hidden_w_.value.transpose() * dpre;
  const auto w = static_cast<Eigen::Index>(width_);
  for (std::size_t i = 0; i < cache.slots.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    for (std::size_t s = 0; s < kParserSlots; ++s) {
      const long idx = cache.slots[i][s];
      const auto segment = dfeatures.col(col).segment(static_cast<Eigen::Index>(s) * w, w);
      if (idx >= 0) {
        dencoded.col(idx) += segment;
      } else if (idx == kRootSlot) {
        slot_vectors_.grad.col(kParserSlots) += segment;
      } else {
        slot_vectors_.grad.col(static_cast<Eigen::Index>(s)) += segment;
      }
    }
  }
}

ArcEagerScorer::Precomputed ArcEagerScorer::precompute(
    const Matrix& encoded) const {
  const auto w = static_cast<Eigen::Index>(width_);
  const auto hp = static_cast<Eigen::Index>(hidden_ * pieces_);
  const auto slots = static_cast<Eigen::Index>(kParserSlots);
  Matrix stacked(slots * hp, w);
  Precomputed pre;
  pre.fixed.resize(hp, 2 * slots);
  for (Eigen::Index s = 0; s < slots; ++s) {
    const auto block = hidden_w_.value.middleCols(s * w, w);
    stacked.middleRows(s * hp, hp) = block;
    pre.fixed.col(s) = block * slot_vectors_.value.col(s);
    pre.fixed.col(slots + s) = block * slot_vectors_.value.col(slots);
  }
  pre.per_token.noalias() = stacked * encoded;
  return pre;
}

Vector ArcEagerScorer::score(const Precomputed& pre,
                             const SlotIndices& slots) const {
  const auto hp = static_cast<Eigen::Index>(hidden_ * pieces_);
  const auto n_slots = static_cast<Eigen::Index>(kParserSlots);
  Vector z = hidden_b_.value.col(0);
  for (Eigen::Index s = 0; s < n_slots; ++s) {
    const long idx = slots[static_cast<std::size_t>(s)];
    if (idx >= 0) {
      z += pre.per_token.col(idx).segment(s * hp, hp);
    } else if (idx == kRootSlot) {
      z += pre.fixed.col(n_slots + s);
    } else {
      z += pre.fixed.col(s);
    }
  }
  const auto p = static_cast<Eigen::Index>(pieces_);
  Vector hidden(static_cast<Eigen::Index>(hidden_));
  for (Eigen::Index u = 0; u < hidden.size(); ++u) {
    hidden[u] = z.segment(u * p, p).maxCoeff();
  }
  return out_.weight().value * hidden + out_.bias().value.col(0);
}

ParamList ArcEagerScorer::params() {
  ParamList out = {&slot_vectors_, &hidden_w_, &hidden_b_};
  for (Param* p : out_.params()) out.push_back(p);
  return out;
}

}  // namespace morphpipe
