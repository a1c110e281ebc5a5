#pragma once

#include <array>
#include <string>
#include <vector>

#include "morphpipe/encoder.h"
#include "morphpipe/nn.h"
#include "morphpipe/transition.h"

namespace morphpipe {

// Feature positions read from a parser state, in order: stack[0], stack[1],
// buffer[0], buffer[1], leftmost child of stack[0], rightmost child of
// stack[0], leftmost child of buffer[0], head of stack[0].
inline constexpr std::size_t kParserSlots = 8;
inline constexpr long kRootSlot = -1;
inline constexpr long kNullSlot = -2;

// Per slot: an encoder column (>= 0), the ROOT node, or nothing.
using SlotIndices = std::array<long, kParserSlots>;

// Encoder column of token node i is column_offset + i - 1.
SlotIndices state_slots(const ParserState& state, std::size_t column_offset);

// Action mask over ParserAction ids: legal_actions() plus the decoding
// constraints that ROOT takes a single dependent and that `root_label`
// (when >= 0) is used exactly for arcs from ROOT.
void action_mask(const ParserState& state, std::size_t labels, int root_label,
                 int* mask);

// Concatenates the 8 slot vectors into one maxout hidden layer and scores
// every action with a softmax layer. Missing slots use a learned vector per
// slot; ROOT has its own learned vector.
class ArcEagerScorer {
 public:
  struct Cache {
    std::vector<SlotIndices> slots;
    Matrix features;  // (8 * width) x states
    Matrix hidden;
    Eigen::MatrixXi argmax;
  };

  // Per-document precomputation of the hidden-layer contribution of every
  // token in every slot, so greedy decoding only sums columns.
  struct Precomputed {
    Matrix per_token;  // (8 * hidden * pieces) x tokens
    Matrix fixed;      // (hidden * pieces) x (2 * 8): null then root per slot
  };

  ArcEagerScorer(std::size_t width, std::size_t hidden, std::size_t pieces,
                 std::size_t labels, const std::string& name_prefix);

  void init(Rng& rng);

  // (8 * width) feature vector for one state.
  Vector state_features(const Matrix& encoded, const SlotIndices& slots) const;

  Matrix forward(const Matrix& encoded, const std::vector<SlotIndices>& slots,
                 Cache* cache) const;
  // Accumulates gradients and adds d(loss)/d(encoded) into `dencoded`.
  void backward(const Cache& cache, const Matrix& dlogits, Matrix& dencoded);

  Precomputed precompute(const Matrix& encoded) const;
  // Same logits as forward() for a single state.
  Vector score(const Precomputed& pre, const SlotIndices& slots) const;

  std::size_t labels() const { return labels_; }
  int actions() const { return ParserAction::count(labels_); }
  ParamList params();

 private:
  std::size_t width_;
  std::size_t hidden_;
  std::size_t pieces_;
  std::size_t labels_;
  Param slot_vectors_;  // width x (8 + 1); last column is ROOT
  Param hidden_w_;
  Param hidden_b_;
  SoftmaxHead out_;
};

}  // namespace morphpipe
