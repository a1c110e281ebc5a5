#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace morphpipe {

// Monotonic arc-eager transition system. Nodes are numbered 0..n with 0 the
// artificial ROOT and i the i-th token of the sentence.
enum class Move : std::uint8_t { kShift, kReduce, kLeftArc, kRightArc };

struct ParserAction {
  Move move = Move::kShift;
  int label = -1;  // deprel index for arc moves, -1 otherwise

  static ParserAction shift() { return {Move::kShift, -1}; }
  static ParserAction reduce() { return {Move::kReduce, -1}; }
  static ParserAction left_arc(int label) { return {Move::kLeftArc, label}; }
  static ParserAction right_arc(int label) { return {Move::kRightArc, label}; }

  // Dense id for classifiers: SHIFT 0, REDUCE 1, LEFT-ARC(l) 2+2l,
  // RIGHT-ARC(l) 3+2l.
  int id() const;
  static ParserAction from_id(int id);
  static int count(std::size_t labels) { return 2 + 2 * static_cast<int>(labels); }

  std::string str() const;
  friend bool operator==(const ParserAction&, const ParserAction&) = default;
};

struct Arc {
  std::size_t head = 0;
  std::size_t dependent = 0;
  int label = -1;
  friend bool operator==(const Arc&, const Arc&) = default;
};

inline constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

class ParserState {
 public:
  explicit ParserState(std::size_t tokens);

  std::size_t tokens() const { return tokens_; }
  const std::vector<std::size_t>& stack() const { return stack_; }
  std::size_t stack_top() const { return stack_.back(); }
  // Node `depth` positions below the stack top, kNoNode when absent.
  std::size_t stack_at(std::size_t depth) const;
  bool buffer_empty() const { return front_ > tokens_; }
  // Buffer node at `offset` from the front, kNoNode when absent.
  std::size_t buffer_at(std::size_t offset) const;

  bool attached(std::size_t node) const { return head_[node] != kNoNode; }
  std::size_t head_of(std::size_t node) const { return head_[node]; }
  int label_of(std::size_t node) const { return label_[node]; }
  std::size_t leftmost_child(std::size_t node) const { return leftmost_[node]; }
  std::size_t rightmost_child(std::size_t node) const { return rightmost_[node]; }
  std::size_t root_dependents() const { return root_dependents_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  bool is_terminal() const;

  // Raw mutations used by apply(); they do not check legality.
  void push_front();
  void pop();
  void add_arc(std::size_t head, std::size_t dependent, int label);

 private:
  std::size_t tokens_;
  std::vector<std::size_t> stack_;
  std::size_t front_ = 1;
  std::vector<std::size_t> head_;
  std::vector<int> label_;
  std::vector<std::size_t> leftmost_;
  std::vector<std::size_t> rightmost_;
  std::size_t root_dependents_ = 0;
  std::vector<Arc> arcs_;
};

struct LegalMoves {
  bool shift = false;
  bool reduce = false;
  bool left_arc = false;
  bool right_arc = false;

  bool any() const { return shift || reduce || left_arc || right_arc; }
  bool allows(Move move) const;
  friend bool operator==(const LegalMoves&, const LegalMoves&) = default;
};

// SHIFT and RIGHT-ARC need a non-empty buffer; LEFT-ARC also needs a stack
// top that is neither ROOT nor attached; REDUCE needs an attached stack top.
LegalMoves legal_actions(const ParserState& state);

// Applies a legal action; throws ContractViolation otherwise.
void apply(ParserState& state, const ParserAction& action);

// Gold tree for one sentence: heads[i] and labels[i] describe node i+1;
// heads use 0 for ROOT.
struct GoldTree {
  std::vector<std::size_t> heads;
  std::vector<int> labels;
};

bool is_projective(const std::vector<std::size_t>& heads);

// Static oracle: LEFT-ARC when the buffer front is the gold head of the
// stack top, RIGHT-ARC when the stack top is the gold head of the buffer
// front, REDUCE when the stack top is attached and has no gold dependents
// left in the buffer, SHIFT otherwise. Throws OracleUnavailable for trees
// that are non-projective or malformed.
std::vector<ParserAction> oracle_actions(const GoldTree& tree);

}  // namespace morphpipe
