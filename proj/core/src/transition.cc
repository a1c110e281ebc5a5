#include "morphpipe/transition.h"

#include <algorithm>

#include "morphpipe/errors.h"

namespace morphpipe {

int ParserAction::id() const {
  switch (move) {
    case Move::kShift: return 0;
    case Move::kReduce: return 1;
    case Move::kLeftArc: return 2 + 2 * label;
    case Move::kRightArc: return 3 + 2 * label;
  }
  return 0;
}

ParserAction ParserAction::from_id(int id) {
  if (id == 0) return shift();
  if (id == 1) return reduce();
  const int label = (id - 2) / 2;
  return id % 2 == 0 ? left_arc(label) : right_arc(label);
}

std::string ParserAction::str() const {
  switch (move) {
    case Move::kShift: return "SHIFT";
    case Move::kReduce: return "REDUCE";
    case Move::kLeftArc: return "LEFT-ARC(" + std::to_string(label) + ")";
    case Move::kRightArc: return "RIGHT-ARC(" + std::to_string(label) + ")";
  }
  return "?";
}

ParserState::ParserState(std::size_t tokens)
    : tokens_(tokens),
      stack_{0},
      head_(tokens + 1, kNoNode),
      label_(tokens + 1, -1),
      leftmost_(tokens + 1, kNoNode),
      rightmost_(tokens + 1, kNoNode) {}

std::size_t ParserState::stack_at(std::size_t depth) const {
  if (depth >= stack_.size()) return kNoNode;
  return stack_[stack_.size() - 1 - depth];
}

std::size_t ParserState::buffer_at(std::size_t offset) const {
  const std::size_t node = front_ + offset;
  return node <= tokens_ ? node : kNoNode;
}

bool ParserState::is_terminal() const { return !legal_actions(*this).any(); }

void ParserState::push_front() { stack_.push_back(front_++); }

void ParserState::pop() { stack_.pop_back(); }

void ParserState::add_arc(std::size_t head, std::size_t dependent, int label) {
  head_[dependent] = head;
  label_[dependent] = label;
  if (leftmost_[head] == kNoNode || dependent < leftmost_[head]) {
    leftmost_[head] = dependent;
  }
  if (rightmost_[head] == kNoNode || dependent > rightmost_[head]) {
    rightmost_[head] = dependent;
  }
  if (head == 0) ++root_dependents_;
  arcs_.push_back({head, dependent, label});
}

bool LegalMoves::allows(Move move) const {
  switch (move) {
    case Move::kShift: return shift;
    case Move::kReduce: return reduce;
    case Move::kLeftArc: return left_arc;
    case Move::kRightArc: return right_arc;
  }
  return false;
}

LegalMoves legal_actions(const ParserState& state) {
  LegalMoves legal;
  const bool buffer = !state.buffer_empty();
  const std::size_t top = state.stack_top();
  legal.shift = buffer;
  legal.right_arc = buffer;
  legal.left_arc = buffer && top != 0 && !state.attached(top);
  legal.reduce = top != 0 && state.attached(top);
  return legal;
}

void apply(ParserState& state, const ParserAction& action) {
  if (!legal_actions(state).allows(action.move)) {
    throw ContractViolation("illegal parser action " + action.str());
  }
  switch (action.move) {
    case Move::kShift:
      state.push_front();
      break;
    case Move::kReduce:
      state.pop();
      break;
    case Move::kLeftArc:
      state.add_arc(state.buffer_at(0), state.stack_top(), action.label);
      state.pop();
      break;
    case Move::kRightArc:
      state.add_arc(state.stack_top(), state.buffer_at(0), action.label);
      state.push_front();
      break;
  }
}

bool is_projective(const std::vector<std::size_t>& heads) {
  const std::size_t n = heads.size();
  for (std::size_t d = 1; d <= n; ++d) {
    const std::size_t lo = std::min(heads[d - 1], d);
    const std::size_t hi = std::max(heads[d - 1], d);
    for (std::size_t e = d + 1; e <= n; ++e) {
      const std::size_t elo = std::min(heads[e - 1], e);
      const std::size_t ehi = std::max(heads[e - 1], e);
      if ((lo < elo && elo < hi && hi < ehi) ||
          (elo < lo && lo < ehi && ehi < hi)) {
        return false;
      }
    }
  }
  return true;
}

namespace {

void validate_tree(const GoldTree& tree) {
  const std::size_t n = tree.heads.size();
  if (tree.labels.size() != n) {
    throw OracleUnavailable("label count differs from head count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (tree.heads[i] > n || tree.heads[i] == i + 1) {
      throw OracleUnavailable("invalid head for node " + std::to_string(i + 1));
    }
  }
  // Every node must reach ROOT.
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t node = i;
    for (std::size_t steps = 0; node != 0; ++steps) {
      if (steps > n) throw OracleUnavailable("gold tree contains a cycle");
      node = tree.heads[node - 1];
    }
  }
  if (!is_projective(tree.heads)) {
    throw OracleUnavailable("gold tree is non-projective");
  }
}

}  // namespace

std::vector<ParserAction> oracle_actions(const GoldTree& tree) {
  validate_tree(tree);
  const std::size_t n = tree.heads.size();
  auto gold_head = [&](std::size_t node) { return tree.heads[node - 1]; };
  auto gold_label = [&](std::size_t node) { return tree.labels[node - 1]; };

  ParserState state(n);
  std::vector<ParserAction> actions;
  while (true) {
    const LegalMoves legal = legal_actions(state);
    if (!legal.any()) break;
    const std::size_t top = state.stack_top();
    const std::size_t front = state.buffer_at(0);
    ParserAction next = ParserAction::shift();
    if (legal.left_arc && gold_head(top) == front) {
      next = ParserAction::left_arc(gold_label(top));
    } else if (legal.right_arc && gold_head(front) == top) {
      next = ParserAction::right_arc(gold_label(front));
    } else if (legal.reduce) {
      bool pending = false;
      for (std::size_t b = front; b != kNoNode && b <= n; ++b) {
        if (gold_head(b) == top) {
          pending = true;
          break;
        }
      }
      if (!pending || !legal.shift) {
        next = ParserAction::reduce();
      }
    }
    if (!legal.allows(next.move)) {
      throw OracleUnavailable("oracle reached a dead end");
    }
    apply(state, next);
    actions.push_back(next);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    if (state.head_of(i) != gold_head(i) || state.label_of(i) != gold_label(i)) {
      throw OracleUnavailable("oracle could not rebuild the gold tree");
    }
  }
  return actions;
}

}  // namespace morphpipe
