#include "doctest.h"

#include <algorithm>
#include <set>

#include "morphpipe/errors.h"
#include "morphpipe/model.h"
#include "morphpipe/parser.h"
#include "morphpipe/parser_scorer.h"
#include "morphpipe/transition.h"
#include "trees.h"

using namespace morphpipe;

namespace {

using testing::Heads;
using testing::brute_projective;
using testing::is_tree;
using testing::sample_projective_tree;

std::set<std::tuple<std::size_t, std::size_t, int>> run_actions(
    std::size_t n, const std::vector<ParserAction>& actions) {
  ParserState state(n);
  for (const ParserAction& a : actions) apply(state, a);
  CHECK(state.is_terminal());
  std::set<std::tuple<std::size_t, std::size_t, int>> arcs;
  for (const Arc& arc : state.arcs()) arcs.insert({arc.head, arc.dependent, arc.label});
  return arcs;
}

TagInventories toy_inventories() {
  TagInventories inv;
  inv.upos = LabelSet({"NOUN", "VERB"});
  inv.feats = LabelSet({"_"});
  inv.deprels = LabelSet({"root", "nsubj", "obj", "dep"});
  return inv;
}

ModelDims tiny_dims() {
  ModelDims d;
  d.embed.static_dim = 0;
  d.embed.hash_dim = 4;
  d.embed.norm_rows = 64;
  d.embed.affix_rows = 32;
  d.width = 8;
  d.pieces = 2;
  d.depth = 2;
  d.parser_hidden = 6;
  d.parser_pieces = 2;
  return d;
}

}  // namespace

TEST_CASE("legal actions") {
  ParserState s(3);
  LegalMoves initial;
  initial.shift = true;
  initial.right_arc = true;
  CHECK(legal_actions(s) == initial);

  ParserState one(1);
  apply(one, ParserAction::right_arc(0));
  LegalMoves reduce_only;
  reduce_only.reduce = true;
  CHECK(legal_actions(one) == reduce_only);
  apply(one, ParserAction::reduce());
  CHECK(one.is_terminal());
  CHECK_FALSE(legal_actions(one).any());
  CHECK_THROWS_AS(apply(one, ParserAction::shift()), ContractViolation);

  ParserState fresh(2);
  CHECK_THROWS_AS(apply(fresh, ParserAction::left_arc(0)), ContractViolation);
  CHECK_THROWS_AS(apply(fresh, ParserAction::reduce()), ContractViolation);
}

TEST_CASE("hand-traced transitions") {
  auto prepared = [] {
    ParserState s(3);
    apply(s, ParserAction::shift());
    CHECK(s.stack() == std::vector<std::size_t>{0, 1});
    CHECK(s.buffer_at(0) == 2);
    CHECK(s.arcs().empty());
    return s;
  };
  ParserState left = prepared();
  apply(left, ParserAction::left_arc(5));
  CHECK(left.arcs() == std::vector<Arc>{{2, 1, 5}});
  CHECK(left.stack() == std::vector<std::size_t>{0});
  CHECK(left.buffer_at(0) == 2);

  ParserState right = prepared();
  apply(right, ParserAction::right_arc(1));
  CHECK(right.arcs() == std::vector<Arc>{{1, 2, 1}});
  CHECK(right.stack() == std::vector<std::size_t>{0, 1, 2});
  CHECK(right.buffer_at(0) == 3);
  CHECK(right.buffer_at(1) == kNoNode);
}

TEST_CASE("action ids") {
  for (int id = 0; id < ParserAction::count(5); ++id) {
    CHECK(ParserAction::from_id(id).id() == id);
  }
  CHECK(ParserAction::right_arc(2).id() == 7);
  CHECK(ParserAction::left_arc(0).id() == 2);
}

TEST_CASE("oracle hand traces") {
  GoldTree tree{{2, 0, 2}, {1, 0, 2}};
  const auto actions = oracle_actions(tree);
  CHECK(actions == std::vector<ParserAction>{
                       ParserAction::shift(), ParserAction::left_arc(1),
                       ParserAction::right_arc(0), ParserAction::right_arc(2),
                       ParserAction::reduce(), ParserAction::reduce()});
  CHECK(oracle_actions(GoldTree{{0}, {0}}) ==
        std::vector<ParserAction>{ParserAction::right_arc(0), ParserAction::reduce()});
  // 1 -> 3 crosses 2 -> 4.
  CHECK_THROWS_AS(oracle_actions(GoldTree{{3, 4, 0, 3}, {0, 0, 0, 0}}), OracleUnavailable);
  CHECK_THROWS_AS(oracle_actions(GoldTree{{2, 1}, {0, 0}}), OracleUnavailable);
  CHECK_FALSE(is_projective({3, 4, 0, 3}));
  CHECK(is_projective({2, 0, 2}));
}

TEST_CASE("oracle reconstructs 1000 random projective trees exactly") {
  Rng rng(2024);
  std::size_t reconstructed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    const Heads heads = sample_projective_tree(n, rng);
    GoldTree tree;
    tree.heads = heads;
    for (std::size_t i = 0; i < n; ++i) tree.labels.push_back(static_cast<int>(rng.below(4)));
    CHECK(is_projective(heads));
    const auto actions = oracle_actions(tree);
    CHECK(actions.size() == 2 * n);
    std::set<std::tuple<std::size_t, std::size_t, int>> gold;
    for (std::size_t i = 0; i < n; ++i) gold.insert({heads[i], i + 1, tree.labels[i]});
    if (run_actions(n, actions) == gold) ++reconstructed;
  }
  CHECK(reconstructed == 1000);
}

TEST_CASE("projectivity agrees with brute force on all small head functions") {
  for (std::size_t n = 1; n <= 5; ++n) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= n + 1;
    for (std::size_t code = 0; code < total; ++code) {
      Heads heads(n);
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i) {
        heads[i] = c % (n + 1);
        c /= n + 1;
      }
      if (!is_tree(heads)) continue;
      CHECK(is_projective(heads) == brute_projective(heads));
    }
  }
}

TEST_CASE("state slots") {
  ParserState s(4);
  const SlotIndices initial = state_slots(s, 10);
  CHECK(initial[0] == kRootSlot);
  CHECK(initial[2] == 10);
  CHECK(initial[3] == 11);
  for (std::size_t k : {1, 4, 5, 6, 7}) CHECK(initial[k] == kNullSlot);
  apply(s, ParserAction::shift());
  apply(s, ParserAction::left_arc(0));
  apply(s, ParserAction::right_arc(0));
  // stack [0, 2], buffer [3, 4], 2 has the single child 1, head ROOT.
  const SlotIndices slots = state_slots(s, 10);
  CHECK(slots[0] == 11);
  CHECK(slots[1] == kRootSlot);
  CHECK(slots[2] == 12);
  CHECK(slots[3] == 13);
  CHECK(slots[4] == 10);
  CHECK(slots[5] == 10);
  CHECK(slots[6] == kNullSlot);
  CHECK(slots[7] == kRootSlot);
}

TEST_CASE("decoding mask") {
  const int labels = 3;
  const int root = 0;
  std::vector<int> mask(static_cast<std::size_t>(ParserAction::count(labels)));
  ParserState s(2);
  action_mask(s, labels, root, mask.data());
  CHECK(mask[ParserAction::shift().id()] == 1);
  CHECK(mask[ParserAction::right_arc(0).id()] == 1);
  CHECK(mask[ParserAction::right_arc(1).id()] == 0);
  apply(s, ParserAction::right_arc(0));
  apply(s, ParserAction::reduce());
  action_mask(s, labels, root, mask.data());
  CHECK(mask[ParserAction::right_arc(0).id()] == 0);
  CHECK(mask[ParserAction::shift().id()] == 1);
  apply(s, ParserAction::shift());
  action_mask(s, labels, root, mask.data());
  // Stack top 2, empty buffer, unattached: nothing left to do.
  CHECK(std::count(mask.begin(), mask.end(), 1) == 0);
}

TEST_CASE("scorer: feature width, precomputation and determinism") {
  Rng rng(31);
  ArcEagerScorer scorer(8, 6, 2, 4, "parser.");
  scorer.init(rng);
  for (Param* p : scorer.params()) p->init_uniform(rng, 0.5);
  Matrix encoded(8, 7);
  for (Eigen::Index i = 0; i < encoded.size(); ++i) encoded.data()[i] = rng.normal();
  const auto pre = scorer.precompute(encoded);
  std::vector<SlotIndices> slots;
  for (int k = 0; k < 40; ++k) {
    SlotIndices s;
    for (long& v : s) v = static_cast<long>(rng.below(9)) - 2;
    slots.push_back(s);
  }
  slots.push_back(slots[3]);
  ArcEagerScorer::Cache cache;
  const Matrix logits = scorer.forward(encoded, slots, &cache);
  CHECK(cache.features.rows() == 8 * 8);
  CHECK(logits.rows() == scorer.actions());
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const Vector fast = scorer.score(pre, slots[k]);
    CHECK((fast - logits.col(static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK(scorer.score(pre, slots[3]) == scorer.score(pre, slots.back()));
}

TEST_CASE("gradient check: parser feature layer and encoder input") {
  Rng rng(32);
  ArcEagerScorer scorer(8, 6, 2, 3, "parser.");
  scorer.init(rng);
  for (Param* p : scorer.params()) p->init_uniform(rng, 0.5);
  Param encoded("encoded", 8, 5);
  for (Eigen::Index i = 0; i < encoded.value.size(); ++i) encoded.value.data()[i] = rng.normal();
  // Oracle states of a 5-token tree.
  const GoldTree tree{{2, 0, 2, 5, 3}, {1, 0, 2, 1, 2}};
  std::vector<SlotIndices> slots;
  std::vector<int> gold;
  Eigen::MatrixXi masks(ParserAction::count(3), 0);
  ParserState state(5);
  for (const ParserAction& a : oracle_actions(tree)) {
    slots.push_back(state_slots(state, 0));
    gold.push_back(a.id());
    masks.conservativeResize(Eigen::NoChange, masks.cols() + 1);
    action_mask(state, 3, 0, masks.col(masks.cols() - 1).data());
    apply(state, a);
  }
  ParamList params = scorer.params();
  params.push_back(&encoded);
  auto loss = [&](bool grads) {
    ArcEagerScorer::Cache cache;
    const Matrix logits = scorer.forward(encoded.value, slots, &cache);
    Matrix d;
    const double l = softmax_cross_entropy(logits, gold, &masks, 1.0, grads ? &d : nullptr);
    if (grads) {
      Matrix dencoded = Matrix::Zero(8, 5);
      scorer.backward(cache, d, dencoded);
      encoded.grad += dencoded;
    }
    return l;
  };
  const auto result = gradient_check(loss, params, 1000, rng);
  INFO("worst parameter: " << result.worst_param);
  CHECK(result.max_relative_error <= 1e-4);
}

TEST_CASE("repair turns any greedy result into a tree") {
  const LabelSet deprels({"dep", "nsubj", "root"});
  GreedyParse none{{kNoNode, kNoNode, kNoNode}, {-1, -1, -1}, 0};
  TreeEdges t = repair_tree(none, deprels);
  CHECK(t.heads == Heads{0, 1, 1});
  CHECK(t.labels == std::vector<std::string>{"root", "dep", "dep"});
  GreedyParse partial{{2, 0, kNoNode}, {1, 2, -1}, 0};
  t = repair_tree(partial, deprels);
  CHECK(t.heads == Heads{2, 0, 2});
  CHECK(t.labels == std::vector<std::string>{"nsubj", "root", "dep"});
}

TEST_CASE("random models always produce trees within 2n steps") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    MultitaskModel model(tiny_dims(), toy_inventories(), nullptr);
    model.init(rng);
    model.add_parser(toy_inventories().deprels, rng);
    for (Param* p : model.parser().params()) p->init_uniform(rng, 1.0);
    const std::size_t n = 1 + rng.below(25);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(rng.below(50)));
    AnnotatedDoc doc = doc_from_words(words);
    // Random sentence boundaries.
    for (std::size_t i = 1; i < n; ++i) {
      doc.tokens[i].sent_start = rng.below(6) == 0 ? SentStart::kYes : SentStart::kNo;
    }
    std::vector<std::string_view> texts;
    for (const Token& tk : doc.tokens) texts.push_back(tk.text);
    const Matrix encoded = model.tok2vec().forward(texts, nullptr);
    const auto pre = model.parser().precompute(encoded);
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i < n && !doc.tokens[i].is_sent_start()) continue;
      const GreedyParse g = greedy_parse(model.parser(), pre, begin, i - begin, model.root_label());
      CHECK(g.steps <= 2 * (i - begin));
      begin = i;
    }
    parse_encoded(doc, model, encoded);
    CHECK(check_invariants(doc).empty());
    // Per sentence: one root, acyclic, heads inside the sentence.
    std::size_t start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i < n && !doc.tokens[i].is_sent_start()) continue;
      Heads heads;
      std::size_t roots = 0;
      for (std::size_t k = start; k < i; ++k) {
        const Token& tk = doc.tokens[k];
        REQUIRE(tk.head.has_value());
        if (tk.head->is_root()) {
          ++roots;
          heads.push_back(0);
          CHECK(tk.deprel == "root");
        } else {
          CHECK(tk.head->index() >= start);
          CHECK(tk.head->index() < i);
          heads.push_back(tk.head->index() - start + 1);
          CHECK(tk.deprel != "root");
        }
      }
      CHECK(roots == 1);
      CHECK(is_tree(heads));
      start = i;
    }
  }
}

TEST_CASE("gold trees from documents") {
  AnnotatedDoc doc = doc_from_words({"a", "b", "c"});
  doc.tokens[0].head = Attachment::to(1);
  doc.tokens[0].deprel = "nsubj";
  doc.tokens[1].head = Attachment::root();
  doc.tokens[1].deprel = "root";
  doc.tokens[2].head = Attachment::to(1);
  doc.tokens[2].deprel = "obj";
  const LabelSet deprels({"nsubj", "obj", "root"});
  const GoldTree tree = gold_tree(doc, {0, 3}, deprels);
  CHECK(tree.heads == Heads{2, 0, 2});
  CHECK(tree.labels == std::vector<int>{0, 2, 1});
  CHECK_THROWS_AS(gold_tree(doc, {0, 1}, deprels), OracleUnavailable);
  doc.tokens[2].deprel = "amod";
  CHECK_THROWS_AS(gold_tree(doc, {0, 3}, deprels), OracleUnavailable);
}
