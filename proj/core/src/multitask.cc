#include "morphpipe/multitask.h"

#include <cmath>
#include <iomanip>

#include "morphpipe/conllu.h"
#include "morphpipe/errors.h"
#include "morphpipe/parser.h"
#include "morphpipe/tagger.h"

namespace morphpipe {

namespace {

int label_id(const LabelSet& set, std::string_view label, std::string_view what) {
  const int id = set.index(label);
  if (id < 0) {
    throw ContractViolation(std::string(what) + " label '" + std::string(label) +
                            "' is not in the inventory");
  }
  return id;
}

// Oracle states of one sentence; false when the gold sequence is not
// reachable under the decoding masks.
bool add_parser_targets(const AnnotatedDoc& doc, const SentenceRange& range,
                        std::size_t column_offset, const MultitaskModel& model,
                        MultitaskExample& ex, std::vector<int>& masks) {
  const ArcEagerScorer& scorer = model.parser();
  const GoldTree tree = gold_tree(doc, range, model.inventories().deprels);
  const std::vector<ParserAction> actions = oracle_actions(tree);
  const auto count = static_cast<std::size_t>(scorer.actions());
  std::vector<SlotIndices> slots;
  std::vector<int> ids;
  std::vector<int> local_masks(count * actions.size());
  ParserState state(range.size());
  for (std::size_t k = 0; k < actions.size(); ++k) {
    int* mask = local_masks.data() + k * count;
    action_mask(state, scorer.labels(), model.root_label(), mask);
    const int id = actions[k].id();
    if (mask[id] == 0) return false;
    slots.push_back(state_slots(state, column_offset));
    ids.push_back(id);
    apply(state, actions[k]);
  }
  ex.slots.insert(ex.slots.end(), slots.begin(), slots.end());
  ex.actions.insert(ex.actions.end(), ids.begin(), ids.end());
  masks.insert(masks.end(), local_masks.begin(), local_masks.end());
  return true;
}

}  // namespace

std::vector<MultitaskExample> build_examples(
    const std::vector<AnnotatedDoc>& docs, const MultitaskModel& model,
    std::size_t per_example, ExampleStats* stats) {
  if (per_example == 0) throw ContractViolation("per_example must be positive");
  const TagInventories& inv = model.inventories();
  std::vector<MultitaskExample> out;
  ExampleStats local;
  for (const AnnotatedDoc& doc : docs) {
    const std::vector<SentenceRange> ranges = sentence_ranges(doc);
    for (std::size_t first = 0; first < ranges.size(); first += per_example) {
      const std::size_t last = std::min(ranges.size(), first + per_example);
      const std::size_t begin = ranges[first].begin;
      const std::size_t end = ranges[last - 1].end;
      MultitaskExample ex;
      for (std::size_t i = begin; i < end; ++i) {
        const Token& t = doc.tokens[i];
        if (!t.upos) {
          throw ContractViolation("token '" + t.text + "' lacks UPOS");
        }
        ex.texts.push_back(t.text);
        ex.upos.push_back(label_id(inv.upos, *t.upos, "UPOS"));
        ex.feats.push_back(label_id(inv.feats, t.feats_label(), "FEATS"));
        ex.sent.push_back(kSentNo);
      }
      std::vector<int> masks;
      for (std::size_t s = first; s < last; ++s) {
        ex.sent[ranges[s].begin - begin] = kSentYes;
        ++local.sentences;
        if (!model.has_parser()) continue;
        bool ok = false;
        try {
          ok = add_parser_targets(doc, ranges[s], ranges[s].begin - begin, model,
                                  ex, masks);
        } catch (const OracleUnavailable&) {
          ok = false;
        }
        if (!ok) ++local.parser_skipped;
      }
      if (!ex.actions.empty()) {
        const auto rows = static_cast<Eigen::Index>(model.parser().actions());
        ex.masks = Eigen::Map<const Eigen::MatrixXi>(
            masks.data(), rows, static_cast<Eigen::Index>(ex.actions.size()));
      }
      out.push_back(std::move(ex));
    }
  }
  if (stats) *stats = local;
  return out;
}

double multitask_loss(MultitaskModel& model, const MultitaskExample& example,
                      bool grads, double scale, Rng* dropout_rng,
                      double dropout) {
  if (example.texts.empty()) return 0.0;
  std::vector<std::string_view> texts(example.texts.begin(), example.texts.end());
  Tok2Vec::Cache cache;
  const Matrix encoded = model.tok2vec().forward(texts, grads ? &cache : nullptr,
                                                 dropout_rng, dropout);
  const bool with_parser = model.has_parser() && !example.actions.empty();
  const double heads = with_parser ? 4.0 : 3.0;
  const double head_scale = scale / heads;

  Matrix dencoded = Matrix::Zero(encoded.rows(), encoded.cols());
  Matrix dlogits;
  double total = 0.0;
  const std::pair<SoftmaxHead*, const std::vector<int>*> tag_heads[] = {
      {&model.upos_head(), &example.upos},
      {&model.feats_head(), &example.feats},
      {&model.sent_head(), &example.sent}};
  for (const auto& [head, gold] : tag_heads) {
    const Matrix logits = head->forward(encoded);
    total += softmax_cross_entropy(logits, *gold, nullptr, head_scale,
                                   grads ? &dlogits : nullptr);
    if (grads) dencoded += head->backward(encoded, dlogits);
  }
  if (with_parser) {
    ArcEagerScorer::Cache pcache;
    const Matrix logits =
        model.parser().forward(encoded, example.slots, grads ? &pcache : nullptr);
    total += softmax_cross_entropy(logits, example.actions, &example.masks,
                                   head_scale, grads ? &dlogits : nullptr);
    if (grads) model.parser().backward(pcache, dlogits, dencoded);
  }
  if (grads) model.tok2vec().backward(cache, dencoded);
  return total / heads;
}

DevScores dev_scores(const MultitaskModel& model,
                     const std::vector<AnnotatedDoc>& docs) {
  std::size_t tokens = 0;
  std::size_t upos_ok = 0;
  std::size_t attached = 0;
  std::size_t heads_ok = 0;
  for (const AnnotatedDoc& gold : docs) {
    if (gold.empty()) continue;
    const auto texts = token_texts(gold);
    const Matrix encoded = model.tok2vec().forward(texts, nullptr);
    AnnotatedDoc pred = gold;
    tag_encoded(pred, model, encoded);
    for (std::size_t i = 0; i < gold.size(); ++i) {
      ++tokens;
      if (pred.tokens[i].upos == gold.tokens[i].upos) ++upos_ok;
    }
    if (!model.has_parser()) continue;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      pred.tokens[i].sent_start = gold.tokens[i].sent_start;
    }
    parse_encoded(pred, model, encoded);
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!gold.tokens[i].head) continue;
      ++attached;
      if (pred.tokens[i].head == gold.tokens[i].head) ++heads_ok;
    }
  }
  DevScores out;
  if (tokens > 0) out.upos = static_cast<double>(upos_ok) / static_cast<double>(tokens);
  if (attached > 0) {
    out.uas = static_cast<double>(heads_ok) / static_cast<double>(attached);
  }
  return out;
}

TrainLog train_multitask(MultitaskModel& model,
                         const std::vector<AnnotatedDoc>& train,
                         const std::vector<AnnotatedDoc>& dev,
                         const TrainConfig& config, std::ostream* log) {
  TrainLog result;
  const std::vector<MultitaskExample> examples =
      build_examples(train, model, config.sentences_per_example, &result.stats);
  if (examples.empty()) throw ConfigError("training set is empty");
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
  if (log && result.stats.parser_skipped > 0) {
    *log << "parser: skipped " << result.stats.parser_skipped << " of "
         << result.stats.sentences << " sentences without an oracle\n";
  }
  const std::vector<AnnotatedDoc>& selection = dev.empty() ? train : dev;

  ParamList params = model.params();
  Adam adam(params, config);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<Matrix> best;
  double best_score = -1.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    double norm_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        batch_loss += scale * multitask_loss(model, examples[order[k]], true,
                                             scale, &rng, config.dropout);
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batches + 1) +
                               ": loss is not finite");
      }
      norm_sum += adam.step();
      if (!all_finite(params)) {
        throw TrainingDiverged("epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batches + 1) +
                               ": parameters are not finite");
      }
      epoch_loss += batch_loss;
      ++batches;
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = epoch_loss / static_cast<double>(batches);
    entry.grad_norm = norm_sum / static_cast<double>(batches);
    const DevScores scores = dev_scores(model, selection);
    entry.dev_upos = scores.upos;
    entry.dev_uas = scores.uas;
    entry.score = model.has_parser() ? 0.5 * (scores.upos + scores.uas) : scores.upos;
    result.epochs.push_back(entry);
    if (entry.score >= best_score) {
      best_score = entry.score;
      result.best_epoch = epoch;
      best.clear();
      for (const Param* p : params) best.push_back(p->value);
    }
    if (log) {
      *log << "epoch " << epoch << std::fixed << std::setprecision(4)
           << " loss " << entry.loss << " dev_upos " << entry.dev_upos;
      if (model.has_parser()) *log << " dev_uas " << entry.dev_uas;
      *log << '\n' << std::defaultfloat;
    }
  }
  if (!best.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  }
  round_to_float(params);
  return result;
}

TaggerTraining train_tagger(const std::vector<AnnotatedDoc>& train,
                            const std::vector<AnnotatedDoc>& dev,
                            const ModelDims& dims,
                            std::shared_ptr<const StaticVectors> vectors,
                            const TrainConfig& config, std::ostream* log,
                            const std::vector<AnnotatedDoc>& extra_inventory_docs) {
  std::vector<AnnotatedDoc> all = train;
  all.insert(all.end(), extra_inventory_docs.begin(), extra_inventory_docs.end());
  if (train.empty()) throw ConfigError("training set is empty");
  TaggerTraining out;
  out.model = std::make_unique<MultitaskModel>(
      dims, TagInventories::collect(all, false), std::move(vectors));
  Rng rng(config.seed);
  out.model->init(rng);
  out.log = train_multitask(*out.model, train, dev, config, log);
  return out;
}

}  // namespace morphpipe
