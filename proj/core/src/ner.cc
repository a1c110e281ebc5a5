#include "morphpipe/ner.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>

#include "morphpipe/conllu.h"
#include "morphpipe/errors.h"

namespace morphpipe {

namespace {

constexpr TagPrefix kPrefixes[] = {TagPrefix::kBegin, TagPrefix::kInside,
                                   TagPrefix::kLast, TagPrefix::kUnit};

bool closes_entity(const EntityTag& tag) {
  return tag.prefix == TagPrefix::kLast || tag.prefix == TagPrefix::kUnit;
}

bool opens_entity(const EntityTag& tag) {
  return tag.prefix == TagPrefix::kBegin || tag.prefix == TagPrefix::kUnit;
}

std::vector<EntityTag> sentence_tags(const AnnotatedDoc& doc,
                                     const SentenceRange& range) {
  std::vector<EntityTag> tags;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    std::optional<EntityTag> tag;
    if (doc.tokens[i].ent) tag = EntityTag::parse(*doc.tokens[i].ent);
    tags.push_back(tag.value_or(EntityTag::outside()));
  }
  return tags;
}

// Input column for one decision.
void fill_input(const NerModel& model, const Matrix& encoded, Eigen::Index col,
                int prev, const SentenceRange* entity, Eigen::Ref<Vector> out) {
  const auto w = static_cast<Eigen::Index>(model.dims().width);
  const auto td = static_cast<Eigen::Index>(model.dims().ner_tag_dim);
  out.head(w) = encoded.col(col);
  out.segment(w, td) = model.tag_embeddings().value.col(prev < 0 ? model.start_tag() : prev);
  if (entity == nullptr) {
    out.tail(w) = model.null_entity().value.col(0);
  } else {
    out.tail(w) = encoded.middleCols(static_cast<Eigen::Index>(entity->begin),
                                     static_cast<Eigen::Index>(entity->size()))
                      .rowwise()
                      .mean();
  }
}

struct SpanCounts {
  std::size_t gold = 0;
  std::size_t system = 0;
  std::size_t matched = 0;

  double f1() const {
    if (gold + system == 0) return 0.0;
    return 2.0 * static_cast<double>(matched) / static_cast<double>(gold + system);
  }
};

}  // namespace

NerModel::NerModel(const ModelDims& dims, LabelSet classes,
                   std::shared_ptr<const StaticVectors> vectors)
    : dims_(dims),
      classes_(std::move(classes)),
      tok2vec_(dims, std::move(vectors), "ner.tok2vec."),
      tag_embed_("ner.tags", static_cast<Eigen::Index>(dims.ner_tag_dim),
                 tag_count() + 1),
      null_entity_("ner.null_entity", static_cast<Eigen::Index>(dims.width), 1),
      out_(2 * dims.width + dims.ner_tag_dim,
           static_cast<std::size_t>(tag_count()), "ner.out") {}

void NerModel::init(Rng& rng) {
  tok2vec_.init(rng);
  tag_embed_.init_uniform(rng, 0.1);
  null_entity_.init_uniform(rng, 0.1);
}

EntityTag NerModel::tag_at(int id) const {
  if (id <= 0) return EntityTag::outside();
  const auto k = static_cast<std::size_t>(id - 1);
  return {kPrefixes[k % 4], classes_[k / 4]};
}

int NerModel::tag_id(const EntityTag& tag) const {
  if (tag.prefix == TagPrefix::kOutside) return 0;
  const int cls = classes_.index(tag.label);
  if (cls < 0) return -1;
  int offset = 0;
  while (kPrefixes[offset] != tag.prefix) ++offset;
  return 1 + 4 * cls + offset;
}

ParamList NerModel::params() {
  ParamList out = tok2vec_.params();
  out.push_back(&tag_embed_);
  out.push_back(&null_entity_);
  for (Param* p : out_.params()) out.push_back(p);
  return out;
}

void ner_tag_mask(const NerModel& model, int prev, bool last_in_sentence,
                  int* mask) {
  std::optional<EntityTag> before;
  if (prev >= 0) before = model.tag_at(prev);
  for (int id = 0; id < model.tag_count(); ++id) {
    const EntityTag tag = model.tag_at(id);
    bool ok = bilou_transition_allowed(before, tag);
    if (last_in_sentence &&
        (tag.prefix == TagPrefix::kBegin || tag.prefix == TagPrefix::kInside)) {
      ok = false;
    }
    mask[id] = ok;
  }
}

std::vector<NerExample> build_ner_examples(const std::vector<AnnotatedDoc>& docs,
                                           const NerModel& model,
                                           std::size_t per_example) {
  if (per_example == 0) throw ContractViolation("per_example must be positive");
  std::vector<NerExample> out;
  NerExample current;
  std::vector<int> masks;
  std::size_t held = 0;
  const auto tags = static_cast<std::size_t>(model.tag_count());
  auto flush = [&] {
    if (held == 0) return;
    current.masks = Eigen::Map<const Eigen::MatrixXi>(
        masks.data(), static_cast<Eigen::Index>(tags),
        static_cast<Eigen::Index>(current.tags.size()));
    out.push_back(std::move(current));
    current = NerExample();
    masks.clear();
    held = 0;
  };
  for (const AnnotatedDoc& doc : docs) {
    for (const SentenceRange& range : sentence_ranges(doc)) {
      std::vector<EntitySpan> spans = bilou_to_spans(sentence_tags(doc, range));
      std::erase_if(spans, [&](const EntitySpan& s) {
        return model.classes().index(s.label) < 0;
      });
      const std::vector<EntityTag> gold = spans_to_bilou(spans, range.size());
      const std::size_t offset = current.texts.size();
      current.sentences.push_back({offset, offset + range.size()});
      int prev = -1;
      for (std::size_t i = 0; i < range.size(); ++i) {
        current.texts.push_back(doc.tokens[range.begin + i].text);
        const int id = model.tag_id(gold[i]);
        current.tags.push_back(id);
        const std::size_t at = masks.size();
        masks.resize(at + tags);
        ner_tag_mask(model, prev, i + 1 == range.size(), masks.data() + at);
        prev = id;
      }
      if (++held == per_example) flush();
    }
  }
  flush();
  return out;
}

double ner_loss(NerModel& model, const NerExample& example, bool grads,
                double scale, Rng* dropout_rng, double dropout) {
  if (example.texts.empty()) return 0.0;
  std::vector<std::string_view> texts(example.texts.begin(), example.texts.end());
  Tok2Vec::Cache cache;
  const Matrix encoded = model.tok2vec().forward(texts, grads ? &cache : nullptr,
                                                 dropout_rng, dropout);
  const auto w = static_cast<Eigen::Index>(model.dims().width);
  const auto td = static_cast<Eigen::Index>(model.dims().ner_tag_dim);
  const Eigen::Index n = encoded.cols();
  Matrix input(2 * w + td, n);
  std::vector<int> prevs(static_cast<std::size_t>(n), -1);
  std::vector<std::optional<SentenceRange>> entities(static_cast<std::size_t>(n));
  for (const SentenceRange& s : example.sentences) {
    int prev = -1;
    std::optional<SentenceRange> last;
    std::size_t open = s.begin;
    for (std::size_t i = s.begin; i < s.end; ++i) {
      prevs[i] = prev;
      entities[i] = last;
      fill_input(model, encoded, static_cast<Eigen::Index>(i), prev,
                 last ? &*last : nullptr, input.col(static_cast<Eigen::Index>(i)));
      const EntityTag tag = model.tag_at(example.tags[i]);
      if (opens_entity(tag)) open = i;
      if (closes_entity(tag)) last = SentenceRange{open, i + 1};
      prev = example.tags[i];
    }
  }
  const Matrix logits = model.output().forward(input);
  Matrix dlogits;
  const double loss = softmax_cross_entropy(logits, example.tags, &example.masks,
                                            scale, grads ? &dlogits : nullptr);
  if (!grads) return loss;

  const Matrix dinput = model.output().backward(input, dlogits);
  Matrix dencoded = dinput.topRows(w);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const int prev = prevs[k];
    model.tag_embeddings().grad.col(prev < 0 ? model.start_tag() : prev) +=
        dinput.col(i).segment(w, td);
    const auto dsummary = dinput.col(i).tail(w);
    if (!entities[k]) {
      model.null_entity().grad.col(0) += dsummary;
    } else {
      const SentenceRange& e = *entities[k];
      const double share = 1.0 / static_cast<double>(e.size());
      for (std::size_t j = e.begin; j < e.end; ++j) {
        dencoded.col(static_cast<Eigen::Index>(j)) += share * dsummary;
      }
    }
  }
  model.tok2vec().backward(cache, dencoded);
  return loss;
}

std::vector<EntitySpan> recognize(AnnotatedDoc& doc, const NerModel& model) {
  std::vector<EntitySpan> spans;
  if (doc.empty()) return spans;
  const auto texts = token_texts(doc);
  const Matrix encoded = model.tok2vec().forward(texts, nullptr);
  const auto w = static_cast<Eigen::Index>(model.dims().width);
  const auto td = static_cast<Eigen::Index>(model.dims().ner_tag_dim);
  const Matrix& weight = model.output().weight().value;
  // Encoder part of every decision at once; the rest depends on the
  // previous decisions.
  Matrix base = weight.leftCols(w) * encoded;
  base.colwise() += model.output().bias().value.col(0);
  const auto tail = weight.rightCols(w + td);
  std::vector<int> mask(static_cast<std::size_t>(model.tag_count()));
  Vector extra(w + td);
  for (const SentenceRange& s : sentence_ranges(doc)) {
    int prev = -1;
    std::optional<SentenceRange> last;
    std::size_t open = s.begin;
    std::vector<EntityTag> tags;
    for (std::size_t i = s.begin; i < s.end; ++i) {
      extra.head(td) = model.tag_embeddings().value.col(prev < 0 ? model.start_tag() : prev);
      if (last) {
        extra.tail(w) = encoded.middleCols(static_cast<Eigen::Index>(last->begin),
                                           static_cast<Eigen::Index>(last->size()))
                            .rowwise()
                            .mean();
      } else {
        extra.tail(w) = model.null_entity().value.col(0);
      }
      const Vector logits = base.col(static_cast<Eigen::Index>(i)) + tail * extra;
      ner_tag_mask(model, prev, i + 1 == s.end, mask.data());
      const int best = masked_argmax(logits, mask.data());
      const EntityTag tag = model.tag_at(best);
      if (opens_entity(tag)) open = i;
      if (closes_entity(tag)) last = SentenceRange{open, i + 1};
      doc.tokens[i].ent = tag.str();
      tags.push_back(tag);
      prev = best;
    }
    for (EntitySpan span : bilou_to_spans(tags)) {
      span.start += s.begin;
      span.end += s.begin;
      spans.push_back(std::move(span));
    }
  }
  return spans;
}

std::vector<EntitySpan> doc_entity_spans(const AnnotatedDoc& doc) {
  std::vector<EntitySpan> spans;
  for (const SentenceRange& s : sentence_ranges(doc)) {
    for (EntitySpan span : bilou_to_spans(sentence_tags(doc, s))) {
      span.start += s.begin;
      span.end += s.begin;
      spans.push_back(std::move(span));
    }
  }
  return spans;
}

std::vector<AnnotatedDoc> ner_docs(const std::vector<NerSentence>& sentences) {
  std::vector<AnnotatedDoc> out;
  out.reserve(sentences.size());
  for (const NerSentence& s : sentences) out.push_back(doc_from_ner_sentence(s));
  return out;
}

NerTraining train_ner(const std::vector<AnnotatedDoc>& train,
                      const std::vector<AnnotatedDoc>& dev,
                      const ModelDims& dims,
                      std::shared_ptr<const StaticVectors> vectors,
                      const TrainConfig& config, std::ostream* log) {
  if (train.empty()) throw ConfigError("NER training set is empty");
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::string> labels;
  for (const AnnotatedDoc& doc : train) {
    for (const EntitySpan& s : doc_entity_spans(doc)) labels.push_back(s.label);
  }
  NerTraining result;
  LabelSet classes(std::move(labels));
  std::set<std::string> unknown;
  for (const AnnotatedDoc& doc : dev) {
    for (const EntitySpan& s : doc_entity_spans(doc)) {
      if (classes.index(s.label) < 0) unknown.insert(s.label);
    }
  }
  for (const std::string& label : unknown) {
    result.warnings.push_back("entity class '" + label +
                              "' occurs in dev but not in train; scored as O");
    if (log) *log << "warning: " << result.warnings.back() << '\n';
  }

  result.model = std::make_unique<NerModel>(dims, classes, std::move(vectors));
  NerModel& model = *result.model;
  Rng init_rng(config.seed);
  model.init(init_rng);
  const std::vector<NerExample> examples =
      build_ner_examples(train, model, config.sentences_per_example);

  const std::vector<AnnotatedDoc>& selection = dev.empty() ? train : dev;
  ParamList params = model.params();
  Adam adam(params, config);
  Rng rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Matrix> best;
  double best_f1 = -1.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        batch_loss += scale * ner_loss(model, examples[order[k]], true, scale,
                                       &rng, config.dropout);
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingDiverged("NER epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batches + 1) +
                               ": loss is not finite");
      }
      adam.step();
      epoch_loss += batch_loss;
      ++batches;
    }
    SpanCounts counts;
    for (const AnnotatedDoc& gold : selection) {
      std::vector<EntitySpan> expected = doc_entity_spans(gold);
      std::erase_if(expected, [&](const EntitySpan& s) {
        return classes.index(s.label) < 0;
      });
      AnnotatedDoc pred = gold;
      const std::vector<EntitySpan> found = recognize(pred, model);
      counts.gold += expected.size();
      counts.system += found.size();
      for (const EntitySpan& s : found) {
        if (std::find(expected.begin(), expected.end(), s) != expected.end()) {
          ++counts.matched;
        }
      }
    }
    NerEpochLog entry{epoch, batches ? epoch_loss / static_cast<double>(batches) : 0.0,
                      counts.f1()};
    result.epochs.push_back(entry);
    if (entry.dev_f1 >= best_f1) {
      best_f1 = entry.dev_f1;
      result.best_epoch = epoch;
      best.clear();
      for (const Param* p : params) best.push_back(p->value);
    }
    if (log) {
      *log << "ner epoch " << epoch << std::fixed << std::setprecision(4)
           << " loss " << entry.loss << " dev_f1 " << entry.dev_f1 << '\n'
           << std::defaultfloat;
    }
  }
  if (!best.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  }
  round_to_float(params);
  return result;
}

}  // namespace morphpipe
