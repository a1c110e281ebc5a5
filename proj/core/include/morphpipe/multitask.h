#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "morphpipe/doc.h"
#include "morphpipe/model.h"
#include "morphpipe/nn.h"

namespace morphpipe {

// A run of consecutive gold sentences with precomputed targets.
struct MultitaskExample {
  std::vector<std::string> texts;
  std::vector<int> upos;
  std::vector<int> feats;
  std::vector<int> sent;
  // Parser targets over all oracle states of the contained sentences.
  std::vector<SlotIndices> slots;
  std::vector<int> actions;
  Eigen::MatrixXi masks;  // actions x states
};

struct ExampleStats {
  std::size_t sentences = 0;
  // Sentences whose tree had no oracle sequence; they still train the tagger.
  std::size_t parser_skipped = 0;
};

// Groups each document's sentences `per_example` at a time. Parser targets
// are built when the model has a parser. Tokens with labels outside the
// inventory throw ContractViolation.
std::vector<MultitaskExample> build_examples(
    const std::vector<AnnotatedDoc>& docs, const MultitaskModel& model,
    std::size_t per_example, ExampleStats* stats = nullptr);

// Mean over the active heads of each head's mean cross-entropy. With
// `grads`, scaled gradients are accumulated into the parameters.
double multitask_loss(MultitaskModel& model, const MultitaskExample& example,
                      bool grads, double scale = 1.0, Rng* dropout_rng = nullptr,
                      double dropout = 0.0);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double dev_upos = 0.0;
  double dev_uas = 0.0;  // 0 without a parser
  double score = 0.0;    // selection metric
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  ExampleStats stats;
};

struct DevScores {
  double upos = 0.0;
  double uas = 0.0;
};

// Accuracy of predicted UPOS and (with a parser, on gold sentence
// boundaries) unlabeled attachment against gold-tokenized documents.
DevScores dev_scores(const MultitaskModel& model,
                     const std::vector<AnnotatedDoc>& docs);

// Trains every parameter of `model` on `train`; after each epoch scores
// `dev` (the training set when dev is empty) and finally restores the best
// epoch. Selection uses UPOS accuracy, or the mean of UPOS accuracy and UAS
// when the model has a parser; ties go to the later epoch. Values are
// rounded to float32 at the end. Throws TrainingDiverged on a non-finite loss.
TrainLog train_multitask(MultitaskModel& model,
                         const std::vector<AnnotatedDoc>& train,
                         const std::vector<AnnotatedDoc>& dev,
                         const TrainConfig& config, std::ostream* log = nullptr);

struct TaggerTraining {
  std::unique_ptr<MultitaskModel> model;
  TrainLog log;
};

// Builds inventories from `train` plus `extra_inventory_docs`, initializes
// from the config seed and trains the tagger and sentence-start heads.
TaggerTraining train_tagger(const std::vector<AnnotatedDoc>& train,
                            const std::vector<AnnotatedDoc>& dev,
                            const ModelDims& dims,
                            std::shared_ptr<const StaticVectors> vectors,
                            const TrainConfig& config,
                            std::ostream* log = nullptr,
                            const std::vector<AnnotatedDoc>& extra_inventory_docs = {});

}  // namespace morphpipe
