#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "morphpipe/doc.h"
#include "morphpipe/lemmatizer.h"
#include "morphpipe/model.h"
#include "morphpipe/ner.h"
#include "morphpipe/nn.h"
#include "morphpipe/tokenizer.h"

namespace morphpipe {

struct PipelineConfig {
  std::filesystem::path train;
  std::filesystem::path dev;
  std::filesystem::path test;
  std::filesystem::path pretrain;  // enables the two-step schedule
  std::filesystem::path vectors;
  std::filesystem::path rules;     // default rules when empty
  std::filesystem::path model_dir;
  std::vector<std::filesystem::path> ner_train;  // concatenated
  std::filesystem::path ner_dev;

  bool parser = true;
  bool lemmatizer = true;

  ModelDims dims;
  TrainConfig training;
  std::size_t pretrain_epochs = 20;
  std::size_t ner_epochs = 30;
  LemmatizerOptions lemma;
  bool vectors_case_fallback = true;

  // "key = value" lines, '#' comments. Relative paths resolve against
  // `base_dir`. Throws ConfigError on unknown keys or bad values.
  static PipelineConfig parse(std::string_view text,
                              const std::filesystem::path& base_dir = {});
  static PipelineConfig read_file(const std::filesystem::path& path);

  // Canonical "key = value" lines accepted by parse().
  std::string str() const;

  // Throws ConfigError when a referenced input path is missing.
  void validate() const;
};

class Pipeline {
 public:
  Pipeline() = default;
  Pipeline(Pipeline&&) = default;
  Pipeline& operator=(Pipeline&&) = default;

  TokenizerRules rules;
  std::shared_ptr<const StaticVectors> vectors;
  std::filesystem::path vectors_path;
  std::unique_ptr<MultitaskModel> tagger;
  std::optional<Lemmatizer> lemmatizer;
  std::unique_ptr<NerModel> ner;
  PipelineConfig config;

  // Runs every trained stage over an already tokenized document: tag,
  // parse each predicted sentence, lemmatize, recognize entities.
  void annotate(AnnotatedDoc& doc) const;
  AnnotatedDoc annotate_text(std::string_view text) const;

  std::vector<std::string> components() const;
};

// Step 1 (with a pretrain corpus): tagger and sentence heads on the pretrain
// corpus. Step 2: the parser head joins and every weight trains on the gold
// corpus. Then lemma rules from the gold corpus and, with NER corpora, the
// entity recognizer.
Pipeline train_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

// Same, from corpora already in memory; file paths of `config` other than
// the rules are ignored.
Pipeline train_pipeline(const PipelineConfig& config,
                        const std::vector<AnnotatedDoc>& train,
                        const std::vector<AnnotatedDoc>& dev,
                        const std::vector<AnnotatedDoc>& pretrain,
                        const std::vector<AnnotatedDoc>& ner_train,
                        const std::vector<AnnotatedDoc>& ner_dev,
                        std::shared_ptr<const StaticVectors> vectors,
                        std::ostream* log = nullptr);

std::vector<AnnotatedDoc> read_conllu_file(const std::filesystem::path& path);
std::vector<NerSentence> read_ner_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

struct BenchmarkResult {
  std::size_t tokens = 0;  // per pass
  std::vector<double> seconds;
  double tokens_per_second = 0.0;  // median pass
  std::size_t peak_rss_bytes = 0;
};

// One warm-up pass, then `runs` timed passes of tokenize + annotate over
// `texts`, single-threaded.
BenchmarkResult benchmark(const Pipeline& pipeline,
                          const std::vector<std::string>& texts,
                          std::size_t runs);

// Peak resident set size of this process so far; 0 when unavailable.
std::size_t peak_rss_bytes();

}  // namespace morphpipe
