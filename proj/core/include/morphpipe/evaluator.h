#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "morphpipe/doc.h"
#include "morphpipe/entity_tags.h"

namespace morphpipe {

struct MetricScore {
  std::size_t gold = 0;
  std::size_t system = 0;
  std::size_t matched = 0;

  double precision() const;
  double recall() const;
  // 2PR/(P+R), 0 when both are 0.
  double f1() const;
};

struct EvalReport {
  MetricScore tokens;
  MetricScore sentences;
  MetricScore upos;
  MetricScore ufeats;
  MetricScore lemmas;
  MetricScore uas;
  MetricScore las;
  std::optional<MetricScore> ner;

  std::vector<std::pair<std::string, MetricScore>> metrics() const;
};

// Token matching over the concatenated non-whitespace characters of all
// documents. Token indices are global (documents in order).
struct Alignment {
  std::vector<long> gold_to_sys;  // -1 when unmatched
  std::size_t gold_tokens = 0;
  std::size_t system_tokens = 0;
  std::size_t matched = 0;
};

// Throws IncomparableInput when the non-whitespace character streams differ.
Alignment align(const std::vector<AnnotatedDoc>& gold,
                const std::vector<AnnotatedDoc>& system);

// Word-level F1 in the style of the CoNLL 2018 shared task: attribute
// metrics count matched tokens whose field agrees (FEATS canonically, lemma
// case-sensitively); UAS needs the heads to be aligned to each other (or
// both ROOT), LAS also the same deprel.
EvalReport evaluate(const std::vector<AnnotatedDoc>& gold,
                    const std::vector<AnnotatedDoc>& system);

// Micro-averaged exact-match span F1. Throws IncomparableInput when the
// token sequences differ.
MetricScore evaluate_ner(const std::vector<NerSentence>& gold,
                         const std::vector<NerSentence>& system);

// Aligned plain-text table.
std::string format_table(const EvalReport& report);
// "metric<TAB>precision<TAB>recall<TAB>f1" per metric.
std::string format_lines(const EvalReport& report);

}  // namespace morphpipe
